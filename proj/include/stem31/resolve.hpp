#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stem31/kb.hpp"
#include "stem31/normalize.hpp"

namespace stem31 {

/*
 * Resolution: reading a normal form as an element of a cataloged group.
 * Each summand of the presentation becomes one coordinate slot; the normal
 * form's chains are matched against the generators' canonical chains and
 * the coefficients become coordinates.  Ambiguous coefficients (odd units,
 * unresolved signs, congruence-constrained unknowns) expand into a set of
 * candidate vectors, and every downstream claim has to hold for the whole
 * set.
 */

// Verdicts for claims.  Unknown never advances a proof.
enum class Tri { Yes, No, Unknown };
std::string show_tri(Tri t);
Tri tri_both(Tri a, Tri b);  // agreement, else Unknown

/*
 * One concrete reading of a presentation.  Marker summands that the fact
 * base has not pinned down leave several candidates; group claims must hold
 * in every one of them.
 */
struct Pres {
  AbGroup ab;
  std::map<std::string, Vec> gmap;  // canonical chain key -> coordinates
  std::string tag;                  // marker choices, for diagnostics
};

// Display state of one catalog summand after marker resolution.
struct SummandView {
  enum class K { Num, G1, G2, Z4Pair, Z2Pair, Dropped };
  K k = K::Num;  // G1/G2 = still unresolved
  i64 order = 0;
  const Summand* s = nullptr;
};

struct GroupView {
  const GroupRec* rec = nullptr;
  Space space;
  int k = 0;
  bool partial = false;
  std::vector<Pres> cands;  // nonempty; size 1 once every marker is pinned
  std::vector<SummandView> svs;
};

/*
 * Build the view for pi(k, sp).  Generators are normalized through ctx, so
 * element matching sees exactly the chains the rewriter produces; marker
 * summands are resolved from the facts in ctx where possible (a G generator
 * rewriting to 0 drops the summand, an order fact or a proven 2a = b pins a
 * G2 pair).  Returns nullopt with a reason when no presentation is recorded
 * or the presentation cannot be set up consistently.
 */
std::optional<GroupView> group_view(const RwCtx& ctx, Space sp, int k,
                                    std::string* why = nullptr);

// All coordinate vectors the terms can stand for in one candidate, reduced
// and deduplicated.  nullopt when a chain matches no generator or the
// ambiguity cannot be bounded.
std::optional<std::vector<Vec>> resolve_terms(const RwCtx& ctx, const Pres& p,
                                              const std::vector<Term>& ts,
                                              std::string* why = nullptr);

// Per-candidate value sets for a whole normal form.
struct Resolved {
  std::vector<std::vector<Vec>> sets;  // parallel to view.cands
};
std::optional<Resolved> resolve_nf(const RwCtx& ctx, const GroupView& v,
                                   const NF& nf, std::string* why = nullptr);

// Order of a single element; 0 means infinite.
i64 elem_order(const AbGroup& G, const Vec& v);

/*
 * Claims, each quantified over candidates and over the ambiguity sets.
 * eq_in_group checks the derived set against the claimed set (derived
 * contained in claimed); a claimed side reusing one unknown across several
 * terms is refused as Unknown since the expansion would overcount.
 */
Tri zero_in_group(const RwCtx& ctx, const GroupView& v, const NF& nf,
                  std::string* why = nullptr);
Tri eq_in_group(const RwCtx& ctx, const GroupView& v, const NF& derived,
                const NF& claimed, std::string* why = nullptr);
// complete=false (a span over a partial presentation) demotes No to Unknown.
Tri mem_span_in_group(const RwCtx& ctx, const GroupView& v, const NF& elem,
                      const std::vector<EP>& span_gens, bool complete = true,
                      std::string* why = nullptr);
Tri coseteq_in_group(const RwCtx& ctx, const GroupView& v, const NF& derived,
                     const NF& claimed, const std::vector<EP>& mod_gens,
                     bool complete = true, std::string* why = nullptr);
Tri order_eq_in_group(const RwCtx& ctx, const GroupView& v, const NF& nf, i64 m,
                      std::string* why = nullptr);
Tri order_div_in_group(const RwCtx& ctx, const GroupView& v, const NF& nf, i64 m,
                       std::string* why = nullptr);

// Span of the given elements inside one candidate, signs and odd units
// stripped (they do not change a span over 2-power cyclic slots).
std::optional<Subgroup> span_in(const RwCtx& ctx, const Pres& p,
                                const std::vector<EP>& gens,
                                std::string* why = nullptr);

// Generator list of a set-valued expression usable as a span: a Span node
// yields its arguments, pi(k, X) yields that group's generators (complete
// drops to false over a partial presentation, which demotes No verdicts),
// a scalar multiple scales the generators, anything element-valued is a
// one-element list.
std::optional<std::vector<EP>> span_gens_of(const RwCtx& ctx, const EP& e,
                                            bool* complete = nullptr,
                                            std::string* why = nullptr);

}  // namespace stem31
