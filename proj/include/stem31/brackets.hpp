#pragma once

#include <optional>
#include <string>
#include <vector>

#include "stem31/resolve.hpp"

namespace stem31 {

/*
 * Secondary compositions {a, b, c}_t.  A bracket is only an object once its
 * two defining composites are certified zero; its value is a coset of the
 * indeterminacy subgroup.  Everything here checks hypotheses per instance
 * and hands back the produced set expression together with a one-line note
 * of what was discharged; nothing fires silently.
 */

struct BrkSpec {
  EP a, b, c;
  int t = 0;
  Deg deg;  // degree of the value
};

// Read a Brk expression, check entry composability, compute the value
// degree.  Entries are taken as written: rewriting inside a bracket slot is
// a separate, cited step, never something this layer does on its own.
std::optional<BrkSpec> as_bracket(const RwCtx& ctx, const EP& e, std::string* why = nullptr);

EP brk_expr(const BrkSpec& s);

// Structural desuspension by t: classes walk their declared suspension
// links, iota and E-wrappers shed dimensions, sums and scalars recurse.
std::optional<EP> desuspend(const Catalog& cat, const EP& e, int t);

/**** well-definedness ****/

struct Wd {
  bool ok = false;
  EP b0, c0;        // entries pulled back t suspensions
  NF ab, bc;        // witnesses: a.b and b0.c0 both normalize to 0
  std::string why;  // set when not ok
};

Wd well_defined(const RwCtx& ctx, const BrkSpec& s);

/**** indeterminacy ****/

/*
 * ind {a,b,c}_t = a . E^t pi(m-t, A0) + pi(p+1, X) . E(c), with m the value
 * stem, A0 the t-fold desuspension of a's domain, X the target and p+1 the
 * suspended domain dimension of c.  Both groups must be in the catalog; the
 * result is their generators composed through, as expressions.
 */
struct Ind {
  std::vector<EP> gens;
  bool partial = false;  // a flanking presentation was partial
  std::string note;      // which groups fed the computation
};

std::optional<Ind> indeterminacy(const RwCtx& ctx, const BrkSpec& s, std::string* why = nullptr);

// Resolve the indeterminacy span inside the value group.  Generators whose
// composites stay opaque are dropped and flag the result partial, making it
// an under-listed over-approximation: membership conclusions survive,
// equality claims must refuse it.
struct IndSub {
  std::vector<Subgroup> per_cand;  // parallel to view.cands
  bool partial = false;
};

std::optional<IndSub> resolve_ind(const RwCtx& ctx, const GroupView& view, const Ind& ind,
                                  std::string* why = nullptr);

/**** instance-checked bracket laws ****/

struct LawOut {
  EP set;               // the containing set the law yields
  bool negate = false;  // the law actually lands in -set (shuffle, suspension)
  std::string note;     // hypotheses discharged
};

// alpha . {b,c,d}_t  <=  -{alpha,b,c}_t . E^{t+1}(d0)
std::optional<LawOut> shuffle_left(const RwCtx& ctx, const EP& alpha, const BrkSpec& s,
                                   std::string* why = nullptr);

// {a,b,c}_t . E^{t+1}(d0)  <=  -a . {b,c,d}_t   with d = E^t(d0)
std::optional<LawOut> shuffle_right(const RwCtx& ctx, const BrkSpec& s, const EP& delta,
                                    std::string* why = nullptr);

// alpha . {b,c,d}_t  <=  {alpha.b, c, d}_t
std::optional<LawOut> absorb_left(const RwCtx& ctx, const EP& alpha, const BrkSpec& s,
                                  std::string* why = nullptr);

// {a,b,c}_t . E^{t+1}(d0)  <=  {a, b, c.E^t(d0)}_t
std::optional<LawOut> absorb_right(const RwCtx& ctx, const BrkSpec& s, const EP& delta,
                                   std::string* why = nullptr);

// {a, b.c, d}_t  <=  {a.b, c, d}_t      (slide 1)
// {a, b, c.d}_t  <=  {a, b.c, d}_t      (slide 2)
std::optional<LawOut> slide(const RwCtx& ctx, const BrkSpec& s, int which,
                            std::string* why = nullptr);

// {a,b,c}_t . (m iota)  <=  {a, b, m c}_t
std::optional<LawOut> scalar_right(const RwCtx& ctx, const BrkSpec& s, i64 m,
                                   std::string* why = nullptr);

// E {a,b,c}_t  <=  -{Ea,Eb,Ec}_{t+1}; with an epi fact for the suspension
// on the ambient groups the containment upgrades to equality.
std::optional<LawOut> suspend_bracket(const RwCtx& ctx, const BrkSpec& s, const Fact* eq_by,
                                      bool* is_eq, std::string* why = nullptr);

// {a,b,c}_t  <=  {a,b,c}_t2 for t2 <= t (looser desuspension requirement)
std::optional<LawOut> relax_bracket(const RwCtx& ctx, const BrkSpec& s, int t2,
                                    std::string* why = nullptr);

// {a,b,c}_t2 = {a,b,c}_t for t2 < t, justified by equal resolved
// indeterminacies (the catalog groups make both sides computable).
std::optional<LawOut> subeq_bracket(const RwCtx& ctx, const BrkSpec& s, int t2,
                                    const GroupView& view, std::string* why = nullptr);

// Entry additivity: splitting a sum in the first or third slot.
//   {a+a', b, c}_t  <=  {a,b,c}_t + {a',b,c}_t   (and symmetrically)
std::optional<LawOut> add_split(const RwCtx& ctx, const BrkSpec& s, int entry,
                                std::string* why = nullptr);

// The five-entry Jacobi sum: {{a,b,c},Ed,Ee} + {a,{b,c,d},Ee} + {a,b,{c,d,e}}
// contains 0 once all six brackets are well defined.
struct JacobiOut {
  EP t1, t2, t3;
  std::string note;
};
std::optional<JacobiOut> jacobi_sum(const RwCtx& ctx, const EP& a, const EP& b, const EP& c,
                                    const EP& d, const EP& e, std::string* why = nullptr);

}  // namespace stem31
