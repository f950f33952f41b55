#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "stem31/catalog.hpp"

namespace stem31 {

/*
 * Working form: a sum of terms, each a coefficient times a chain of factors
 * written outer-to-inner.  A Paren factor is an unexpanded sub-sum sitting
 * inside a chain; it only distributes outward when the distributive law
 * actually holds there (outer sums and outer scalars move past a factor only
 * when everything to its right is a certified suspension; inner ones always
 * move).
 */

struct Term;

struct Factor {
  enum class K { Cls, Iota, Susp, Hopf, PMap, Wh, Brk, Pi, Span, Paren };
  K k = K::Cls;
  std::string name;        // Cls
  int inst = 0;            // Cls
  int n = 0;               // Iota dim, Susp power, Brk t, Pi k
  Space sp;                // Pi
  std::vector<EP> args;    // Susp/Hopf/PMap: 1, Wh: 2, Brk: 3, Span: any
  std::vector<Term> inner; // Paren
};

struct Term {
  Coeff c;
  std::vector<Factor> fs;
};

EP factor_to_expr(const Factor& f);
EP term_to_expr(const Term& t);
EP terms_to_expr(const std::vector<Term>& ts);
std::string show_term(const Term& t);
std::string show_terms(const std::vector<Term>& ts);

// Canonical print keys used to match chains; coefficients excluded.
std::string factor_key(const Factor& f);
std::string chain_key(const Term& t);

// First script variable (a bare class name) inside the expression, if any.
std::optional<std::string> find_bare(const EP& e);

/**** rewrite context ****/

struct CompiledRule {
  std::string id;
  Term lhs;          // single term
  EP rhs;
  const RelRec* rec = nullptr;
  bool flipped = false;
  // Flips join the default scan only when the forward direction could not be
  // compiled; otherwise they would just undo it.  Excluded flips stay
  // addressable for targeted rewrite steps.
  bool in_scan = true;
};

std::vector<CompiledRule> compile_rules(const Catalog& cat);

struct Fact;  // defined in kb.hpp

struct RwCtx {
  const Catalog* cat = nullptr;
  const std::vector<CompiledRule>* rules = nullptr;
  std::vector<const Fact*> eq_facts;  // arrival order, used as rewrites after rules
  std::vector<const Fact*> ann_facts; // lhs . pi(k, X) = 0 shapes
  std::vector<const Fact*> epi_facts;
  std::vector<const Fact*> susp_facts;  // eq facts certifying something as E(y)
  std::vector<const Fact*> exp_facts;   // exponent pi(k,X) | m
  std::vector<const Fact*> ord_facts;   // order statements about elements
  const CongEnv* cong = nullptr;
  int depth = 64;
};

struct NF {
  std::vector<Term> terms;  // empty = zero
  bool depth_hit = false;
  std::optional<std::string> error;
  std::vector<std::string> trace;

  bool is_zero() const { return terms.empty() && !error; }
};

NF normalize(const RwCtx& ctx, const EP& e);

// True when the engine can certify the expression as a suspension (so sums
// and scalars may distribute past it from the left).
bool susp_certified(const RwCtx& ctx, const EP& e);
bool factor_certified(const RwCtx& ctx, const Factor& f);

// E^t of an already flattened sum; zero terms are dropped (E kills Whitehead
// products and everything in the image of P).
std::vector<Term> suspend_terms(const RwCtx& ctx, std::vector<Term> ts, int t);

std::vector<Term> flatten_expr(const RwCtx& ctx, const EP& e, std::string& err);

// Structural equality of normal forms (after canonical sorting).
bool nf_equal(const NF& a, const NF& b);

}  // namespace stem31
