#include "stem31/brackets.hpp"

#include <fmt/format.h>

#include "stem31/kb.hpp"

namespace stem31 {

std::optional<BrkSpec> as_bracket(const RwCtx& ctx, const EP& e, std::string* why) {
  auto fail = [&](std::string m) -> std::optional<BrkSpec> {
    if (why) *why = std::move(m);
    return std::nullopt;
  };
  if (!e || e->k != Expr::K::Brk) return fail("not a bracket expression");
  if (e->n < 0) return fail("negative bracket subscript");
  DegRes dr = deg_of(*ctx.cat, e);
  if (!dr.ok()) return fail(dr.err);
  BrkSpec s;
  s.a = e->sub[0];
  s.b = e->sub[1];
  s.c = e->sub[2];
  s.t = e->n;
  s.deg = dr.d;
  return s;
}

EP brk_expr(const BrkSpec& s) { return mk_brk(s.a, s.b, s.c, s.t); }

std::optional<EP> desuspend(const Catalog& cat, const EP& e, int t) {
  if (t == 0) return e;
  if (t < 0 || !e) return std::nullopt;
  switch (e->k) {
    case Expr::K::Zero:
      return e;
    case Expr::K::Iota:
      if (e->n - t < 1) return std::nullopt;
      return mk_iota(e->n - t);
    case Expr::K::Cls:
      if (e->inst == kBareInst) return std::nullopt;
      if (!suspends_to(cat, e->name, e->inst - t, e->inst)) return std::nullopt;
      return mk_cls(e->name, e->inst - t);
    case Expr::K::Susp: {
      if (e->n >= t) return e->n == t ? e->sub[0] : mk_susp(e->n - t, e->sub[0]);
      return desuspend(cat, e->sub[0], t - e->n);
    }
    case Expr::K::Scal: {
      auto r = desuspend(cat, e->sub[0], t);
      if (!r) return std::nullopt;
      return mk_scal(e->c, *r);
    }
    case Expr::K::Comp: {
      std::vector<EP> fs;
      for (const EP& f : e->sub) {
        auto r = desuspend(cat, f, t);
        if (!r) return std::nullopt;
        fs.push_back(*r);
      }
      return mk_comp(std::move(fs));
    }
    case Expr::K::Sum: {
      std::vector<EP> ts;
      for (const EP& f : e->sub) {
        auto r = desuspend(cat, f, t);
        if (!r) return std::nullopt;
        ts.push_back(*r);
      }
      return mk_sum(std::move(ts));
    }
    default:
      // H, P, Whitehead products and set-valued forms do not desuspend
      // structurally; when they do at all, it is by a cited fact.
      return std::nullopt;
  }
}

/**** well-definedness ****/

Wd well_defined(const RwCtx& ctx, const BrkSpec& s) {
  Wd w;
  auto b0 = desuspend(*ctx.cat, s.b, s.t);
  if (!b0) {
    w.why = fmt::format("middle entry {} is not a {}-fold suspension", show_expr(s.b), s.t);
    return w;
  }
  auto c0 = desuspend(*ctx.cat, s.c, s.t);
  if (!c0) {
    w.why = fmt::format("right entry {} is not a {}-fold suspension", show_expr(s.c), s.t);
    return w;
  }
  w.b0 = *b0;
  w.c0 = *c0;
  w.ab = normalize(ctx, mk_comp({s.a, s.b}));
  if (w.ab.error) {
    w.why = fmt::format("normalizing {}.{}: {}", show_expr(s.a), show_expr(s.b), *w.ab.error);
    return w;
  }
  if (!w.ab.is_zero()) {
    w.why = fmt::format("{}.{} does not vanish, residual {}", show_expr(s.a), show_expr(s.b),
                        show_terms(w.ab.terms));
    return w;
  }
  w.bc = normalize(ctx, mk_comp({w.b0, w.c0}));
  if (w.bc.error) {
    w.why = fmt::format("normalizing {}.{}: {}", show_expr(w.b0), show_expr(w.c0), *w.bc.error);
    return w;
  }
  if (!w.bc.is_zero()) {
    w.why = fmt::format("{}.{} does not vanish, residual {}", show_expr(w.b0), show_expr(w.c0),
                        show_terms(w.bc.terms));
    return w;
  }
  w.ok = true;
  return w;
}

/**** indeterminacy ****/

namespace {

// Space-level desuspension: spheres down to S^1, Moore spaces down to M^2.
std::optional<Space> despace(Space x, int t) {
  if (t == 0) return x;
  switch (x.k) {
    case Space::K::S: return x.n - t >= 1 ? std::optional(sphere(x.n - t)) : std::nullopt;
    case Space::K::M: return x.n - t >= 2 ? std::optional(Space{Space::K::M, x.n - t}) : std::nullopt;
    default: return std::nullopt;
  }
}

EP susp_wrap(int t, const EP& e) { return t == 0 ? e : mk_susp(t, e); }

void push_gens(std::vector<EP>& out, const Summand& sm,
               const std::function<EP(const EP&)>& wrap) {
  if (!sm.gen) return;
  out.push_back(wrap(sm.gen));
  if (sm.k == Summand::K::G2 && sm.gen2) out.push_back(wrap(sm.gen2));
}

}  // namespace

std::optional<Ind> indeterminacy(const RwCtx& ctx, const BrkSpec& s, std::string* why) {
  auto fail = [&](std::string m) -> std::optional<Ind> {
    if (why) *why = std::move(m);
    return std::nullopt;
  };
  const Catalog& cat = *ctx.cat;
  if (s.deg.dom.k != Space::K::S) return fail("bracket value domain is not a sphere");
  int m = s.deg.dom.n;
  Space X = s.deg.cod;

  DegRes da = deg_of(cat, s.a);
  if (!da.ok()) return fail(da.err);
  auto A0 = despace(da.d.dom, s.t);
  if (!A0)
    return fail(fmt::format("cannot desuspend {} by {}", show_space(da.d.dom), s.t));
  const GroupRec* left = cat.group(*A0, m - s.t);
  if (!left)
    return fail(fmt::format("no catalog group pi({}, {})", m - s.t, show_space(*A0)));

  DegRes dc = deg_of(cat, s.c);
  if (!dc.ok()) return fail(dc.err);
  if (dc.d.cod.k != Space::K::S) return fail("right entry target is not a sphere");
  int p = dc.d.cod.n;
  const GroupRec* right = cat.group(X, p + 1);
  if (!right)
    return fail(fmt::format("no catalog group pi({}, {})", p + 1, show_space(X)));

  Ind out;
  out.partial = left->partial || right->partial;
  for (const Summand& sm : left->summands)
    push_gens(out.gens, sm, [&](const EP& g) { return mk_comp({s.a, susp_wrap(s.t, g)}); });
  for (const Summand& sm : right->summands)
    push_gens(out.gens, sm, [&](const EP& g) { return mk_comp({g, mk_susp(1, s.c)}); });
  out.note = fmt::format("ind over pi({}, {}) and pi({}, {})", m - s.t, show_space(*A0),
                         p + 1, show_space(X));
  return out;
}

std::optional<IndSub> resolve_ind(const RwCtx& ctx, const GroupView& view, const Ind& ind,
                                  std::string* why) {
  (void)why;
  IndSub out;
  out.partial = ind.partial;
  for (const Pres& pr : view.cands) {
    Subgroup acc = sub_trivial(pr.ab);
    for (const EP& g : ind.gens) {
      auto sg = span_in(ctx, pr, {g});
      if (sg)
        acc = sub_sum(acc, *sg);
      else
        // Dropping an opaque generator under-lists the subgroup, which keeps
        // membership conclusions sound but rules out equality claims.
        out.partial = true;
    }
    out.per_cand.push_back(std::move(acc));
  }
  return out;
}

/**** instance-checked bracket laws ****/

namespace {

// Build {a,b,c}_t, run the degree checks and both vanishing hypotheses.
std::optional<BrkSpec> checked(const RwCtx& ctx, const EP& a, const EP& b, const EP& c, int t,
                               std::string* why, Wd* wd_out = nullptr) {
  std::string w;
  auto s = as_bracket(ctx, mk_brk(a, b, c, t), &w);
  if (!s) {
    if (why) *why = w;
    return std::nullopt;
  }
  Wd wd = well_defined(ctx, *s);
  if (!wd.ok) {
    if (why) *why = wd.why;
    return std::nullopt;
  }
  if (wd_out) *wd_out = wd;
  return s;
}

bool original_ok(const RwCtx& ctx, const BrkSpec& s, std::string* why, Wd* wd_out = nullptr) {
  Wd wd = well_defined(ctx, s);
  if (!wd.ok) {
    if (why) *why = fmt::format("bracket {} not well defined: {}", show_expr(brk_expr(s)), wd.why);
    return false;
  }
  if (wd_out) *wd_out = wd;
  return true;
}

std::optional<LawOut> no_law(std::string* why, std::string m) {
  if (why) *why = std::move(m);
  return std::nullopt;
}

}  // namespace

std::optional<LawOut> shuffle_left(const RwCtx& ctx, const EP& alpha, const BrkSpec& s,
                                   std::string* why) {
  Wd wd;
  if (!original_ok(ctx, s, why, &wd)) return std::nullopt;
  DegRes comp = deg_of(*ctx.cat, mk_comp({alpha, brk_expr(s)}));
  if (!comp.ok()) return no_law(why, comp.err);
  auto ns = checked(ctx, alpha, s.a, s.b, s.t, why);
  if (!ns) return std::nullopt;
  LawOut out;
  out.set = mk_comp({brk_expr(*ns), mk_susp(s.t + 1, wd.c0)});
  out.negate = true;
  out.note = fmt::format("shuffled {} across; new hypotheses checked on {}",
                         show_expr(alpha), show_expr(brk_expr(*ns)));
  return out;
}

std::optional<LawOut> shuffle_right(const RwCtx& ctx, const BrkSpec& s, const EP& delta,
                                    std::string* why) {
  if (!original_ok(ctx, s, why)) return std::nullopt;
  auto d1 = desuspend(*ctx.cat, delta, 1);
  if (!d1)
    return no_law(why, fmt::format("right factor {} is not a suspension", show_expr(delta)));
  auto ns = checked(ctx, s.b, s.c, *d1, s.t, why);
  if (!ns) return std::nullopt;
  DegRes comp = deg_of(*ctx.cat, mk_comp({brk_expr(s), delta}));
  if (!comp.ok()) return no_law(why, comp.err);
  LawOut out;
  out.set = mk_comp({s.a, brk_expr(*ns)});
  out.negate = true;
  out.note = fmt::format("shuffled {} inside; new hypotheses checked on {}",
                         show_expr(delta), show_expr(brk_expr(*ns)));
  return out;
}

std::optional<LawOut> absorb_left(const RwCtx& ctx, const EP& alpha, const BrkSpec& s,
                                  std::string* why) {
  if (!original_ok(ctx, s, why)) return std::nullopt;
  DegRes comp = deg_of(*ctx.cat, mk_comp({alpha, brk_expr(s)}));
  if (!comp.ok()) return no_law(why, comp.err);
  auto ns = checked(ctx, mk_comp({alpha, s.a}), s.b, s.c, s.t, why);
  if (!ns) return std::nullopt;
  LawOut out;
  out.set = brk_expr(*ns);
  out.note = fmt::format("absorbed {} into the left entry", show_expr(alpha));
  return out;
}

std::optional<LawOut> absorb_right(const RwCtx& ctx, const BrkSpec& s, const EP& delta,
                                   std::string* why) {
  if (!original_ok(ctx, s, why)) return std::nullopt;
  // {a,b,c}.E(d1) sits inside {a,b,c.d1}: the composed factor loses one
  // suspension when it moves into the bracket.
  auto d1 = desuspend(*ctx.cat, delta, 1);
  if (!d1)
    return no_law(why, fmt::format("right factor {} is not a suspension", show_expr(delta)));
  DegRes comp = deg_of(*ctx.cat, mk_comp({brk_expr(s), delta}));
  if (!comp.ok()) return no_law(why, comp.err);
  auto ns = checked(ctx, s.a, s.b, mk_comp({s.c, *d1}), s.t, why);
  if (!ns) return std::nullopt;
  LawOut out;
  out.set = brk_expr(*ns);
  out.note = fmt::format("absorbed {} into the right entry", show_expr(*d1));
  return out;
}

std::optional<LawOut> slide(const RwCtx& ctx, const BrkSpec& s, int which, std::string* why) {
  if (!original_ok(ctx, s, why)) return std::nullopt;
  std::optional<BrkSpec> ns;
  std::string moved = "a factor";
  if (which == 1) {
    if (s.b && s.b->k == Expr::K::Scal) {
      // {a, m b, c} = {a, (m iota).b, c} <= {a.(m iota), b, c} = {m a, b, c}.
      // Writing the scalar as a composed degree map needs b to be a
      // suspension; pulling it into a is then unconditional.
      if (!susp_certified(ctx, s.b->sub[0]))
        return no_law(why, fmt::format("cannot slide the scalar off {}: not a suspension",
                                       show_expr(s.b->sub[0])));
      ns = checked(ctx, mk_scal(s.b->c, s.a), s.b->sub[0], s.c, s.t, why);
      moved = "the scalar";
    } else if (s.b && s.b->k == Expr::K::Comp && s.b->sub.size() >= 2) {
      EP beta = s.b->sub[0];
      std::vector<EP> rest(s.b->sub.begin() + 1, s.b->sub.end());
      EP gamma = rest.size() == 1 ? rest[0] : mk_comp(std::move(rest));
      ns = checked(ctx, mk_comp({s.a, beta}), gamma, s.c, s.t, why);
    } else {
      return no_law(why, "middle entry is not a composite, nothing to slide");
    }
  } else if (which == 2) {
    if (s.c && s.c->k == Expr::K::Scal) {
      if (!susp_certified(ctx, s.c->sub[0]))
        return no_law(why, fmt::format("cannot slide the scalar off {}: not a suspension",
                                       show_expr(s.c->sub[0])));
      ns = checked(ctx, s.a, mk_scal(s.c->c, s.b), s.c->sub[0], s.t, why);
      moved = "the scalar";
    } else if (s.c && s.c->k == Expr::K::Comp && s.c->sub.size() >= 2) {
      EP gamma = s.c->sub[0];
      std::vector<EP> rest(s.c->sub.begin() + 1, s.c->sub.end());
      EP delta = rest.size() == 1 ? rest[0] : mk_comp(std::move(rest));
      ns = checked(ctx, s.a, mk_comp({s.b, gamma}), delta, s.t, why);
    } else {
      return no_law(why, "right entry is not a composite, nothing to slide");
    }
  } else {
    return no_law(why, fmt::format("slide position must be 1 or 2, got {}", which));
  }
  if (!ns) return std::nullopt;
  LawOut out;
  out.set = brk_expr(*ns);
  out.note = fmt::format("slid {} {}", moved, which == 1 ? "out of the middle entry"
                                                         : "out of the right entry");
  return out;
}

std::optional<LawOut> scalar_right(const RwCtx& ctx, const BrkSpec& s, i64 m, std::string* why) {
  if (!original_ok(ctx, s, why)) return std::nullopt;
  auto ns = checked(ctx, s.a, s.b, mk_scal(coeff_int(m), s.c), s.t, why);
  if (!ns) return std::nullopt;
  LawOut out;
  out.set = brk_expr(*ns);
  out.note = fmt::format("pulled the degree {} map into the right entry", m);
  return out;
}

std::optional<LawOut> suspend_bracket(const RwCtx& ctx, const BrkSpec& s, const Fact* eq_by,
                                      bool* is_eq, std::string* why) {
  if (is_eq) *is_eq = false;
  if (!original_ok(ctx, s, why)) return std::nullopt;
  auto ns = checked(ctx, mk_susp(1, s.a), mk_susp(1, s.b), mk_susp(1, s.c), s.t + 1, why);
  if (!ns) return std::nullopt;
  LawOut out;
  out.set = brk_expr(*ns);
  out.negate = true;
  out.note = "suspension of every entry, subscript raised";
  if (eq_by) {
    // Equality needs the cited fact to say E maps the value group onto the
    // suspended value group; anything else is a citation error, not a
    // silent downgrade to containment.
    const FactStmt& st = eq_by->st;
    if (st.k != FactStmt::K::Epi || st.map.k != MapRef::K::E || st.map.t != 1)
      return no_law(why, fmt::format("fact {} is not a single-suspension epi statement",
                                     eq_by->id));
    if (!st.a || st.a->k != Expr::K::PiSet || !st.b || st.b->k != Expr::K::PiSet)
      return no_law(why, fmt::format("fact {} does not relate two homotopy groups", eq_by->id));
    Deg want = s.deg;
    Deg got = pi_deg(st.a->n, st.a->sp);
    Deg want2 = Deg{suspend(want.dom, 1), suspend(want.cod, 1)};
    Deg got2 = pi_deg(st.b->n, st.b->sp);
    if (got != want || got2 != want2)
      return no_law(why, fmt::format("fact {} covers {} -> {}, bracket value lives in {}",
                                     eq_by->id, show_deg(got), show_deg(got2), show_deg(want)));
    if (is_eq) *is_eq = true;
    out.note = fmt::format("suspension is onto here ({}), containment upgrades to equality",
                           eq_by->id);
  }
  return out;
}

std::optional<LawOut> relax_bracket(const RwCtx& ctx, const BrkSpec& s, int t2,
                                    std::string* why) {
  if (t2 < 0 || t2 > s.t)
    return no_law(why, fmt::format("can only relax the subscript downward, {} -> {}", s.t, t2));
  if (!original_ok(ctx, s, why)) return std::nullopt;
  auto ns = checked(ctx, s.a, s.b, s.c, t2, why);
  if (!ns) return std::nullopt;
  LawOut out;
  out.set = brk_expr(*ns);
  out.note = fmt::format("subscript relaxed {} -> {}", s.t, t2);
  return out;
}

std::optional<LawOut> subeq_bracket(const RwCtx& ctx, const BrkSpec& s, int t2,
                                    const GroupView& view, std::string* why) {
  if (!original_ok(ctx, s, why)) return std::nullopt;
  auto ns = checked(ctx, s.a, s.b, s.c, t2, why);
  if (!ns) return std::nullopt;
  std::string w;
  auto i1 = indeterminacy(ctx, s, &w);
  if (!i1) return no_law(why, fmt::format("indeterminacy at t={}: {}", s.t, w));
  auto i2 = indeterminacy(ctx, *ns, &w);
  if (!i2) return no_law(why, fmt::format("indeterminacy at t={}: {}", t2, w));
  auto r1 = resolve_ind(ctx, view, *i1, &w);
  auto r2 = resolve_ind(ctx, view, *i2, &w);
  if (!r1 || !r2) return no_law(why, fmt::format("could not resolve an indeterminacy: {}", w));
  if (r1->partial || r2->partial)
    return no_law(why, "an indeterminacy resolved only partially, refusing the equality");
  for (size_t i = 0; i < view.cands.size(); ++i) {
    if (!sub_eq(r1->per_cand[i], r2->per_cand[i]))
      return no_law(why, fmt::format("indeterminacies differ at t={} vs t={}: {} vs {}", s.t, t2,
                                     show_invariants(sub_invariants(r1->per_cand[i])),
                                     show_invariants(sub_invariants(r2->per_cand[i]))));
  }
  LawOut out;
  out.set = brk_expr(*ns);
  out.note = fmt::format("indeterminacies at t={} and t={} agree, subscripts interchangeable",
                         s.t, t2);
  return out;
}

std::optional<LawOut> add_split(const RwCtx& ctx, const BrkSpec& s, int entry,
                                std::string* why) {
  if (entry != 1 && entry != 2 && entry != 3)
    return no_law(why, fmt::format("entry must be 1, 2 or 3, got {}", entry));
  // The middle split is sound because the flanking entries alone fix the
  // indeterminacy subgroup: a member for b+b' decomposes as a sum of
  // members modulo that shared subgroup, and each summand bracket already
  // contains its whole coset of it.
  const EP& slot = entry == 1 ? s.a : entry == 2 ? s.b : s.c;
  if (!slot || slot->k != Expr::K::Sum)
    return no_law(why, "the chosen entry is not a sum");
  std::vector<EP> parts;
  for (const EP& piece : slot->sub) {
    auto ns = entry == 1   ? checked(ctx, piece, s.b, s.c, s.t, why)
              : entry == 2 ? checked(ctx, s.a, piece, s.c, s.t, why)
                           : checked(ctx, s.a, s.b, piece, s.t, why);
    if (!ns) return std::nullopt;
    parts.push_back(brk_expr(*ns));
  }
  LawOut out;
  out.set = mk_sum(std::move(parts));
  out.note = fmt::format("split a sum in entry {} into {} brackets", entry, parts.size());
  return out;
}

std::optional<JacobiOut> jacobi_sum(const RwCtx& ctx, const EP& a, const EP& b, const EP& c,
                                    const EP& d, const EP& e, std::string* why) {
  auto fail = [&](std::string m) -> std::optional<JacobiOut> {
    if (why) *why = std::move(m);
    return std::nullopt;
  };
  std::string w;
  // The three inner brackets; their vanishing hypotheses cover all four
  // adjacent composites a.b, b.c, c.d, d.e.
  auto i1 = checked(ctx, a, b, c, 0, &w);
  if (!i1) return fail(fmt::format("inner bracket 1: {}", w));
  auto i2 = checked(ctx, b, c, d, 0, &w);
  if (!i2) return fail(fmt::format("inner bracket 2: {}", w));
  auto i3 = checked(ctx, c, d, e, 0, &w);
  if (!i3) return fail(fmt::format("inner bracket 3: {}", w));
  JacobiOut out;
  out.t1 = mk_brk(brk_expr(*i1), mk_susp(1, d), mk_susp(1, e), 0);
  out.t2 = mk_brk(a, brk_expr(*i2), mk_susp(1, e), 0);
  out.t3 = mk_brk(a, b, brk_expr(*i3), 0);
  DegRes dr = deg_of(*ctx.cat, mk_sum({out.t1, out.t2, out.t3}));
  if (!dr.ok()) return fail(dr.err);
  out.note =
      fmt::format("all four adjacent composites vanish; the sum sits in pi({}, {})",
                  dr.d.dom.n, show_space(dr.d.cod));
  return out;
}

}  // namespace stem31
