#include "stem31/resolve.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <algorithm>
#include <numeric>

namespace stem31 {

std::string show_tri(Tri t) {
  switch (t) {
    case Tri::Yes: return "yes";
    case Tri::No: return "no";
    default: return "unknown";
  }
}

Tri tri_both(Tri a, Tri b) { return a == b ? a : Tri::Unknown; }

namespace {

const CongEnv kNoCong;

const CongEnv& env_of(const RwCtx& ctx) { return ctx.cong ? *ctx.cong : kNoCong; }

void set_why(std::string* why, std::string msg) {
  if (why && why->empty()) *why = std::move(msg);
}

// Verdict over all candidates: unanimous or Unknown.
Tri combine(const std::vector<Tri>& vs) {
  if (vs.empty()) return Tri::Unknown;
  Tri t = vs[0];
  for (Tri v : vs) t = tri_both(t, v);
  return t;
}

i64 pmod(i64 x, i64 m) { return ((x % m) + m) % m; }

// All integers a constant-but-decorated coefficient can stand for; nullopt
// once a free unknown or an odd unit of unknown magnitude is involved.
std::optional<std::set<i64>> exact_values(const Coeff& c) {
  if (!c.lin.empty()) return std::nullopt;
  if (!c.odd.empty() && c.n != 0) return std::nullopt;
  std::set<i64> s{c.n};
  if (c.pm) s.insert(-c.n);
  return s;
}

std::string pi_name(const GroupView& v) {
  return fmt::format("pi({}, {})", v.k, show_space(v.space));
}

/**** presentation setup ****/

struct GenNF {
  NF nf;
  bool zero = false;
  std::optional<std::string> key;  // single coefficient-free chain only
};

std::optional<GenNF> gen_nf(const RwCtx& ctx, const EP& g, std::string* why) {
  GenNF r;
  r.nf = normalize(ctx, g);
  if (r.nf.error) {
    set_why(why, fmt::format("generator {}: {}", show_expr(g), *r.nf.error));
    return std::nullopt;
  }
  r.zero = r.nf.is_zero();
  if (!r.zero && !r.nf.depth_hit && r.nf.terms.size() == 1 &&
      r.nf.terms[0].c.is_one() && !r.nf.terms[0].fs.empty())
    r.key = chain_key(r.nf.terms[0]);
  return r;
}

// What one summand contributes to one candidate presentation.
struct SlotPlan {
  std::vector<i64> ords;
  struct GE {
    std::string key;
    int off;  // slot offset within the summand, -1 maps to zero
    i64 mult;
  };
  std::vector<GE> ges;
  std::string tag;
};

// First order fact whose subject rewrites to the same normal form.
std::optional<std::pair<i64, bool>> fact_order(const RwCtx& ctx, const GenNF& g) {
  std::optional<std::pair<i64, bool>> div;
  for (const Fact* f : ctx.ord_facts) {
    NF a = normalize(ctx, f->st.a);
    if (a.error || show_terms(a.terms) != show_terms(g.nf.terms)) continue;
    if (f->st.k == FactStmt::K::OrderEq) return std::make_pair(f->st.m, true);
    if (!div) div = std::make_pair(f->st.m, false);
  }
  return div;
}

}  // namespace

std::optional<GroupView> group_view(const RwCtx& ctx, Space sp, int k, std::string* why) {
  if (!ctx.cat) {
    set_why(why, "no catalog loaded");
    return std::nullopt;
  }
  const GroupRec* rec = ctx.cat->group(sp, k);
  if (!rec) {
    set_why(why, fmt::format("no presentation recorded for pi({}, {})", k, show_space(sp)));
    return std::nullopt;
  }
  GroupView v;
  v.rec = rec;
  v.space = sp;
  v.k = k;
  v.partial = rec->partial;

  // Per summand: the candidate slot layouts (two of them while a marker is
  // unresolved) and the display state.
  std::vector<std::vector<SlotPlan>> plans;
  int unresolved = 0;
  for (const Summand& s : rec->summands) {
    SummandView sv;
    sv.s = &s;
    auto ga = gen_nf(ctx, s.gen, why);
    if (!ga) return std::nullopt;
    switch (s.k) {
      case Summand::K::Num: {
        if (ga->zero) {
          set_why(why, fmt::format("generator {} of pi({}, {}) rewrites to 0",
                                   show_expr(s.gen), k, show_space(sp)));
          return std::nullopt;
        }
        SlotPlan p;
        p.ords = {s.order};
        if (ga->key) p.ges.push_back({*ga->key, 0, 1});
        plans.push_back({std::move(p)});
        sv.k = SummandView::K::Num;
        sv.order = s.order;
        break;
      }
      case Summand::K::G1: {
        if (ga->zero) {
          plans.push_back({SlotPlan{{}, {}, "G=0"}});
          sv.k = SummandView::K::Dropped;
          sv.order = 1;
          break;
        }
        auto of = fact_order(ctx, *ga);
        SlotPlan trivial{{}, {}, "G=0"};
        if (ga->key) trivial.ges.push_back({*ga->key, -1, 0});
        SlotPlan z2{{2}, {}, "G=Z2"};
        if (ga->key) z2.ges.push_back({*ga->key, 0, 1});
        if (of && of->second && of->first == 1) {
          plans.push_back({std::move(trivial)});
          sv.k = SummandView::K::Dropped;
          sv.order = 1;
        } else if (of && of->second && of->first == 2) {
          plans.push_back({std::move(z2)});
          sv.k = SummandView::K::Num;
          sv.order = 2;
        } else {
          plans.push_back({std::move(trivial), std::move(z2)});
          sv.k = SummandView::K::G1;
          sv.order = 2;
          ++unresolved;
        }
        break;
      }
      case Summand::K::G2: {
        auto gb = gen_nf(ctx, s.gen2, why);
        if (!gb) return std::nullopt;
        NF twice = normalize(ctx, mk_scal(coeff_int(2), s.gen));
        bool twice_is_b = !twice.error && !gb->zero &&
                          show_terms(twice.terms) == show_terms(gb->nf.terms);
        bool twice_zero = !twice.error && twice.terms.empty();

        SlotPlan z4{{4}, {}, "G2=Z4"};
        if (ga->key) z4.ges.push_back({*ga->key, 0, 1});
        if (gb->key) z4.ges.push_back({*gb->key, 0, 2});
        SlotPlan z22{{}, {}, "G2=Z2+Z2"};
        if (!ga->zero) {
          if (ga->key) z22.ges.push_back({*ga->key, (int)z22.ords.size(), 1});
          z22.ords.push_back(2);
        }
        if (!gb->zero) {
          if (gb->key) z22.ges.push_back({*gb->key, (int)z22.ords.size(), 1});
          z22.ords.push_back(2);
        }

        auto of = fact_order(ctx, *ga);
        if (twice_is_b || (of && of->second && of->first == 4)) {
          plans.push_back({std::move(z4)});
          sv.k = SummandView::K::Z4Pair;
          sv.order = 4;
        } else if (twice_zero || ga->zero || gb->zero || (of && of->first == 2)) {
          plans.push_back({std::move(z22)});
          sv.k = SummandView::K::Z2Pair;
          sv.order = 2;
        } else {
          plans.push_back({std::move(z22), std::move(z4)});
          sv.k = SummandView::K::G2;
          sv.order = 4;
          ++unresolved;
        }
        break;
      }
    }
    v.svs.push_back(sv);
  }

  if (unresolved > 2) {
    set_why(why, fmt::format("{} unresolved marker summands in pi({}, {})", unresolved,
                             k, show_space(sp)));
    return std::nullopt;
  }

  // Cartesian product of the per-summand choices.
  std::vector<std::vector<const SlotPlan*>> combos{{}};
  for (const auto& ps : plans) {
    std::vector<std::vector<const SlotPlan*>> next;
    for (const auto& c : combos)
      for (const auto& p : ps) {
        auto c2 = c;
        c2.push_back(&p);
        next.push_back(std::move(c2));
      }
    combos = std::move(next);
  }

  for (const auto& combo : combos) {
    Pres pres;
    std::vector<std::tuple<std::string, int, i64>> entries;  // key, slot, mult
    std::vector<std::string> tags;
    for (const SlotPlan* p : combo) {
      int base = (int)pres.ab.orders.size();
      for (i64 o : p->ords) pres.ab.orders.push_back(o);
      for (const auto& ge : p->ges)
        entries.emplace_back(ge.key, ge.off < 0 ? -1 : base + ge.off, ge.mult);
      if (!p->tag.empty()) tags.push_back(p->tag);
    }
    int rank = pres.ab.rank();
    for (const auto& [key, slot, mult] : entries) {
      Vec w(rank, 0);
      if (slot >= 0) w[slot] = mult;
      auto [it, fresh] = pres.gmap.emplace(key, w);
      if (!fresh) {
        set_why(why, fmt::format("generators of pi({}, {}) collide on chain {}", k,
                                 show_space(sp), key));
        return std::nullopt;
      }
    }
    pres.tag = fmt::format("{}", fmt::join(tags, ", "));
    v.cands.push_back(std::move(pres));
  }
  return v;
}

/**** element resolution ****/

std::optional<std::vector<Vec>> resolve_terms(const RwCtx& ctx, const Pres& p,
                                              const std::vector<Term>& ts,
                                              std::string* why) {
  const CongEnv& env = env_of(ctx);
  int rank = p.ab.rank();
  std::vector<std::set<i64>> slot(rank);
  for (auto& s : slot) s = {0};

  for (const Term& t : ts) {
    std::string key = chain_key(t);
    auto it = p.gmap.find(key);
    if (it == p.gmap.end()) {
      set_why(why, fmt::format("chain {} matches no listed generator", key));
      return std::nullopt;
    }
    const Vec& g = it->second;
    for (int s = 0; s < rank; ++s) {
      if (g[s] == 0) continue;
      i64 ord = p.ab.orders[s];
      std::set<i64> vals;
      if (ord > 0) {
        auto rs = coeff_residues(t.c, ord, env);
        if (!rs) {
          set_why(why, fmt::format("coefficient {} of {} keeps a free unknown",
                                   coeff_show(t.c), key));
          return std::nullopt;
        }
        for (i64 r : *rs) vals.insert(pmod(r * g[s], ord));
      } else {
        auto ev = exact_values(t.c);
        if (!ev) {
          set_why(why, fmt::format("coefficient {} of {} is ambiguous on an infinite summand",
                                   coeff_show(t.c), key));
          return std::nullopt;
        }
        for (i64 x : *ev) vals.insert(x * g[s]);
      }
      std::set<i64> ns;
      for (i64 a : slot[s])
        for (i64 b : vals) {
          i64 x = a + b;
          if (ord > 0) x = pmod(x, ord);
          ns.insert(x);
          if (ns.size() > 64) {
            set_why(why, "coefficient ambiguity set too large");
            return std::nullopt;
          }
        }
      slot[s] = std::move(ns);
    }
  }

  std::vector<Vec> out{Vec(rank, 0)};
  for (int s = 0; s < rank; ++s) {
    if (slot[s].size() == 1 && *slot[s].begin() == 0) continue;
    std::vector<Vec> next;
    for (const Vec& w : out)
      for (i64 x : slot[s]) {
        Vec w2 = w;
        w2[s] = x;
        next.push_back(std::move(w2));
        if (next.size() > 256) {
          set_why(why, "value set too large");
          return std::nullopt;
        }
      }
    out = std::move(next);
  }
  for (auto& w : out) w = p.ab.reduce(w);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::optional<Resolved> resolve_nf(const RwCtx& ctx, const GroupView& v, const NF& nf,
                                   std::string* why) {
  if (nf.error) {
    set_why(why, *nf.error);
    return std::nullopt;
  }
  if (nf.depth_hit) {
    set_why(why, "normal form hit the depth bound");
    return std::nullopt;
  }
  if (!nf.terms.empty() && ctx.cat) {
    DegRes d = deg_of(*ctx.cat, terms_to_expr(nf.terms));
    if (d.k == DegRes::K::Err) {
      set_why(why, d.err);
      return std::nullopt;
    }
    if (d.k == DegRes::K::Ok && !(d.d == pi_deg(v.k, v.space))) {
      set_why(why, fmt::format("degree {} does not sit in {}", show_deg(d.d), pi_name(v)));
      return std::nullopt;
    }
  }
  Resolved r;
  for (const Pres& p : v.cands) {
    auto s = resolve_terms(ctx, p, nf.terms, why);
    if (!s) return std::nullopt;
    r.sets.push_back(std::move(*s));
  }
  return r;
}

i64 elem_order(const AbGroup& G, const Vec& v0) {
  Vec v = G.reduce(v0);
  i64 l = 1;
  for (int i = 0; i < G.rank(); ++i) {
    i64 ord = G.orders[i];
    if (ord == 0) {
      if (v[i] != 0) return 0;
      continue;
    }
    if (v[i] == 0) continue;
    l = std::lcm(l, ord / std::gcd(v[i], ord));
  }
  return l;
}

/**** claims ****/

namespace {

// Settling a claim only on the candidates that happen to resolve would be
// unsound, so one failed candidate poisons the whole verdict.
std::optional<std::vector<std::vector<Vec>>> all_sets(const RwCtx& ctx, const GroupView& v,
                                                      const NF& nf, std::string* why) {
  auto r = resolve_nf(ctx, v, nf, why);
  if (!r) return std::nullopt;
  return std::move(r->sets);
}

bool subset_of(const std::vector<Vec>& a, const std::vector<Vec>& b) {
  for (const Vec& x : a)
    if (!std::binary_search(b.begin(), b.end(), x)) return false;
  return true;
}

bool intersects(const std::vector<Vec>& a, const std::vector<Vec>& b) {
  for (const Vec& x : a)
    if (std::binary_search(b.begin(), b.end(), x)) return true;
  return false;
}

// A claimed side reusing one unknown across terms would be overcounted by
// the independent slot-wise expansion, so such claims are refused.
bool shares_unknowns(const std::vector<Term>& ts) {
  std::map<std::string, int> seen;
  for (const Term& t : ts) {
    std::set<std::string> syms;
    for (const auto& [s, c] : t.c.lin)
      if (c != 0) syms.insert(s);
    for (const auto& s : t.c.odd) syms.insert(s);
    for (const auto& s : syms)
      if (++seen[s] > 1) return true;
  }
  return false;
}

}  // namespace

Tri zero_in_group(const RwCtx& ctx, const GroupView& v, const NF& nf, std::string* why) {
  auto sets = all_sets(ctx, v, nf, why);
  if (!sets) return Tri::Unknown;
  std::vector<Tri> vs;
  for (size_t i = 0; i < sets->size(); ++i) {
    const auto& s = (*sets)[i];
    bool any = false, all = true;
    for (const Vec& w : s) {
      bool z = v.cands[i].ab.is_zero(w);
      any |= z;
      all &= z;
    }
    vs.push_back(all ? Tri::Yes : any ? Tri::Unknown : Tri::No);
  }
  Tri t = combine(vs);
  if (t == Tri::No && why) set_why(why, fmt::format("nonzero in {}", pi_name(v)));
  return t;
}

Tri eq_in_group(const RwCtx& ctx, const GroupView& v, const NF& derived,
                const NF& claimed, std::string* why) {
  if (claimed.error || claimed.depth_hit) {
    set_why(why, "claimed side did not normalize");
    return Tri::Unknown;
  }
  if (shares_unknowns(claimed.terms)) {
    set_why(why, "claimed side reuses an unknown across terms");
    return Tri::Unknown;
  }
  auto ds = all_sets(ctx, v, derived, why);
  if (!ds) return Tri::Unknown;
  auto cs = all_sets(ctx, v, claimed, why);
  if (!cs) return Tri::Unknown;
  std::vector<Tri> vs;
  for (size_t i = 0; i < ds->size(); ++i) {
    const auto& d = (*ds)[i];
    const auto& c = (*cs)[i];
    if (!d.empty() && subset_of(d, c))
      vs.push_back(Tri::Yes);
    else if (!intersects(d, c))
      vs.push_back(Tri::No);
    else
      vs.push_back(Tri::Unknown);
  }
  Tri t = combine(vs);
  if (t == Tri::No && why) set_why(why, fmt::format("sides differ in {}", pi_name(v)));
  return t;
}

std::optional<Subgroup> span_in(const RwCtx& ctx, const Pres& p,
                                const std::vector<EP>& gens, std::string* why) {
  std::vector<Vec> vecs;
  for (const EP& g : gens) {
    NF n = normalize(ctx, g);
    if (n.error) {
      set_why(why, fmt::format("span generator {}: {}", show_expr(g), *n.error));
      return std::nullopt;
    }
    if (n.depth_hit) {
      set_why(why, fmt::format("span generator {} hit the depth bound", show_expr(g)));
      return std::nullopt;
    }
    if (n.is_zero()) continue;
    Vec w(p.ab.rank(), 0);
    bool single = n.terms.size() == 1;
    for (const Term& t : n.terms) {
      auto it = p.gmap.find(chain_key(t));
      if (it == p.gmap.end()) {
        set_why(why, fmt::format("span generator chain {} matches no listed generator",
                                 chain_key(t)));
        return std::nullopt;
      }
      const Vec& gv = it->second;
      Coeff c = t.c;
      if (c.pm) {
        // a global sign never changes a span, but a per-term sign in a sum
        // does not pin the generated subgroup
        if (!single) {
          set_why(why, fmt::format("span generator {} keeps an unresolved sign", show_expr(g)));
          return std::nullopt;
        }
        c.pm = false;
      }
      if (!c.odd.empty()) {
        // odd units are invertible on every finite 2-power slot
        bool finite = true;
        for (int s = 0; s < p.ab.rank(); ++s)
          if (gv[s] != 0 && p.ab.orders[s] == 0) finite = false;
        if (!single || !finite) {
          set_why(why, fmt::format("span generator {} keeps an odd unit", show_expr(g)));
          return std::nullopt;
        }
        c.odd.clear();
      }
      auto val = coeff_value(c);
      if (!val) {
        set_why(why, fmt::format("span generator {} keeps coefficient {}", show_expr(g),
                                 coeff_show(t.c)));
        return std::nullopt;
      }
      for (int s = 0; s < p.ab.rank(); ++s) w[s] += *val * gv[s];
    }
    vecs.push_back(p.ab.reduce(w));
  }
  return sub_span(p.ab, vecs);
}

Tri mem_span_in_group(const RwCtx& ctx, const GroupView& v, const NF& elem,
                      const std::vector<EP>& span_gens, bool complete, std::string* why) {
  auto es = all_sets(ctx, v, elem, why);
  if (!es) return Tri::Unknown;
  std::vector<Tri> vs;
  for (size_t i = 0; i < es->size(); ++i) {
    auto h = span_in(ctx, v.cands[i], span_gens, why);
    if (!h) return Tri::Unknown;
    bool any = false, all = true;
    for (const Vec& w : (*es)[i]) {
      bool in = sub_contains(*h, w);
      any |= in;
      all &= in;
    }
    vs.push_back(all ? Tri::Yes : any ? Tri::Unknown : Tri::No);
  }
  Tri t = combine(vs);
  if (t == Tri::No && !complete) return Tri::Unknown;
  if (t == Tri::No && why) set_why(why, "element lies outside the span");
  return t;
}

Tri coseteq_in_group(const RwCtx& ctx, const GroupView& v, const NF& derived,
                     const NF& claimed, const std::vector<EP>& mod_gens, bool complete,
                     std::string* why) {
  if (claimed.error || claimed.depth_hit) {
    set_why(why, "claimed side did not normalize");
    return Tri::Unknown;
  }
  if (shares_unknowns(claimed.terms)) {
    set_why(why, "claimed side reuses an unknown across terms");
    return Tri::Unknown;
  }
  auto ds = all_sets(ctx, v, derived, why);
  if (!ds) return Tri::Unknown;
  auto cs = all_sets(ctx, v, claimed, why);
  if (!cs) return Tri::Unknown;
  std::vector<Tri> vs;
  for (size_t i = 0; i < ds->size(); ++i) {
    auto h = span_in(ctx, v.cands[i], mod_gens, why);
    if (!h) return Tri::Unknown;
    const AbGroup& ab = v.cands[i].ab;
    bool all = true, none = true;
    for (const Vec& d : (*ds)[i]) {
      bool hit = false;
      for (const Vec& c : (*cs)[i])
        if (sub_contains(*h, vadd(ab, d, vneg(ab, c)))) {
          hit = true;
          break;
        }
      all &= hit;
      none &= !hit;
    }
    vs.push_back((*ds)[i].empty() ? Tri::Unknown : all ? Tri::Yes : none ? Tri::No : Tri::Unknown);
  }
  Tri t = combine(vs);
  if (t == Tri::No && !complete) return Tri::Unknown;
  if (t == Tri::No && why) set_why(why, "sides differ modulo the span");
  return t;
}

Tri order_eq_in_group(const RwCtx& ctx, const GroupView& v, const NF& nf, i64 m,
                      std::string* why) {
  auto sets = all_sets(ctx, v, nf, why);
  if (!sets) return Tri::Unknown;
  std::vector<Tri> vs;
  for (size_t i = 0; i < sets->size(); ++i) {
    bool any = false, all = true;
    for (const Vec& w : (*sets)[i]) {
      bool eq = elem_order(v.cands[i].ab, w) == m;
      any |= eq;
      all &= eq;
    }
    vs.push_back(all ? Tri::Yes : any ? Tri::Unknown : Tri::No);
  }
  Tri t = combine(vs);
  if (t == Tri::No && why) set_why(why, fmt::format("order differs from {}", m));
  return t;
}

Tri order_div_in_group(const RwCtx& ctx, const GroupView& v, const NF& nf, i64 m,
                       std::string* why) {
  if (m <= 0) return Tri::Unknown;
  auto sets = all_sets(ctx, v, nf, why);
  if (!sets) return Tri::Unknown;
  std::vector<Tri> vs;
  for (size_t i = 0; i < sets->size(); ++i) {
    const AbGroup& ab = v.cands[i].ab;
    bool any = false, all = true;
    for (const Vec& w : (*sets)[i]) {
      bool d = ab.is_zero(vscale(ab, m, w));
      any |= d;
      all &= d;
    }
    vs.push_back(all ? Tri::Yes : any ? Tri::Unknown : Tri::No);
  }
  Tri t = combine(vs);
  if (t == Tri::No && why) set_why(why, fmt::format("order does not divide {}", m));
  return t;
}

std::optional<std::vector<EP>> span_gens_of(const RwCtx& ctx, const EP& e, bool* complete,
                                            std::string* why) {
  if (complete) *complete = true;
  if (e->k == Expr::K::Span) return e->sub;
  if (e->k == Expr::K::Zero) return std::vector<EP>{};
  if (e->k == Expr::K::PiSet) {
    if (!ctx.cat) {
      set_why(why, "no catalog loaded");
      return std::nullopt;
    }
    const GroupRec* rec = ctx.cat->group(e->sp, e->n);
    if (!rec) {
      set_why(why, fmt::format("no presentation recorded for pi({}, {})", e->n,
                               show_space(e->sp)));
      return std::nullopt;
    }
    if (rec->partial && complete) *complete = false;
    std::vector<EP> gens;
    for (const Summand& s : rec->summands) {
      gens.push_back(s.gen);
      if (s.k == Summand::K::G2) gens.push_back(s.gen2);
    }
    return gens;
  }
  if (e->k == Expr::K::Scal) {
    auto inner = span_gens_of(ctx, e->sub[0], complete, why);
    if (!inner) return std::nullopt;
    std::vector<EP> gens;
    for (const EP& g : *inner) gens.push_back(mk_scal(e->c, g));
    return gens;
  }
  if (is_setvalued(e)) {
    set_why(why, fmt::format("{} is not a span the resolver can enumerate", show_expr(e)));
    return std::nullopt;
  }
  return std::vector<EP>{e};
}

}  // namespace stem31
