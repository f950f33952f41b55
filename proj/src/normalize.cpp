#include "stem31/normalize.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cstdlib>
#include <map>
#include <set>

#include "stem31/kb.hpp"

namespace stem31 {

/**** working-form conversions ****/

EP factor_to_expr(const Factor& f) {
  switch (f.k) {
    case Factor::K::Cls: return mk_cls(f.name, f.inst);
    case Factor::K::Iota: return mk_iota(f.n);
    case Factor::K::Susp: return mk_susp(f.n, f.args[0]);
    case Factor::K::Hopf: return mk_hopf(f.args[0]);
    case Factor::K::PMap: return mk_pmap(f.args[0]);
    case Factor::K::Wh: return mk_wh(f.args[0], f.args[1]);
    case Factor::K::Brk: return mk_brk(f.args[0], f.args[1], f.args[2], f.n);
    case Factor::K::Pi: return mk_piset(f.n, f.sp);
    case Factor::K::Span: return mk_span(f.args);
    case Factor::K::Paren: return terms_to_expr(f.inner);
  }
  return mk_zero();
}

EP term_to_expr(const Term& t) {
  if (t.fs.empty()) return mk_zero();
  std::vector<EP> fs;
  for (const auto& f : t.fs) fs.push_back(factor_to_expr(f));
  return mk_scal(t.c, mk_comp(std::move(fs)));
}

EP terms_to_expr(const std::vector<Term>& ts) {
  std::vector<EP> es;
  for (const auto& t : ts) es.push_back(term_to_expr(t));
  return mk_sum(std::move(es));
}

std::string show_term(const Term& t) { return show_expr(term_to_expr(t)); }
std::string show_terms(const std::vector<Term>& ts) { return show_expr(terms_to_expr(ts)); }

namespace {

const std::vector<CompiledRule> kNoRules;
const CongEnv kNoCong;

RwCtx bare_ctx(const RwCtx& c) {
  RwCtx b;
  b.cat = c.cat;
  b.rules = &kNoRules;
  b.depth = c.depth;
  return b;
}

const CongEnv& env_of(const RwCtx& c) { return c.cong ? *c.cong : kNoCong; }

Factor fac_cls(std::string n, int i) {
  Factor f;
  f.name = std::move(n);
  f.inst = i;
  return f;
}
Factor fac_iota(int n) {
  Factor f;
  f.k = Factor::K::Iota;
  f.n = n;
  return f;
}
Factor fac_susp(int t, EP e) {
  Factor f;
  f.k = Factor::K::Susp;
  f.n = t;
  f.args = {std::move(e)};
  return f;
}
Factor fac_arg(Factor::K k, std::vector<EP> args, int n = 0) {
  Factor f;
  f.k = k;
  f.args = std::move(args);
  f.n = n;
  return f;
}
Factor fac_pi(int k, Space sp) {
  Factor f;
  f.k = Factor::K::Pi;
  f.n = k;
  f.sp = sp;
  return f;
}
Factor fac_paren(std::vector<Term> inner) {
  Factor f;
  f.k = Factor::K::Paren;
  f.inner = std::move(inner);
  return f;
}

}  // namespace

std::string factor_key(const Factor& f) { return show_expr(factor_to_expr(f)); }

std::string chain_key(const Term& t) {
  std::string s;
  for (size_t i = 0; i < t.fs.size(); ++i) {
    if (i) s += '.';
    s += factor_key(t.fs[i]);
  }
  return s;
}

std::optional<std::string> find_bare(const EP& e) {
  if (e->k == Expr::K::Cls && e->inst == kBareInst) return e->name;
  for (const auto& s : e->sub)
    if (auto b = find_bare(s)) return b;
  return std::nullopt;
}

namespace {

std::optional<Coeff> div_exact(const Coeff& c, i64 m) {
  if (m == 0) return std::nullopt;
  Coeff r = c;
  if (r.n % m) return std::nullopt;
  r.n /= m;
  for (auto& [s, v] : r.lin) {
    if (v % m) return std::nullopt;
    v /= m;
  }
  return r;
}

bool term_certified(const RwCtx& ctx, const Term& t);

}  // namespace

/**** suspension certificates ****/

bool factor_certified(const RwCtx& ctx, const Factor& f) {
  switch (f.k) {
    case Factor::K::Iota: return f.n >= 1;
    case Factor::K::Susp: return true;
    case Factor::K::Cls:
      if (f.inst != kBareInst && suspends_to(*ctx.cat, f.name, f.inst - 1, f.inst)) return true;
      break;
    case Factor::K::Paren: {
      bool all = !f.inner.empty();
      for (const auto& t : f.inner) all = all && term_certified(ctx, t);
      if (all) return true;
      break;
    }
    default: break;
  }
  EP fe = factor_to_expr(f);
  for (const Fact* k : ctx.susp_facts) {
    auto x = as_susp_cert(k->st);
    if (x && expr_eq(*x, fe)) return true;
  }
  if (f.k == Factor::K::Pi) {
    // epi E pi(k', X') = pi(k, X) means the whole group is suspended.
    for (const Fact* k : ctx.epi_facts) {
      const FactStmt& st = k->st;
      if (st.map.k == MapRef::K::E && st.b && st.b->k == Expr::K::PiSet &&
          st.b->n == f.n && st.b->sp == f.sp)
        return true;
    }
  }
  return false;
}

namespace {

bool term_certified(const RwCtx& ctx, const Term& t) {
  for (const auto& f : t.fs)
    if (!factor_certified(ctx, f)) return false;
  return true;
}

bool factors_certified(const RwCtx& ctx, const std::vector<Factor>& fs, size_t from) {
  for (size_t i = from; i < fs.size(); ++i)
    if (!factor_certified(ctx, fs[i])) return false;
  return true;
}

}  // namespace

bool susp_certified(const RwCtx& ctx, const EP& e) {
  std::string err;
  auto ts = flatten_expr(ctx, e, err);
  if (!err.empty()) return false;
  if (ts.empty()) return true;  // zero suspends from zero
  bool all = true;
  for (const auto& t : ts) all = all && term_certified(ctx, t);
  if (all) return true;
  std::string key = show_terms(ts);
  for (const Fact* k : ctx.susp_facts) {
    auto x = as_susp_cert(k->st);
    if (!x) continue;
    std::string e2;
    auto xs = flatten_expr(ctx, *x, e2);
    if (e2.empty() && show_terms(xs) == key) return true;
  }
  return false;
}

/**** flattening ****/

std::vector<Term> suspend_terms(const RwCtx& ctx, std::vector<Term> ts, int t) {
  if (t == 0) return ts;
  std::vector<Term> out;
  for (auto& tm : ts) {
    bool dead = false;
    std::vector<Factor> fs;
    for (auto& f : tm.fs) {
      switch (f.k) {
        case Factor::K::Cls:
          if (f.inst != kBareInst && suspends_to(*ctx.cat, f.name, f.inst, f.inst + t))
            fs.push_back(fac_cls(f.name, f.inst + t));
          else
            fs.push_back(fac_susp(t, factor_to_expr(f)));
          break;
        case Factor::K::Iota:
          fs.push_back(fac_iota(f.n + t));
          break;
        case Factor::K::Susp:
          fs.push_back(fac_susp(f.n + t, f.args[0]));
          break;
        case Factor::K::Wh:
        case Factor::K::PMap:
          // E kills Whitehead products and the image of P.
          dead = true;
          break;
        case Factor::K::Span: {
          std::vector<EP> gs;
          for (const auto& g : f.args) gs.push_back(mk_susp(t, g));
          fs.push_back(fac_arg(Factor::K::Span, std::move(gs)));
          break;
        }
        case Factor::K::Paren: {
          Factor p = fac_paren(suspend_terms(ctx, f.inner, t));
          fs.push_back(std::move(p));
          break;
        }
        default:
          fs.push_back(fac_susp(t, factor_to_expr(f)));
          break;
      }
      if (dead) break;
    }
    if (!dead) out.push_back(Term{tm.c, std::move(fs)});
  }
  return out;
}

std::vector<Term> flatten_expr(const RwCtx& ctx, const EP& e, std::string& err) {
  auto sub_nf = [&](const EP& x) -> std::optional<NF> {
    NF n = normalize(bare_ctx(ctx), x);
    if (n.error) {
      err = *n.error;
      return std::nullopt;
    }
    return n;
  };
  switch (e->k) {
    case Expr::K::Zero:
      return {};
    case Expr::K::Iota:
      return {Term{coeff_int(1), {fac_iota(e->n)}}};
    case Expr::K::Cls:
      return {Term{coeff_int(1), {fac_cls(e->name, e->inst)}}};
    case Expr::K::Susp: {
      auto ts = flatten_expr(ctx, e->sub[0], err);
      if (!err.empty()) return {};
      return suspend_terms(ctx, ts, e->n);
    }
    case Expr::K::Hopf:
    case Expr::K::PMap: {
      // Both are homomorphisms: pull scalars and split sums, so the stored
      // argument is always a bare factor chain.
      auto an = sub_nf(e->sub[0]);
      if (!an) return {};
      std::vector<Term> out;
      for (const auto& t : an->terms) {
        EP chain = term_to_expr(Term{coeff_int(1), t.fs});
        auto k = e->k == Expr::K::Hopf ? Factor::K::Hopf : Factor::K::PMap;
        out.push_back(Term{t.c, {fac_arg(k, {chain})}});
      }
      return out;
    }
    case Expr::K::Wh: {
      auto na = sub_nf(e->sub[0]);
      if (!na) return {};
      auto nb = sub_nf(e->sub[1]);
      if (!nb) return {};
      if (na->terms.empty() || nb->terms.empty()) return {};
      // Whitehead products are bilinear.
      std::vector<Term> out;
      bool ok = true;
      for (const auto& ta : na->terms)
        for (const auto& tb : nb->terms) {
          auto q = coeff_mul(ta.c, tb.c);
          if (!q) {
            ok = false;
            break;
          }
          EP ca = term_to_expr(Term{coeff_int(1), ta.fs});
          EP cb = term_to_expr(Term{coeff_int(1), tb.fs});
          out.push_back(Term{*q, {fac_arg(Factor::K::Wh, {ca, cb})}});
        }
      if (ok) return out;
      EP ca = terms_to_expr(na->terms);
      EP cb = terms_to_expr(nb->terms);
      return {Term{coeff_int(1), {fac_arg(Factor::K::Wh, {ca, cb})}}};
    }
    case Expr::K::Brk: {
      std::vector<EP> args;
      for (const auto& s : e->sub) {
        auto n = sub_nf(s);
        if (!n) return {};
        args.push_back(terms_to_expr(n->terms));
      }
      return {Term{coeff_int(1), {fac_arg(Factor::K::Brk, std::move(args), e->n)}}};
    }
    case Expr::K::PiSet:
      return {Term{coeff_int(1), {fac_pi(e->n, e->sp)}}};
    case Expr::K::Span: {
      std::vector<EP> gs;
      for (const auto& s : e->sub) {
        auto n = sub_nf(s);
        if (!n) return {};
        if (n->terms.empty()) continue;
        gs.push_back(terms_to_expr(n->terms));
      }
      return {Term{coeff_int(1), {fac_arg(Factor::K::Span, std::move(gs))}}};
    }
    case Expr::K::Sum: {
      std::vector<Term> out;
      for (const auto& s : e->sub) {
        auto ts = flatten_expr(ctx, s, err);
        if (!err.empty()) return {};
        for (auto& t : ts) out.push_back(std::move(t));
      }
      return out;
    }
    case Expr::K::Scal: {
      auto ts = flatten_expr(ctx, e->sub[0], err);
      if (!err.empty()) return {};
      std::vector<Term> out;
      for (auto& t : ts) {
        auto q = coeff_mul(e->c, t.c);
        if (q)
          out.push_back(Term{*q, std::move(t.fs)});
        else
          out.push_back(Term{e->c, {fac_paren({std::move(t)})}});
      }
      return out;
    }
    case Expr::K::Comp: {
      Term acc{coeff_int(1), {}};
      size_t last = e->sub.size() - 1;
      for (size_t i = 0; i < e->sub.size(); ++i) {
        auto ts = flatten_expr(ctx, e->sub[i], err);
        if (!err.empty()) return {};
        if (ts.empty()) return {};  // a zero factor kills the composite
        if (ts.size() == 1) {
          Term& u = ts[0];
          if (u.c.is_one()) {
            for (auto& f : u.fs) acc.fs.push_back(std::move(f));
            continue;
          }
          if (i == last) {
            // The innermost slot: scalars always pull out of it.
            auto q = coeff_mul(acc.c, u.c);
            if (q) {
              acc.c = *q;
              for (auto& f : u.fs) acc.fs.push_back(std::move(f));
              continue;
            }
          }
        }
        acc.fs.push_back(fac_paren(std::move(ts)));
      }
      return {std::move(acc)};
    }
  }
  err = "unhandled expression";
  return {};
}

/**** built-in cleanup passes ****/

namespace {

bool builtins(const RwCtx& ctx, std::vector<Term>& ts, std::vector<std::string>& tr);

// Unexpanded sub-sums: splice when pure reassociation, distribute when the
// suffix right of the slot is all suspensions (or the slot is innermost).
bool pass_parens(const RwCtx& ctx, std::vector<Term>& ts) {
  for (size_t ti = 0; ti < ts.size(); ++ti) {
    Term& t = ts[ti];
    size_t n = t.fs.size();
    for (size_t i = 0; i < n; ++i) {
      if (t.fs[i].k != Factor::K::Paren) continue;
      if (t.fs[i].inner.empty()) {  // zero factor
        ts.erase(ts.begin() + ti);
        return true;
      }
    }
    std::vector<bool> suffix_ok(n + 1, true);
    for (size_t i = n; i-- > 0;)
      suffix_ok[i] = suffix_ok[i + 1] && factor_certified(ctx, t.fs[i]);
    for (size_t i = 0; i < n; ++i) {
      Factor& f = t.fs[i];
      if (f.k != Factor::K::Paren) continue;
      bool unit = f.inner.size() == 1 && f.inner[0].c.is_one();
      bool may = i + 1 == n || suffix_ok[i + 1];
      if (unit) {
        std::vector<Factor> fs(t.fs.begin(), t.fs.begin() + i);
        for (auto& g : f.inner[0].fs) fs.push_back(std::move(g));
        fs.insert(fs.end(), t.fs.begin() + i + 1, t.fs.end());
        t.fs = std::move(fs);
        return true;
      }
      if (!may) continue;
      if (f.inner.size() == 1) {
        auto q = coeff_mul(t.c, f.inner[0].c);
        if (!q) continue;
        std::vector<Factor> fs(t.fs.begin(), t.fs.begin() + i);
        for (auto& g : f.inner[0].fs) fs.push_back(std::move(g));
        fs.insert(fs.end(), t.fs.begin() + i + 1, t.fs.end());
        t.c = *q;
        t.fs = std::move(fs);
        return true;
      }
      std::vector<Term> repl;
      bool ok = true;
      for (const auto& u : f.inner) {
        auto q = coeff_mul(t.c, u.c);
        if (!q) {
          ok = false;
          break;
        }
        Term nt{*q, {}};
        nt.fs.assign(t.fs.begin(), t.fs.begin() + i);
        for (const auto& g : u.fs) nt.fs.push_back(g);
        nt.fs.insert(nt.fs.end(), t.fs.begin() + i + 1, t.fs.end());
        repl.push_back(std::move(nt));
      }
      if (!ok) continue;
      ts.erase(ts.begin() + ti);
      ts.insert(ts.begin() + ti, repl.begin(), repl.end());
      return true;
    }
  }
  return false;
}

bool pass_iota(std::vector<Term>& ts) {
  bool ch = false;
  for (auto& t : ts) {
    if (t.fs.size() < 2) continue;
    bool has_other = false;
    for (const auto& f : t.fs) has_other = has_other || f.k != Factor::K::Iota;
    if (has_other) {
      size_t before = t.fs.size();
      std::erase_if(t.fs, [](const Factor& f) { return f.k == Factor::K::Iota; });
      ch |= t.fs.size() != before;
    } else {
      t.fs.resize(1);
      ch = true;
    }
  }
  return ch;
}

bool pass_hopf(const RwCtx& ctx, std::vector<Term>& ts, std::vector<std::string>& tr) {
  for (size_t ti = 0; ti < ts.size(); ++ti) {
    Term& t = ts[ti];
    for (size_t i = 0; i < t.fs.size(); ++i) {
      Factor& f = t.fs[i];
      if (f.k != Factor::K::Hopf) continue;
      const EP& a = f.args[0];
      if (a->k == Expr::K::Zero || susp_certified(ctx, a)) {
        tr.push_back(fmt::format("H({}) = 0", show_expr(a)));
        ts.erase(ts.begin() + ti);
        return true;
      }
      if (a->k != Expr::K::Comp) continue;
      // H(x . E y) = H(x) . E y
      size_t m = a->sub.size(), j = m;
      while (j > 1 && susp_certified(ctx, a->sub[j - 1])) --j;
      if (j == m) continue;
      std::vector<EP> head(a->sub.begin(), a->sub.begin() + j);
      std::vector<Factor> peeled;
      bool ok = true;
      for (size_t p = j; p < m; ++p) {
        std::string err;
        auto fs2 = flatten_expr(ctx, a->sub[p], err);
        if (!err.empty() || fs2.size() != 1 || !fs2[0].c.is_one()) {
          ok = false;
          break;
        }
        for (auto& g : fs2[0].fs) peeled.push_back(std::move(g));
      }
      if (!ok) continue;
      Factor nh = fac_arg(Factor::K::Hopf, {mk_comp(std::move(head))});
      std::vector<Factor> fs(t.fs.begin(), t.fs.begin() + i);
      fs.push_back(std::move(nh));
      for (auto& g : peeled) fs.push_back(std::move(g));
      fs.insert(fs.end(), t.fs.begin() + i + 1, t.fs.end());
      t.fs = std::move(fs);
      return true;
    }
  }
  return false;
}

// P(x) . g = P(x . E^2 g): fold element-valued right neighbours into P.
bool pass_pmap(const RwCtx& ctx, std::vector<Term>& ts) {
  for (size_t ti = 0; ti < ts.size(); ++ti) {
    Term& t = ts[ti];
    for (size_t i = 0; i + 1 < t.fs.size(); ++i) {
      if (t.fs[i].k != Factor::K::PMap) continue;
      const Factor& g = t.fs[i + 1];
      if (g.k == Factor::K::Pi || g.k == Factor::K::Span) continue;
      EP ge = factor_to_expr(g);
      if (is_setvalued(ge)) continue;
      EP merged = mk_comp({t.fs[i].args[0], mk_susp(2, ge)});
      NF n = normalize(bare_ctx(ctx), merged);
      if (n.error) continue;
      std::vector<Term> repl;
      for (const auto& u : n.terms) {
        EP chain = term_to_expr(Term{coeff_int(1), u.fs});
        repl.push_back(Term{u.c, {fac_arg(Factor::K::PMap, {chain})}});
      }
      std::vector<Factor> fs(t.fs.begin(), t.fs.begin() + i);
      fs.push_back(fac_paren(std::move(repl)));
      fs.insert(fs.end(), t.fs.begin() + i + 2, t.fs.end());
      t.fs = std::move(fs);
      return true;
    }
  }
  return false;
}

DegRes tail_deg(const RwCtx& ctx, const std::vector<Factor>& fs, size_t from) {
  std::vector<EP> es;
  for (size_t i = from; i < fs.size(); ++i) es.push_back(factor_to_expr(fs[i]));
  return deg_of(*ctx.cat, mk_comp(std::move(es)));
}

bool pass_kill(const RwCtx& ctx, std::vector<Term>& ts, std::vector<std::string>& tr) {
  const CongEnv& env = env_of(ctx);
  for (size_t ti = 0; ti < ts.size(); ++ti) {
    Term& t = ts[ti];
    if (t.c.is_zero()) {
      ts.erase(ts.begin() + ti);
      return true;
    }
    size_t n = t.fs.size();
    // a . 0 = 0: order-one classes are zero maps.
    for (size_t i = 0; i < n; ++i) {
      if (t.fs[i].k != Factor::K::Cls) continue;
      auto ci = class_info(*ctx.cat, t.fs[i].name, t.fs[i].inst);
      if (ci && ci->order && *ci->order == 1) {
        tr.push_back(fmt::format("{} is trivial", factor_key(t.fs[i])));
        ts.erase(ts.begin() + ti);
        return true;
      }
    }
    // order of a factor annihilates the coefficient; for E^t(c) the order of
    // c is still a bound, since suspension is a homomorphism
    auto factor_order = [&](const Factor& f) -> std::optional<i64> {
      const Factor* c = &f;
      if (f.k == Factor::K::Susp && f.args[0]->k == Expr::K::Cls) {
        auto ci = class_info(*ctx.cat, f.args[0]->name, f.args[0]->inst);
        if (ci && ci->order && *ci->order > 0) return *ci->order;
        return std::nullopt;
      }
      if (c->k != Factor::K::Cls) return std::nullopt;
      auto ci = class_info(*ctx.cat, c->name, c->inst);
      if (ci && ci->order && *ci->order > 0) return *ci->order;
      return std::nullopt;
    };
    for (size_t i = 0; i < n; ++i) {
      auto ord = factor_order(t.fs[i]);
      if (!ord) continue;
      if (!coeff_divisible(t.c, *ord, env)) continue;
      if (!factors_certified(ctx, t.fs, i + 1)) continue;
      tr.push_back(fmt::format("{} {} = 0 (order divides {})", coeff_show(t.c),
                               factor_key(t.fs[i]), *ord));
      ts.erase(ts.begin() + ti);
      return true;
    }
    // exponent of the group the tail lands in
    for (size_t i = 0; i < n; ++i) {
      DegRes d = tail_deg(ctx, t.fs, i);
      if (d.k != DegRes::K::Ok) continue;
      for (const Fact* k : ctx.exp_facts) {
        const EP& a = k->st.a;
        if (!a || a->k != Expr::K::PiSet) continue;
        if (d.d.dom != sphere(a->n) || d.d.cod != a->sp) continue;
        if (!coeff_divisible(t.c, k->st.m, env)) continue;
        tr.push_back(fmt::format("{} kills the tail in pi({}, {})", k->id, a->n,
                                 show_space(a->sp)));
        ts.erase(ts.begin() + ti);
        return true;
      }
    }
    // alpha . pi(k, X) = 0 facts: a match needs a nonempty suffix landing in
    // exactly that group
    for (const Fact* k : ctx.ann_facts) {
      auto sh = as_ann(k->st);
      if (!sh) continue;
      std::string err;
      auto pts = flatten_expr(ctx, sh->prefix, err);
      if (!err.empty() || pts.size() != 1 || !pts[0].c.is_one()) continue;
      const auto& pf = pts[0].fs;
      if (pf.empty() || pf.size() >= n) continue;
      for (size_t i = 0; i + pf.size() < n; ++i) {
        size_t end = i + pf.size();
        bool m = true;
        for (size_t j = 0; j < pf.size() && m; ++j)
          m = factor_key(pf[j]) == factor_key(t.fs[i + j]);
        if (!m) continue;
        bool elem = true;
        for (size_t j = end; j < n && elem; ++j)
          elem = !is_setvalued(factor_to_expr(t.fs[j]));
        if (!elem) continue;
        DegRes d = tail_deg(ctx, t.fs, end);
        if (d.k != DegRes::K::Ok) continue;
        if (d.d.dom != sphere(sh->k) || d.d.cod != sh->sp) continue;
        tr.push_back(fmt::format("{} kills {}", k->id, chain_key(t)));
        ts.erase(ts.begin() + ti);
        return true;
      }
    }
  }
  return false;
}

void pass_merge(std::vector<Term>& ts) {
  std::vector<std::pair<std::string, Term>> keyed;
  keyed.reserve(ts.size());
  for (auto& t : ts) keyed.emplace_back(chain_key(t), std::move(t));
  std::stable_sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    return coeff_show(a.second.c) < coeff_show(b.second.c);
  });
  std::vector<Term> out;
  for (auto& [key, t] : keyed) {
    if (!out.empty() && !out.back().fs.empty() && chain_key(out.back()) == key) {
      auto q = coeff_add(out.back().c, t.c);
      if (q) {
        out.back().c = *q;
        continue;
      }
    }
    out.push_back(std::move(t));
  }
  std::erase_if(out, [](const Term& t) { return t.c.is_zero(); });
  ts = std::move(out);
}

bool builtins(const RwCtx& ctx, std::vector<Term>& ts, std::vector<std::string>& tr) {
  bool any = false;
  for (int guard = 0; guard < 500; ++guard) {
    bool ch = false;
    for (auto& t : ts)
      for (auto& f : t.fs)
        if (f.k == Factor::K::Paren) ch |= builtins(ctx, f.inner, tr);
    ch |= pass_parens(ctx, ts);
    ch |= pass_iota(ts);
    ch |= pass_hopf(ctx, ts, tr);
    ch |= pass_pmap(ctx, ts);
    std::string before = show_terms(ts);
    pass_merge(ts);
    ch |= show_terms(ts) != before;
    ch |= pass_kill(ctx, ts, tr);
    if (!ch) break;
    any = true;
  }
  return any;
}

/**** rule matching ****/

struct ShiftRes {
  bool ok = false;
  bool det = false;
  int s = 0;
};

ShiftRes det_shift(const RwCtx& ctx, const Factor& g, const Factor& f) {
  if (g.k != f.k) return {};
  switch (g.k) {
    case Factor::K::Cls: {
      if (g.name != f.name) return {};
      int s = f.inst - g.inst;
      if (s < 0) return {};
      if (s > 0 && !suspends_to(*ctx.cat, g.name, g.inst, f.inst)) return {};
      return {true, true, s};
    }
    case Factor::K::Iota: {
      int s = f.n - g.n;
      if (s < 0) return {};
      return {true, true, s};
    }
    case Factor::K::Susp: {
      if (!expr_eq(g.args[0], f.args[0])) return {};
      int s = f.n - g.n;
      if (s < 0) return {};
      return {true, true, s};
    }
    default:
      // Opaque factors never occur suspended (E wraps or kills them), so a
      // shifted occurrence is impossible: defer an exact check to shift 0.
      return {true, false, 0};
  }
}

bool has_fact(const RwCtx& ctx, const FactStmt& st) {
  std::string want = show_stmt(st);
  auto scan = [&](const std::vector<const Fact*>& v) {
    for (const Fact* f : v)
      if (show_stmt(f->st) == want) return true;
    return false;
  };
  return scan(ctx.eq_facts) || scan(ctx.ann_facts) || scan(ctx.epi_facts) ||
         scan(ctx.susp_facts) || scan(ctx.exp_facts);
}

bool conds_ok(const RwCtx& ctx, const RelRec& rec) {
  for (const auto& st : rec.conds) {
    if ((st.k == FactStmt::K::OrderEq || st.k == FactStmt::K::OrderDiv) && st.a &&
        st.a->k == Expr::K::Cls) {
      auto ci = class_info(*ctx.cat, st.a->name, st.a->inst);
      if (!ci || !ci->order) return false;
      if (st.k == FactStmt::K::OrderEq) {
        if (!ci->order_exact || *ci->order != st.m) return false;
      } else {
        if (*ci->order == 0 || st.m % *ci->order != 0) return false;
      }
      continue;
    }
    if (!has_fact(ctx, st)) return false;
  }
  return true;
}

struct Match {
  size_t pos = 0;
  int shift = 0;
  Coeff q;
};

std::optional<Match> try_match(const RwCtx& ctx, const Term& t, const CompiledRule& r) {
  const auto& lf = r.lhs.fs;
  if (lf.empty() || lf.size() > t.fs.size()) return std::nullopt;
  if (!r.lhs.c.is_plain() || r.lhs.c.n < 1) return std::nullopt;
  i64 m0 = r.lhs.c.n;
  for (size_t pos = 0; pos + lf.size() <= t.fs.size(); ++pos) {
    int s = -1;
    bool ok = true;
    for (size_t j = 0; j < lf.size() && ok; ++j) {
      ShiftRes sr = det_shift(ctx, lf[j], t.fs[pos + j]);
      if (!sr.ok) {
        ok = false;
        break;
      }
      if (sr.det) {
        if (s == -1)
          s = sr.s;
        else if (s != sr.s)
          ok = false;
      }
    }
    if (!ok) continue;
    if (s == -1) s = 0;
    for (size_t j = 0; j < lf.size() && ok; ++j) {
      ShiftRes sr = det_shift(ctx, lf[j], t.fs[pos + j]);
      if (sr.det) {
        if (sr.s != s) ok = false;
      } else {
        if (s != 0 || factor_key(lf[j]) != factor_key(t.fs[pos + j])) ok = false;
      }
    }
    if (!ok) continue;
    if (r.rec && !conds_ok(ctx, *r.rec)) return std::nullopt;
    Match m;
    m.pos = pos;
    m.shift = s;
    if (m0 == 1) {
      m.q = t.c;
    } else {
      auto q = div_exact(t.c, m0);
      if (!q) continue;
      if (pos + lf.size() < t.fs.size() && !factors_certified(ctx, t.fs, pos + lf.size()))
        continue;
      m.q = *q;
    }
    return m;
  }
  return std::nullopt;
}

bool apply_rules_in(const RwCtx& ctx, const std::vector<const CompiledRule*>& rules,
                    std::vector<Term>& ts, std::vector<std::string>& tr) {
  for (size_t ti = 0; ti < ts.size(); ++ti) {
    Term& t = ts[ti];
    for (const CompiledRule* r : rules) {
      if (!r->in_scan) continue;
      auto m = try_match(ctx, t, *r);
      if (!m) continue;
      std::string err;
      auto rhs = flatten_expr(ctx, r->rhs, err);
      if (!err.empty()) continue;
      rhs = suspend_terms(ctx, std::move(rhs), m->shift);
      Term nt{m->q, {}};
      nt.fs.assign(t.fs.begin(), t.fs.begin() + m->pos);
      nt.fs.push_back(fac_paren(std::move(rhs)));
      nt.fs.insert(nt.fs.end(), t.fs.begin() + m->pos + r->lhs.fs.size(), t.fs.end());
      tr.push_back(m->shift ? fmt::format("apply {} (shift {})", r->id, m->shift)
                            : fmt::format("apply {}", r->id));
      ts[ti] = std::move(nt);
      return true;
    }
    for (auto& f : t.fs)
      if (f.k == Factor::K::Paren && apply_rules_in(ctx, rules, f.inner, tr)) return true;
  }
  return false;
}

// Flip an equation into a left-to-right rule when the right side is a single
// term with a 2-locally invertible coefficient.
std::optional<CompiledRule> mk_flip(const RwCtx& bctx, const std::string& id, const EP& lhs,
                                    const EP& rhs, const RelRec* rec) {
  std::string err;
  auto rts = flatten_expr(bctx, rhs, err);
  if (!err.empty() || rts.size() != 1) return std::nullopt;
  const Term& rt = rts[0];
  if (rt.fs.empty()) return std::nullopt;
  const Coeff& c = rt.c;
  if (!c.lin.empty() || c.n == 0 || std::abs(c.n) % 2 == 0) return std::nullopt;
  Coeff inv;
  inv.n = c.n < 0 ? -1 : 1;
  inv.pm = c.pm;
  if (std::abs(c.n) != 1 || !c.odd.empty()) inv.odd = {"inv_" + id};
  CompiledRule out;
  out.id = id + "~";
  out.lhs = Term{coeff_int(1), rt.fs};
  out.rhs = mk_scal(inv, lhs);
  out.rec = rec;
  out.flipped = true;
  return out;
}

}  // namespace

std::vector<CompiledRule> compile_rules(const Catalog& cat) {
  RwCtx b;
  b.cat = &cat;
  b.rules = &kNoRules;
  std::vector<CompiledRule> out;
  for (const auto& rel : cat.rels) {
    std::string err;
    auto ts = flatten_expr(b, rel.lhs, err);
    bool fwd = err.empty() && ts.size() == 1 && ts[0].c.is_plain() && ts[0].c.n >= 1;
    if (fwd) {
      CompiledRule r;
      r.id = rel.id;
      r.lhs = ts[0];
      r.rhs = rel.rhs;
      r.rec = &rel;
      out.push_back(std::move(r));
    }
    if (auto f = mk_flip(b, rel.id, rel.lhs, rel.rhs, &rel)) {
      f->in_scan = !fwd;
      out.push_back(std::move(*f));
    }
  }
  return out;
}

/**** driver ****/

NF normalize(const RwCtx& ctx, const EP& e) {
  NF nf;
  if (!ctx.cat) {
    nf.error = "no catalog";
    return nf;
  }
  if (auto b = find_bare(e)) {
    nf.error = fmt::format("unbound name '{}'", *b);
    return nf;
  }
  DegRes d = deg_of(*ctx.cat, e);
  if (!d.ok()) {
    nf.error = d.err;
    return nf;
  }
  std::string err;
  auto ts = flatten_expr(ctx, e, err);
  if (!err.empty()) {
    nf.error = err;
    return nf;
  }
  builtins(ctx, ts, nf.trace);

  // rule order: catalog rules (with flips), then equality facts as they
  // arrived in the knowledge base
  std::vector<CompiledRule> local;
  RwCtx b = bare_ctx(ctx);
  for (const Fact* f : ctx.eq_facts) {
    std::string e2;
    auto lts = flatten_expr(b, f->st.a, e2);
    bool fwd = e2.empty() && lts.size() == 1 && lts[0].c.is_plain() && lts[0].c.n >= 1;
    if (fwd) {
      CompiledRule r;
      r.id = f->id;
      r.lhs = lts[0];
      r.rhs = f->st.b;
      local.push_back(std::move(r));
    }
    if (auto fl = mk_flip(b, f->id, f->st.a, f->st.b, nullptr)) {
      fl->in_scan = !fwd;
      local.push_back(std::move(*fl));
    }
  }
  std::vector<const CompiledRule*> order;
  if (ctx.rules)
    for (const auto& r : *ctx.rules) order.push_back(&r);
  for (const auto& r : local) order.push_back(&r);

  nf.trace.push_back(fmt::format("start {}", show_terms(ts)));
  // Cycle detection ignores coefficients: a rule and its flip can ping-pong
  // while piling up odd units, so a repeated chain set reverts to the first
  // (cleanest) state that had it.
  auto chains_of = [](const std::vector<Term>& v) {
    std::string s;
    for (const auto& t : v) {
      s += chain_key(t);
      s += ';';
    }
    return s;
  };
  std::map<std::string, std::vector<Term>> seen;
  seen[chains_of(ts)] = ts;
  for (int round = 0;; ++round) {
    if (round >= ctx.depth) {
      nf.depth_hit = true;
      nf.trace.push_back("depth limit reached");
      break;
    }
    if (!apply_rules_in(ctx, order, ts, nf.trace)) break;
    builtins(ctx, ts, nf.trace);
    nf.trace.push_back(fmt::format("  = {}", show_terms(ts)));
    auto key = chains_of(ts);
    auto it = seen.find(key);
    if (it != seen.end()) {
      ts = it->second;
      nf.trace.push_back("revisited, stop");
      break;
    }
    seen[key] = ts;
  }
  nf.terms = std::move(ts);
  return nf;
}

bool nf_equal(const NF& a, const NF& b) {
  if (a.error || b.error) return false;
  return show_terms(a.terms) == show_terms(b.terms);
}

}  // namespace stem31
