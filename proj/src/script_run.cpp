#include "stem31/script.hpp"

#include <algorithm>
#include <deque>

#include <fmt/format.h>
#include <fmt/ranges.h>

namespace stem31 {

Visibility visible_for(const Catalog& cat, const std::vector<CompiledRule>& all_rules,
                       const KB& kb, const std::map<std::string, std::string>& owner_of,
                       const std::set<std::string>& use_closure) {
  (void)cat;
  Visibility v;
  for (const CompiledRule& r : all_rules) {
    auto it = owner_of.find(r.id);
    if (it == owner_of.end() || use_closure.count(it->second)) v.rules.push_back(r);
  }
  v.facts = kb.visible(use_closure);
  return v;
}

namespace {

struct StepFail {
  std::string msg;
};

[[noreturn]] void fail(std::string msg) { throw StepFail{std::move(msg)}; }

/*
 * A coset container for the thing under study: rep + span of gens.  With
 * complete=false the generator list may be missing directions, which still
 * certifies that rep itself lies in the tracked set but rules the form out
 * as an upper container for equality or congruence claims.
 */
struct CosetForm {
  EP rep;
  std::vector<EP> gens;
  bool complete = true;
};

struct MemSt {
  EP origin;  // the set (or element) conclusions will be about
  EP set;     // current container: origin is contained in set
  bool meets = false;  // weakened: origin only intersects cst, set is the pinned part
  std::optional<CosetForm> cst;  // second, independent container in coset form
  bool sing = false;             // set is certified a single element
};

struct Part {
  EP set;
  std::optional<CosetForm> cst;
};

struct St {
  enum class K { None, Chain, Mem, Sum, Concl };
  K k = K::None;
  // chain: proven  start = cur
  EP start, cur;
  MemSt mem;
  // sum: the parts together contain a zero sum
  std::vector<Part> parts;
  // congruence: proven  ca = cb  modulo the span of cgens
  EP ca, cb;
  std::vector<EP> cgens;
  bool ccomplete = true;
};

const char* state_name(St::K k) {
  switch (k) {
    case St::K::None: return "no state";
    case St::K::Chain: return "a chain";
    case St::K::Mem: return "a membership";
    case St::K::Sum: return "a zero sum";
    case St::K::Concl: return "a congruence";
  }
  return "?";
}

/**** canonical keys ****/

// Order-insensitive structural key: sums sorted by the printed form of the
// summand.  Used everywhere a script restates an expression the state
// already holds.
EP sort_sums(const EP& e) {
  if (!e) return e;
  auto c = std::make_shared<Expr>(*e);
  for (EP& s : c->sub) s = sort_sums(s);
  if (c->k == Expr::K::Sum || c->k == Expr::K::Span)
    std::sort(c->sub.begin(), c->sub.end(),
              [](const EP& a, const EP& b) { return show_expr(a) < show_expr(b); });
  return c;
}

std::string ckey(const EP& e) { return e ? show_expr(sort_sums(e)) : "<null>"; }

bool key_eq(const EP& a, const EP& b) {
  if (!a || !b) return a == b;
  return expr_eq(a, b) || ckey(a) == ckey(b);
}

/**** chain decomposition of a set expression ****/

struct SetParts {
  Coeff c;
  std::vector<EP> pre, post;
  EP core;  // the single set-valued factor, or the whole element chain
  bool core_set = false;
};

void collect_factors(const EP& e, std::vector<EP>& out) {
  if (e->k == Expr::K::Comp) {
    for (const EP& s : e->sub) collect_factors(s, out);
  } else {
    out.push_back(e);
  }
}

SetParts split_set(const EP& set) {
  SetParts sp;
  sp.c = coeff_int(1);
  EP e = set;
  while (e->k == Expr::K::Scal) {
    auto m = coeff_mul(sp.c, e->c);
    if (!m) fail("cannot combine the scalar layers of the tracked set");
    sp.c = *m;
    e = e->sub[0];
  }
  std::vector<EP> fs;
  collect_factors(e, fs);
  int si = -1;
  for (size_t i = 0; i < fs.size(); ++i)
    if (is_setvalued(fs[i])) {
      si = static_cast<int>(i);
      break;
    }
  if (si < 0) {
    sp.core = e;
    return sp;
  }
  sp.core_set = true;
  sp.core = fs[si];
  sp.pre.assign(fs.begin(), fs.begin() + si);
  sp.post.assign(fs.begin() + si + 1, fs.end());
  return sp;
}

EP rebuild(const SetParts& sp, const EP& core, bool negate) {
  std::vector<EP> fs = sp.pre;
  fs.push_back(core);
  fs.insert(fs.end(), sp.post.begin(), sp.post.end());
  Coeff c = sp.c;
  if (negate) c = coeff_neg(c);
  return mk_scal(c, mk_comp(std::move(fs)));
}

bool fired(const NF& nf, const std::string& id) {
  std::string want = "apply " + id;
  for (const std::string& ln : nf.trace)
    if (ln == want || ln.rfind(want + " (shift", 0) == 0) return true;
  return false;
}

std::optional<EP> strip_map(const Catalog& cat, const EP& e, const MapRef& m) {
  switch (m.k) {
    case MapRef::K::E: return desuspend(cat, e, m.t);
    case MapRef::K::H:
      if (e->k == Expr::K::Hopf) return e->sub[0];
      return std::nullopt;
    case MapRef::K::P:
      if (e->k == Expr::K::PMap) return e->sub[0];
      return std::nullopt;
    default: return std::nullopt;
  }
}

/**** the executor ****/

struct Runner {
  const Script& sc;
  const Catalog& cat;
  const Visibility& vis;

  std::map<std::string, EP> env;
  std::deque<Fact> locals;
  CongEnv cong;
  FactPiles piles;
  St st;
  RunResult out;
  std::set<std::string> unproved;
  std::vector<CompiledRule> no_rules;
  int autolocal = 0;

  Runner(const Script& s, const Catalog& c, const Visibility& v) : sc(s), cat(c), vis(v) {
    unproved.insert(sc.proves.begin(), sc.proves.end());
    for (const std::string& id : sc.proves) {
      if (const RelRec* r = cat.rel(id)) {
        if (!r->conds.empty())
          fail(fmt::format("relation {} is conditional and cannot be a proof target", id));
        continue;
      }
      if (!cat.fact(id)) fail(fmt::format("proof target {} is not in the catalog", id));
    }
    repile();
  }

  void repile() {
    std::vector<const Fact*> all = vis.facts;
    for (const Fact& f : locals) all.push_back(&f);
    piles = pile_facts(all);
    if (cong.cong.empty() && cong.odd_syms.empty()) cong = piles.cong;
    else {
      // keep pins made by cases/order steps on top of the axiom environment
      CongEnv merged = piles.cong;
      for (auto& [s, r] : cong.cong) merged.cong[s] = r;
      for (auto& s : cong.odd_syms) merged.odd_syms.insert(s);
      cong = std::move(merged);
    }
  }

  RwCtx full_ctx() const {
    RwCtx c;
    c.cat = &cat;
    c.rules = &vis.rules;
    c.eq_facts = piles.eqs;
    c.ann_facts = piles.anns;
    c.epi_facts = piles.epis;
    c.susp_facts = piles.susps;
    c.exp_facts = piles.exps;
    c.ord_facts = piles.ords;
    c.cong = &cong;
    return c;
  }

  // Canonicalization only: no relations, no equality facts.  What remains is
  // structure (flattening, certified distribution, order annihilation).
  RwCtx canon_ctx() const {
    RwCtx c = full_ctx();
    c.rules = &no_rules;
    c.eq_facts.clear();
    c.ann_facts.clear();
    return c;
  }

  /**** lookups ****/

  const CompiledRule* find_rule(const std::string& id, bool rev) const {
    for (const CompiledRule& r : vis.rules)
      if (r.id == id && r.flipped == rev) return &r;
    if (cat.rel(id)) {
      for (const CompiledRule& r : vis.rules)
        if (r.id == id)
          fail(fmt::format("relation {} has no usable {} form", id, rev ? "reversed" : "forward"));
      fail(fmt::format("relation {} is not visible here (opaque until its proof runs)", id));
    }
    fail(fmt::format("unknown relation {}", id));
  }

  const Fact* find_fact(const std::string& id) const {
    for (const Fact* f : vis.facts)
      if (f->id == id) return f;
    for (const Fact& f : locals)
      if (f.id == id) return &f;
    if (cat.fact(id)) fail(fmt::format("fact {} is not visible here (opaque until its proof runs)", id));
    fail(fmt::format("unknown fact {}", id));
  }

  /**** expression plumbing ****/

  EP subst(const EP& e) {
    if (!e) return e;
    switch (e->k) {
      case Expr::K::Cls:
        if (e->inst == kBareInst) {
          auto it = env.find(e->name);
          if (it == env.end()) fail(fmt::format("unknown name '{}'", e->name));
          return it->second;
        }
        return e;
      case Expr::K::Susp: return mk_susp(e->n, subst(e->sub[0]));
      case Expr::K::Hopf: return mk_hopf(subst(e->sub[0]));
      case Expr::K::PMap: return mk_pmap(subst(e->sub[0]));
      case Expr::K::Scal: return mk_scal(e->c, subst(e->sub[0]));
      case Expr::K::Wh: return mk_wh(subst(e->sub[0]), subst(e->sub[1]));
      case Expr::K::Brk:
        return mk_brk(subst(e->sub[0]), subst(e->sub[1]), subst(e->sub[2]), e->n);
      case Expr::K::Comp: {
        std::vector<EP> fs;
        for (const EP& s : e->sub) fs.push_back(subst(s));
        return mk_comp(std::move(fs));
      }
      case Expr::K::Sum: {
        std::vector<EP> ts;
        for (const EP& s : e->sub) ts.push_back(subst(s));
        return mk_sum(std::move(ts));
      }
      case Expr::K::Span: {
        std::vector<EP> gs;
        for (const EP& s : e->sub) gs.push_back(subst(s));
        return mk_span(std::move(gs));
      }
      default: return e;
    }
  }

  FactStmt subst(const FactStmt& in) {
    FactStmt s = in;
    s.a = subst(s.a);
    s.b = subst(s.b);
    s.s = subst(s.s);
    return s;
  }

  NF nf_of(const EP& e) const {
    NF nf = normalize(full_ctx(), e);
    if (nf.error) fail(fmt::format("normalization of {} failed: {}", show_expr(e), *nf.error));
    if (nf.depth_hit) fail(fmt::format("normalization of {} hit the depth limit", show_expr(e)));
    return nf;
  }

  bool engine_eq(const EP& a, const EP& b) const {
    if (key_eq(a, b)) return true;
    return nf_equal(nf_of(a), nf_of(b));
  }

  EP mini_rewrite(const EP& e, const CompiledRule& rule, std::string* note) const {
    std::vector<CompiledRule> one{rule};
    one[0].in_scan = true;
    RwCtx c = canon_ctx();
    c.rules = &one;
    NF nf = normalize(c, e);
    if (nf.error) fail(fmt::format("rewrite by {} failed: {}", rule.id, *nf.error));
    if (!fired(nf, rule.id))
      fail(fmt::format("relation {}{} does not apply to {}", rule.id, rule.flipped ? "~" : "",
                       show_expr(e)));
    if (note) *note = fmt::format("{} fired", rule.id);
    return terms_to_expr(nf.terms);
  }

  // An equality fact turned into a one-shot rewrite rule.
  CompiledRule fact_rule(const Fact& f, bool rev) const {
    if (f.st.k != FactStmt::K::Eq) fail(fmt::format("fact {} is not a plain equality", f.id));
    EP lhs = rev ? f.st.b : f.st.a;
    EP rhs = rev ? f.st.a : f.st.b;
    std::string err;
    std::vector<Term> ts = flatten_expr(canon_ctx(), lhs, err);
    if (!err.empty()) fail(fmt::format("fact {}: {}", f.id, err));
    if (ts.size() != 1)
      fail(fmt::format("fact {} has a {}-term left side; cite it with congr or an entry step",
                       f.id, ts.size()));
    CompiledRule r;
    r.id = f.id;
    r.lhs = ts[0];
    r.rhs = rhs;
    r.flipped = rev;
    return r;
  }

  GroupView view_of(const Deg& d, const std::string& what) const {
    if (d.dom.k != Space::K::S)
      fail(fmt::format("{} does not live in a homotopy group", what));
    std::string why;
    auto v = group_view(full_ctx(), d.cod, d.dom.n, &why);
    if (!v) fail(fmt::format("no presentation for pi({}, {}): {}", d.dom.n, show_space(d.cod), why));
    return *v;
  }

  GroupView view_for(const EP& e) const {
    DegRes r = deg_of(cat, e);
    if (!r.ok()) fail(fmt::format("{}: {}", show_expr(e), r.err));
    if (r.k == DegRes::K::Any)
      fail(fmt::format("{} has no definite degree to resolve in", show_expr(e)));
    return view_of(r.d, show_expr(e));
  }

  // Zeros and other degree-free expressions can hide the ambient group, so take
  // the first candidate that pins one down.
  GroupView view_from(std::initializer_list<EP> cands) const {
    for (const EP& e : cands) {
      if (!e) continue;
      DegRes r = deg_of(cat, e);
      if (r.k == DegRes::K::Ok) return view_of(r.d, show_expr(e));
    }
    for (const EP& e : cands)
      if (e) return view_for(e);
    fail("no expression here has a definite degree to resolve in");
  }

  std::vector<EP> span_of(const EP& s, bool* complete) const {
    if (!s) {
      if (complete) *complete = true;
      return {};
    }
    std::string why;
    bool comp = true;
    auto g = span_gens_of(full_ctx(), s, &comp, &why);
    if (!g) fail(fmt::format("cannot read {} as a span: {}", show_expr(s), why));
    if (complete) *complete = comp;
    return *g;
  }

  /**** state plumbing ****/

  MemSt& need_mem(const char* who) {
    if (st.k != St::K::Mem) fail(fmt::format("{} needs a membership, state is {}", who, state_name(st.k)));
    return st.mem;
  }

  BrkSpec core_bracket(const SetParts& sp, const char* who) const {
    if (!sp.core || sp.core->k != Expr::K::Brk)
      fail(fmt::format("{}: the tracked set has no bracket at its core", who));
    std::string why;
    auto b = as_bracket(canon_ctx(), sp.core, &why);
    if (!b) fail(fmt::format("{}: {}", who, why));
    return *b;
  }

  // The law target named in the step must be what the state actually holds.
  void check_restate(const EP& given, const SetParts& sp, const EP& whole) const {
    if (!given) return;
    if (key_eq(given, whole) || key_eq(given, sp.core)) return;
    fail(fmt::format("the step names {} but the state holds {}", show_expr(given),
                     show_expr(whole)));
  }

  void mem_law_result(MemSt& m, const SetParts& sp, const LawOut& law, bool keep_sing) {
    m.set = rebuild(sp, law.set, law.negate);
    if (!keep_sing) m.sing = false;
  }

  /**** law prologue ****/

  struct LawIn {
    SetParts sp;
    BrkSpec spec;
  };

  LawIn prep_law(MemSt& m, const EP& given, const char* who) {
    LawIn in;
    in.sp = split_set(m.set);
    in.spec = core_bracket(in.sp, who);
    check_restate(given, in.sp, m.set);
    return in;
  }

  /**** steps ****/

  std::string exec(const Step& s);

  std::string exec_let(const Step& s) {
    if (env.count(s.id)) fail(fmt::format("name '{}' is already bound", s.id));
    env[s.id] = subst(s.e1);
    return fmt::format("{} bound", s.id);
  }

  std::string exec_focus(const Step& s) {
    st = St{};
    st.k = St::K::Chain;
    st.start = st.cur = subst(s.e1);
    return fmt::format("chain starts at {}", show_expr(st.start));
  }

  std::string exec_gives(const Step& s) {
    if (st.k != St::K::Chain) fail("gives needs a chain");
    EP want = subst(s.e1);
    std::string err;
    RwCtx c = canon_ctx();
    NF a, b;
    a.terms = flatten_expr(c, st.cur, err);
    if (!err.empty()) fail(err);
    b.terms = flatten_expr(c, want, err);
    if (!err.empty()) fail(err);
    if (!nf_equal(a, b))
      fail(fmt::format("the chain holds {}, not {}", show_terms(a.terms), show_expr(want)));
    st.cur = want;
    return "form checked";
  }

  std::string exec_normalize(const Step&) {
    if (st.k != St::K::Chain) fail("normalize needs a chain");
    NF nf = nf_of(st.cur);
    st.cur = terms_to_expr(nf.terms);
    return fmt::format("now {}", show_expr(st.cur));
  }

  std::string exec_rewrite(const Step& s) {
    const CompiledRule* r = find_rule(s.id, s.rev);
    std::string note;
    if (st.k == St::K::Chain) {
      st.cur = mini_rewrite(st.cur, *r, &note);
      return fmt::format("{}; now {}", note, show_expr(st.cur));
    }
    if (st.k == St::K::Concl) {
      // try the a side first, then b, unless one is forced
      for (EP* side : {&st.ca, &st.cb}) {
        try {
          EP ns = mini_rewrite(*side, *r, &note);
          *side = ns;
          return fmt::format("{}; side now {}", note, show_expr(*side));
        } catch (const StepFail&) {
        }
      }
      fail(fmt::format("relation {} does not apply to either side", s.id));
    }
    MemSt& m = need_mem("rewrite");
    if (is_setvalued(m.set))
      fail("rewrite only acts on an element-valued set; use entry steps inside a bracket");
    m.set = mini_rewrite(m.set, *r, &note);
    m.cst = CosetForm{m.set, {}, true};
    m.sing = true;
    return fmt::format("{}; set now {}", note, show_expr(m.set));
  }

  std::string exec_eqfact(const Step& s) {
    const Fact* f = find_fact(s.id);
    if (st.k == St::K::Chain) {
      std::string note;
      st.cur = mini_rewrite(st.cur, fact_rule(*f, s.rev), &note);
      return fmt::format("{}; now {}", note, show_expr(st.cur));
    }
    MemSt& m = need_mem("eq");
    if (m.meets) fail("this part is already pinned; use meet");
    EP fa = s.rev ? f->st.b : f->st.a;
    EP fb = s.rev ? f->st.a : f->st.b;
    if (f->st.k == FactStmt::K::CosetEq) {
      if (!key_eq(fa, m.set))
        fail(fmt::format("fact {} speaks about {}, the state holds {}", s.id, show_expr(fa),
                         show_expr(m.set)));
      bool comp = true;
      std::vector<EP> gens = span_of(f->st.s, &comp);
      m.cst = CosetForm{fb, std::move(gens), comp};
      return fmt::format("{} gives the coset form {} mod {}", s.id, show_expr(fb),
                         show_expr(f->st.s));
    }
    if (f->st.k != FactStmt::K::Eq)
      fail(fmt::format("fact {} is not an equality", s.id));
    if (key_eq(fa, m.set)) {
      m.set = fb;
      if (!is_setvalued(fb)) {
        m.cst = CosetForm{fb, {}, true};
        m.sing = true;
      } else {
        m.sing = false;
      }
      return fmt::format("{} replaces the set by {}", s.id, show_expr(fb));
    }
    if (!is_setvalued(m.set)) {
      std::string note;
      m.set = mini_rewrite(m.set, fact_rule(*f, s.rev), &note);
      m.cst = CosetForm{m.set, {}, true};
      m.sing = true;
      return fmt::format("{}; set now {}", note, show_expr(m.set));
    }
    fail(fmt::format("fact {} does not name the tracked set {}", s.id, show_expr(m.set)));
  }

  std::string exec_congr(const Step& s) {
    if (st.k != St::K::Concl) fail("congr needs a proven congruence");
    const Fact* f = find_fact(s.id);
    EP fa = s.rev ? f->st.b : f->st.a;
    EP fb = s.rev ? f->st.a : f->st.b;
    if (f->st.k != FactStmt::K::Eq && f->st.k != FactStmt::K::CosetEq)
      fail(fmt::format("fact {} is not an equality or congruence", s.id));

    RwCtx c = canon_ctx();
    std::string err;
    std::vector<Term> fts = flatten_expr(c, fa, err);
    if (!err.empty()) fail(err);
    if (fts.size() != 1 || !fts[0].c.is_plain() || fts[0].c.n < 1)
      fail(fmt::format("fact {} needs a single plain chain on its matched side", s.id));
    i64 fd = fts[0].c.n;

    auto try_side = [&](EP& side) -> std::optional<std::string> {
      std::vector<Term> sts = flatten_expr(c, side, err);
      if (!err.empty() || sts.size() != 1) return std::nullopt;
      Term& tm = sts[0];
      for (int shift = 0; shift < 48; ++shift) {
        std::vector<Term> sus = suspend_terms(c, {fts[0]}, shift);
        if (sus.size() != 1 || !sus[0].c.is_plain() || sus[0].c.n != fd) break;
        const auto& want = sus[0].fs;
        if (want.empty() || want.size() > tm.fs.size()) continue;
        for (size_t i = 0; i + want.size() <= tm.fs.size(); ++i) {
          bool hit = true;
          for (size_t j = 0; j < want.size(); ++j)
            if (factor_key(tm.fs[i + j]) != factor_key(want[j])) {
              hit = false;
              break;
            }
          if (!hit) continue;
          Coeff q = tm.c;
          if (fd > 1) {
            // mirror the rewriter: peel the factor out of the coefficient and
            // certify the tail so the multiple can travel to the matched chain
            if (q.n % fd) fail(fmt::format("the chain carries coefficient {}, not a multiple of {}", q.n, fd));
            q.n /= fd;
            for (auto& [sy, v] : q.lin) {
              if (v % fd)
                fail(fmt::format("the {} coefficient is not a multiple of {}", sy, fd));
              v /= fd;
            }
            for (size_t j = i + want.size(); j < tm.fs.size(); ++j)
              if (!factor_certified(c, tm.fs[j]))
                fail(fmt::format("cannot move the factor {} past the non-suspension tail {}",
                                 fd, factor_key(tm.fs[j])));
          }
          std::vector<EP> pre, post;
          for (size_t j = 0; j < i; ++j) pre.push_back(factor_to_expr(tm.fs[j]));
          for (size_t j = i + want.size(); j < tm.fs.size(); ++j)
            post.push_back(factor_to_expr(tm.fs[j]));
          // the fact's span enters conjugated by the surrounding chain; the
          // tail must distribute for that, so it has to be suspension there
          bool has_span = f->st.k == FactStmt::K::CosetEq;
          if (has_span && !post.empty()) {
            for (size_t j = i + want.size(); j < tm.fs.size(); ++j)
              if (!factor_certified(c, tm.fs[j]))
                fail(fmt::format(
                    "cannot carry the span of {} past the non-suspension tail {}", s.id,
                    factor_key(tm.fs[j])));
          }
          std::vector<Term> fbs = flatten_expr(c, fb, err);
          if (!err.empty()) fail(err);
          EP repl;
          if (fbs.empty()) {
            repl = mk_zero();
          } else if (fbs.size() == 1) {
            std::vector<Term> rs = suspend_terms(c, fbs, shift);
            if (rs.empty()) {
              repl = mk_zero();
            } else {
              std::vector<EP> fs = pre;
              for (const Factor& ff : rs[0].fs) fs.push_back(factor_to_expr(ff));
              fs.insert(fs.end(), post.begin(), post.end());
              auto cc = coeff_mul(q, rs[0].c);
              if (!cc) fail("coefficient layers do not combine");
              repl = mk_scal(*cc, mk_comp(std::move(fs)));
            }
          } else {
            fail(fmt::format("fact {} has a many-term right side", s.id));
          }
          if (has_span) {
            bool comp = true;
            for (const EP& g : span_of(f->st.s, &comp)) {
              std::vector<EP> fs = pre;
              fs.push_back(shift ? mk_susp(shift, g) : g);
              fs.insert(fs.end(), post.begin(), post.end());
              st.cgens.push_back(mk_comp(std::move(fs)));
            }
            st.ccomplete = st.ccomplete && comp;
          }
          side = repl;
          return fmt::format("{} applied at shift {}; side now {}", s.id, shift,
                             show_expr(side));
        }
      }
      return std::nullopt;
    };

    if (s.m == 0 || s.m == 2)
      if (auto n = try_side(st.ca)) return *n;
    if (s.m == 1 || s.m == 2)
      if (auto n = try_side(st.cb)) return *n;
    fail(fmt::format("fact {} matches no sub-chain of the congruence sides", s.id));
  }

  std::string exec_mono(const Step& s) {
    const Fact* f = find_fact(s.id);
    if (f->st.k != FactStmt::K::Mono) fail(fmt::format("fact {} is not an injectivity fact", s.id));
    if (f->st.map != s.map)
      fail(fmt::format("fact {} is about {}, the step strips {}", s.id, show_map(f->st.map),
                       show_map(s.map)));
    if (s.map.k != MapRef::K::E) fail("only suspension monomorphisms can be stripped");
    int t = s.map.t;
    if (!f->st.a || f->st.a->k != Expr::K::PiSet) fail(fmt::format("fact {} names no group", s.id));
    Deg dom = pi_deg(f->st.a->n, f->st.a->sp);

    auto checked_strip = [&](const EP& e, const char* what) {
      auto d = desuspend(cat, e, t);
      if (!d) fail(fmt::format("{} {} is not visibly a {}-fold suspension", what, show_expr(e), t));
      DegRes r = deg_of(cat, *d);
      if (r.k == DegRes::K::Err) fail(r.err);
      if (r.k == DegRes::K::Ok && r.d != dom)
        fail(fmt::format("{} desuspends into {}, fact {} covers {}", what, show_deg(r.d), s.id,
                         show_deg(dom)));
      return *d;
    };

    if (st.k == St::K::Chain) {
      EP a = checked_strip(st.start, "start");
      EP b = checked_strip(st.cur, "current form");
      st.start = a;
      st.cur = b;
      return fmt::format("desuspended; chain is {} = {}", show_expr(a), show_expr(b));
    }
    MemSt& m = need_mem("mono");
    if (m.meets) fail("mono cannot act on a pinned part");
    EP rep;
    if (m.cst) {
      if (!m.sing || !m.cst->gens.empty() || !m.cst->complete)
        fail("mono on a membership needs the set pinned to a single element first");
      rep = m.cst->rep;
    } else if (!is_setvalued(m.set)) {
      rep = m.set;
    } else {
      fail("mono on a membership needs the set pinned to a single element first");
    }
    EP o = checked_strip(m.origin, "the tracked set");
    EP r = checked_strip(rep, "its value");
    m.origin = o;
    m.set = r;
    m.cst = CosetForm{r, {}, true};
    return fmt::format("desuspended; {} is {}", show_expr(o), show_expr(r));
  }

  std::string exec_exactker(const Step& s) {
    const Fact* f = find_fact(s.id);
    if (f->st.k != FactStmt::K::Ker) fail(fmt::format("fact {} is not a kernel fact", s.id));
    if (f->st.map != s.map)
      fail(fmt::format("fact {} describes ker {}, the step names {}", s.id, show_map(f->st.map),
                       show_map(s.map)));
    EP kset = subst(s.e1);
    if (!key_eq(kset, f->st.s))
      fail(fmt::format("fact {} has kernel {}, the step restates {}", s.id, show_expr(f->st.s),
                       show_expr(kset)));
    if (!f->st.a || f->st.a->k != Expr::K::PiSet) fail(fmt::format("fact {} names no group", s.id));
    Deg dom = pi_deg(f->st.a->n, f->st.a->sp);
    bool comp = true;
    std::vector<EP> kgens = span_of(f->st.s, &comp);

    if (st.k == St::K::Chain) {
      if (!nf_of(st.cur).is_zero())
        fail(fmt::format("the chain ends at {}, not zero", show_expr(st.cur)));
      auto x = strip_map(cat, st.start, s.map);
      if (!x) fail(fmt::format("the chain does not start at {} of something", show_map(s.map)));
      DegRes r = deg_of(cat, *x);
      if (r.k == DegRes::K::Err) fail(r.err);
      if (r.k == DegRes::K::Ok && r.d != dom)
        fail(fmt::format("{} lives in {}, fact {} covers {}", show_expr(*x), show_deg(r.d), s.id,
                         show_deg(dom)));
      st = St{};
      st.k = St::K::Mem;
      st.mem.origin = *x;
      st.mem.set = f->st.s;
      st.mem.cst = CosetForm{mk_zero(), std::move(kgens), comp};
      return fmt::format("{} lands in {}", show_expr(st.mem.origin), show_expr(st.mem.set));
    }

    MemSt& m = need_mem("exact ker");
    if (m.meets) fail("exact ker cannot act on a pinned part");
    // look for map(set) = map(r): members then differ from r by the kernel
    auto applied = [&](const EP& e) -> std::optional<EP> { return strip_map(cat, e, s.map); };
    for (const Fact* ef : piles.eqs) {
      if (ef->st.k != FactStmt::K::Eq) continue;
      for (bool swp : {false, true}) {
        EP lhs = swp ? ef->st.b : ef->st.a;
        EP rhs = swp ? ef->st.a : ef->st.b;
        auto la = applied(lhs), ra = applied(rhs);
        if (!la || !ra) continue;
        if (!key_eq(*la, m.set)) continue;
        DegRes r = deg_of(cat, *ra);
        if (r.k == DegRes::K::Ok && r.d != dom) continue;
        m.cst = CosetForm{*ra, kgens, comp};
        return fmt::format("{} and {} pin the set inside {} + ker {}", ef->id, s.id,
                           show_expr(*ra), show_map(s.map));
      }
    }
    fail(fmt::format("no visible fact equates {} of {} with {} of an element", show_map(s.map),
                     show_expr(m.set), show_map(s.map)));
  }

  std::string exec_wd(const Step& s) {
    EP e = subst(s.e1);
    std::string why;
    auto b = as_bracket(full_ctx(), e, &why);
    if (!b) fail(why);
    Wd w = well_defined(full_ctx(), *b);
    if (!w.ok) fail(w.why);
    return fmt::format("{} is defined", show_expr(e));
  }

  std::string exec_indet(const Step& s) {
    MemSt& m = need_mem("indet");
    SetParts sp = split_set(m.set);
    BrkSpec spec = core_bracket(sp, "indet");
    check_restate(subst(s.e1), sp, m.set);
    RwCtx c = full_ctx();
    std::string why;
    auto ind = indeterminacy(c, spec, &why);
    if (!ind) fail(why);
    GroupView v = view_of(spec.deg, "the bracket value");
    auto isub = resolve_ind(c, v, *ind, &why);
    if (!isub) fail(why);
    bool trivial = true;
    for (const Subgroup& h : isub->per_cand)
      if (sub_order(h) != 1) trivial = false;
    bool complete = !ind->partial && !isub->partial;

    if (s.expect) {
      if (s.list.empty()) {
        if (!trivial) fail("the indeterminacy does not resolve to zero");
        if (!complete) fail("the indeterminacy is only partially listed; zero is not certified");
      } else {
        std::vector<EP> want;
        for (const EP& g : s.list) want.push_back(subst(g));
        for (size_t i = 0; i < v.cands.size(); ++i) {
          auto span = span_in(c, v.cands[i], want, &why);
          if (!span) fail(why);
          if (!sub_eq(*span, isub->per_cand[i]))
            fail("the expected generators span a different subgroup");
        }
      }
    }
    // a wrapped singleton stays a singleton: composing or scaling one
    // element yields one element
    if (trivial && complete) m.sing = true;
    return fmt::format("indeterminacy {}: {}", trivial ? "trivial" : "resolved", ind->note);
  }

  std::string exec_mem(const Step& s) {
    const Fact* f = find_fact(s.id);
    if (f->st.k != FactStmt::K::Mem) fail(fmt::format("fact {} is not a membership", s.id));
    st = St{};
    st.k = St::K::Mem;
    st.mem.origin = f->st.a;
    st.mem.set = f->st.s;
    return fmt::format("{} lies in {}", show_expr(f->st.a), show_expr(f->st.s));
  }

  std::string exec_take(const Step& s) {
    EP e = subst(s.e1);
    std::string why;
    auto b = as_bracket(full_ctx(), e, &why);
    if (!b) fail(why);
    Wd w = well_defined(full_ctx(), *b);
    if (!w.ok) fail(w.why);
    st = St{};
    st.k = St::K::Mem;
    st.mem.origin = st.mem.set = brk_expr(*b);
    return fmt::format("tracking {}", show_expr(st.mem.set));
  }

  std::string exec_lcomp(const Step& s) {
    MemSt& m = need_mem("lcomp");
    EP e = subst(s.e1);
    EP nset = mk_comp({e, m.set});
    DegRes r = deg_of(cat, nset);
    if (!r.ok()) fail(r.err);
    m.origin = mk_comp({e, m.origin});
    m.set = nset;
    if (m.cst) {
      m.cst->rep = mk_comp({e, m.cst->rep});
      for (EP& g : m.cst->gens) g = mk_comp({e, g});
    }
    return fmt::format("now tracking {}", show_expr(m.set));
  }

  std::string exec_rcomp(const Step& s) {
    MemSt& m = need_mem("rcomp");
    EP e = subst(s.e1);
    EP nset = mk_comp({m.set, e});
    DegRes r = deg_of(cat, nset);
    if (!r.ok()) fail(r.err);
    m.origin = mk_comp({m.origin, e});
    m.set = nset;
    if (m.cst) {
      if (m.cst->gens.empty() || susp_certified(canon_ctx(), e)) {
        m.cst->rep = mk_comp({m.cst->rep, e});
        for (EP& g : m.cst->gens) g = mk_comp({g, e});
      } else {
        // the span cannot move past a non-suspension on the right
        m.cst.reset();
      }
    }
    return fmt::format("now tracking {}", show_expr(m.set));
  }

  /**** bracket laws on a membership ****/

  std::string exec_shuffle_l(const Step& s) {
    MemSt& m = need_mem("shuffle-left");
    SetParts sp = split_set(m.set);
    BrkSpec spec = core_bracket(sp, "shuffle-left");
    EP alpha = subst(s.e2);
    check_restate(subst(s.e1), sp, m.set);
    if (sp.pre.empty() || !key_eq(sp.pre.back(), alpha))
      fail(fmt::format("{} is not composed on the left of the bracket", show_expr(alpha)));
    std::string why;
    auto law = shuffle_left(full_ctx(), alpha, spec, &why);
    if (!law) fail(why);
    sp.pre.pop_back();
    mem_law_result(m, sp, *law, false);
    return law->note;
  }

  std::string exec_shuffle_r(const Step& s) {
    MemSt& m = need_mem("shuffle-right");
    SetParts sp = split_set(m.set);
    BrkSpec spec = core_bracket(sp, "shuffle-right");
    EP delta = subst(s.e2);
    check_restate(subst(s.e1), sp, m.set);
    if (sp.post.empty() || !key_eq(sp.post.front(), delta))
      fail(fmt::format("{} is not composed on the right of the bracket", show_expr(delta)));
    std::string why;
    auto law = shuffle_right(full_ctx(), spec, delta, &why);
    if (!law) fail(why);
    sp.post.erase(sp.post.begin());
    mem_law_result(m, sp, *law, false);
    return law->note;
  }

  std::string exec_absorb_l(const Step& s) {
    MemSt& m = need_mem("absorb-left");
    SetParts sp = split_set(m.set);
    BrkSpec spec = core_bracket(sp, "absorb-left");
    EP alpha = subst(s.e2);
    check_restate(subst(s.e1), sp, m.set);
    if (sp.pre.empty() || !key_eq(sp.pre.back(), alpha))
      fail(fmt::format("{} is not composed on the left of the bracket", show_expr(alpha)));
    std::string why;
    auto law = absorb_left(full_ctx(), alpha, spec, &why);
    if (!law) fail(why);
    sp.pre.pop_back();
    mem_law_result(m, sp, *law, false);
    return law->note;
  }

  std::string exec_absorb_r(const Step& s) {
    MemSt& m = need_mem("absorb-right");
    SetParts sp = split_set(m.set);
    BrkSpec spec = core_bracket(sp, "absorb-right");
    EP delta = subst(s.e2);
    check_restate(subst(s.e1), sp, m.set);
    if (sp.post.empty() || !key_eq(sp.post.front(), delta))
      fail(fmt::format("{} is not composed on the right of the bracket", show_expr(delta)));
    std::string why;
    auto law = absorb_right(full_ctx(), spec, delta, &why);
    if (!law) fail(why);
    sp.post.erase(sp.post.begin());
    mem_law_result(m, sp, *law, false);
    return law->note;
  }

  std::string exec_slide(const Step& s) {
    MemSt& m = need_mem("slide");
    LawIn in = prep_law(m, subst(s.e1), "slide");
    std::string why;
    auto law = slide(full_ctx(), in.spec, static_cast<int>(s.m), &why);
    if (!law) fail(why);
    mem_law_result(m, in.sp, *law, true);
    return law->note;
  }

  std::string exec_scalar(const Step& s) {
    MemSt& m = need_mem("scalar");
    SetParts sp = split_set(m.set);
    BrkSpec spec = core_bracket(sp, "scalar");
    check_restate(subst(s.e1), sp, m.set);
    if (sp.post.empty()) fail("no degree map is composed on the right");
    const EP& d = sp.post.front();
    bool match = d->k == Expr::K::Scal && d->sub[0]->k == Expr::K::Iota &&
                 d->c.is_plain() && d->c.n == s.m;
    if (!match)
      fail(fmt::format("the right factor {} is not the degree map {} iota", show_expr(d), s.m));
    std::string why;
    auto law = scalar_right(full_ctx(), spec, s.m, &why);
    if (!law) fail(why);
    sp.post.erase(sp.post.begin());
    mem_law_result(m, sp, *law, true);
    return law->note;
  }

  std::string exec_suspend(const Step& s) {
    const Fact* eq_by = s.id.empty() ? nullptr : find_fact(s.id);
    if (!s.e1 && st.k == St::K::Chain) {
      st.start = mk_susp(1, st.start);
      st.cur = mk_susp(1, st.cur);
      return "chain suspended";
    }
    if (!s.e1 && st.k == St::K::Concl) {
      st.ca = mk_susp(1, st.ca);
      st.cb = mk_susp(1, st.cb);
      for (EP& g : st.cgens) g = mk_susp(1, g);
      return "congruence suspended";
    }
    MemSt& m = need_mem("suspend");
    SetParts sp = split_set(m.set);
    if (!sp.pre.empty() || !sp.post.empty())
      fail("suspend acts on a bare bracket; peel the composition first");
    BrkSpec spec = core_bracket(sp, "suspend");
    check_restate(subst(s.e1), sp, m.set);
    bool is_eq = false;
    std::string why;
    auto law = suspend_bracket(full_ctx(), spec, eq_by, &is_eq, &why);
    if (!law) fail(why);
    m.origin = mk_susp(1, m.origin);
    m.set = rebuild(sp, law->set, law->negate);
    if (m.cst) {
      m.cst->rep = mk_susp(1, m.cst->rep);
      for (EP& g : m.cst->gens) g = mk_susp(1, g);
    }
    m.sing = m.sing && is_eq;
    return law->note;
  }

  std::string exec_relax(const Step& s) {
    MemSt& m = need_mem("relax");
    LawIn in = prep_law(m, subst(s.e1), "relax");
    std::string why;
    auto law = relax_bracket(full_ctx(), in.spec, static_cast<int>(s.m), &why);
    if (!law) fail(why);
    mem_law_result(m, in.sp, *law, false);
    return law->note;
  }

  std::string exec_subeq(const Step& s) {
    MemSt& m = need_mem("subeq");
    LawIn in = prep_law(m, subst(s.e1), "subeq");
    GroupView v = view_of(in.spec.deg, "the bracket value");
    std::string why;
    auto law = subeq_bracket(full_ctx(), in.spec, static_cast<int>(s.m), v, &why);
    if (!law) fail(why);
    mem_law_result(m, in.sp, *law, true);
    return law->note;
  }

  std::string exec_split(const Step& s) {
    MemSt& m = need_mem("split");
    SetParts sp = split_set(m.set);
    BrkSpec spec = core_bracket(sp, "split");
    check_restate(subst(s.e1), sp, m.set);
    if (!sp.pre.empty() || !sp.post.empty())
      fail("split acts on a bare bracket; peel the composition first");
    std::string why;
    auto law = add_split(full_ctx(), spec, static_cast<int>(s.m), &why);
    if (!law) fail(why);
    mem_law_result(m, sp, *law, false);
    return law->note;
  }

  std::string exec_entry(const Step& s, bool cited) {
    MemSt& m = need_mem(cited ? "entryrw" : "entrynf");
    SetParts sp = split_set(m.set);
    BrkSpec spec = core_bracket(sp, cited ? "entryrw" : "entrynf");
    if (!cited) check_restate(subst(s.e1), sp, m.set);
    int k = static_cast<int>(s.m);
    if (k < 1 || k > 3) fail(fmt::format("entry must be 1, 2 or 3, got {}", k));
    EP entry = k == 1 ? spec.a : k == 2 ? spec.b : spec.c;
    EP ne;
    std::string note;
    if (cited) {
      ne = mini_rewrite(entry, *find_rule(s.id, s.rev), &note);
    } else {
      NF nf = nf_of(entry);
      ne = terms_to_expr(nf.terms);
      note = fmt::format("entry {} normalized to {}", k, show_expr(ne));
    }
    EP nb = mk_brk(k == 1 ? ne : spec.a, k == 2 ? ne : spec.b, k == 3 ? ne : spec.c, spec.t);
    std::string why;
    if (!as_bracket(canon_ctx(), nb, &why)) fail(fmt::format("rewritten entry broke the bracket: {}", why));
    m.set = rebuild(sp, nb, false);
    return note;
  }

  std::string exec_jacobi(const Step& s) {
    std::vector<EP> es;
    for (const EP& e : s.list) es.push_back(subst(e));
    std::string why;
    auto j = jacobi_sum(full_ctx(), es[0], es[1], es[2], es[3], es[4], &why);
    if (!j) fail(why);
    st = St{};
    st.k = St::K::Sum;
    st.parts = {Part{j->t1, {}}, Part{j->t2, {}}, Part{j->t3, {}}};
    return j->note;
  }

  std::string exec_at(const Step& s) {
    int k = static_cast<int>(s.m);
    const Step& in = s.inner[0];
    if ((in.k == Step::K::Rewrite || in.k == Step::K::EqFact) && in.m >= 0)
      fail("nested part selectors");
    if (st.k == St::K::Sum) {
      if (k < 1 || k > static_cast<int>(st.parts.size()))
        fail(fmt::format("the sum has {} parts, not {}", st.parts.size(), k));
      Part& p = st.parts[k - 1];
      St saved = st;
      st.k = St::K::Mem;
      st.mem = MemSt{p.set, p.set, false, p.cst, false};
      std::string note;
      try {
        note = exec(in);
      } catch (StepFail&) {
        st = std::move(saved);
        throw;
      }
      Part np{st.mem.set, st.mem.cst};
      st = std::move(saved);
      st.parts[k - 1] = std::move(np);
      return fmt::format("part {}: {}", k, note);
    }
    MemSt& m = need_mem("at");
    if (!m.set || m.set->k != Expr::K::Sum) fail("the tracked set is not a sum");
    std::vector<EP> subs = m.set->sub;
    if (k < 1 || k > static_cast<int>(subs.size()))
      fail(fmt::format("the set has {} summands, not {}", subs.size(), k));
    St saved = st;
    st.k = St::K::Mem;
    st.mem = MemSt{subs[k - 1], subs[k - 1], false, {}, false};
    std::string note;
    try {
      note = exec(in);
    } catch (StepFail&) {
      st = std::move(saved);
      throw;
    }
    subs[k - 1] = st.mem.set;
    st = std::move(saved);
    std::vector<EP> live;
    for (const EP& e : subs)
      if (e->k != Expr::K::Zero) live.push_back(e);
    st.mem.set = mk_sum(std::move(live));
    st.mem.sing = false;
    return fmt::format("summand {}: {}; set now {}", k, note, show_expr(st.mem.set));
  }

  std::string exec_rep(const Step& s) {
    MemSt& m = need_mem("rep");
    SetParts sp = split_set(m.set);
    BrkSpec spec = core_bracket(sp, "rep");
    std::string why;
    auto ind = indeterminacy(full_ctx(), spec, &why);
    if (!ind) fail(why);
    if (!ind->gens.empty() && !sp.post.empty())
      for (const EP& p : sp.post)
        if (!susp_certified(canon_ctx(), p))
          fail(fmt::format("the span cannot move past the non-suspension tail {}", show_expr(p)));

    EP r;
    std::string who;
    if (s.id == "0") {
      bool has_zero = false;
      for (const EP& e : {spec.a, spec.b, spec.c})
        if (e->k == Expr::K::Zero || nf_of(e).is_zero()) has_zero = true;
      if (!has_zero) fail("no entry of the bracket is zero");
      r = mk_zero();
      who = "a zero entry";
    } else {
      const Fact* f = find_fact(s.id);
      if (f->st.k != FactStmt::K::Mem) fail(fmt::format("fact {} is not a membership", s.id));
      if (!key_eq(f->st.s, sp.core))
        fail(fmt::format("fact {} places its element in {}, not in {}", s.id,
                         show_expr(f->st.s), show_expr(sp.core)));
      std::vector<EP> fs = sp.pre;
      fs.push_back(f->st.a);
      fs.insert(fs.end(), sp.post.begin(), sp.post.end());
      r = mk_scal(sp.c, mk_comp(std::move(fs)));
      who = f->id;
    }
    std::vector<EP> gens;
    for (const EP& g : ind->gens) {
      std::vector<EP> fs = sp.pre;
      fs.push_back(g);
      fs.insert(fs.end(), sp.post.begin(), sp.post.end());
      gens.push_back(mk_comp(std::move(fs)));
    }
    m.cst = CosetForm{r, std::move(gens), !ind->partial};
    return fmt::format("coset form through {}: {} mod {} generators{}", who, show_expr(r),
                       m.cst->gens.size(), m.cst->complete ? "" : " (partial)");
  }

  std::string exec_extract(const Step& s) {
    if (st.k != St::K::Sum) fail("extract needs a zero sum");
    int k = static_cast<int>(s.m);
    if (k < 1 || k > static_cast<int>(st.parts.size()))
      fail(fmt::format("the sum has {} parts, not {}", st.parts.size(), k));
    std::vector<EP> reps, gens;
    for (int i = 0; i < static_cast<int>(st.parts.size()); ++i) {
      if (i == k - 1) continue;
      const Part& p = st.parts[i];
      CosetForm c;
      if (p.cst) {
        if (!p.cst->complete)
          fail(fmt::format("part {} has only a partial coset form", i + 1));
        c = *p.cst;
      } else if (p.set->k == Expr::K::Zero) {
        c = CosetForm{mk_zero(), {}, true};
      } else if (!is_setvalued(p.set)) {
        c = CosetForm{p.set, {}, true};
      } else {
        fail(fmt::format("part {} has no coset form yet", i + 1));
      }
      if (c.rep->k != Expr::K::Zero) reps.push_back(c.rep);
      gens.insert(gens.end(), c.gens.begin(), c.gens.end());
    }
    EP crep = reps.empty() ? mk_zero() : mk_scal(coeff_int(-1), mk_sum(std::move(reps)));
    EP pinned = st.parts[k - 1].set;
    st = St{};
    st.k = St::K::Mem;
    st.mem.origin = pinned;
    st.mem.set = pinned;
    st.mem.meets = true;
    st.mem.cst = CosetForm{crep, std::move(gens), true};
    return fmt::format("part {} meets {} modulo {} generators", k, show_expr(crep),
                       st.mem.cst->gens.size());
  }

  std::string exec_meet(const Step& s) {
    MemSt& m = need_mem("meet");
    if (!m.meets || !m.cst) fail("meet needs a pinned part from extract");
    const Fact* f = find_fact(s.id);
    if (f->st.k != FactStmt::K::Eq && f->st.k != FactStmt::K::CosetEq)
      fail(fmt::format("fact {} is not an equality or congruence", s.id));
    SetParts sp = split_set(m.set);
    if (!sp.pre.empty() || !sp.post.empty())
      fail("meet expects the pinned part to be a bare (possibly negated) set");
    EP fb;
    if (key_eq(f->st.a, sp.core)) fb = f->st.b;
    else if (key_eq(f->st.b, sp.core)) fb = f->st.a;
    else
      fail(fmt::format("fact {} does not speak about {}", s.id, show_expr(sp.core)));
    bool comp = true;
    std::vector<EP> sgens = span_of(f->st.s, &comp);
    EP ca = mk_scal(sp.c, fb);
    EP cb = m.cst->rep;
    std::vector<EP> gens = std::move(sgens);
    gens.insert(gens.end(), m.cst->gens.begin(), m.cst->gens.end());
    bool complete = comp && m.cst->complete;
    st = St{};
    st.k = St::K::Concl;
    st.ca = ca;
    st.cb = cb;
    st.cgens = std::move(gens);
    st.ccomplete = complete;
    return fmt::format("congruence {} = {} modulo {} generators", show_expr(ca), show_expr(cb),
                       st.cgens.size());
  }

  std::string exec_same(const Step& s) {
    MemSt& m = need_mem("same");
    if (m.meets) fail("same cannot act on a pinned part");
    if (!m.sing) fail("same needs the set certified a singleton");
    const Fact* f = find_fact(s.id);
    if (f->st.k != FactStmt::K::Mem) fail(fmt::format("fact {} is not a membership", s.id));
    if (!key_eq(f->st.s, m.set))
      fail(fmt::format("fact {} places its element in {}, the state holds {}", s.id,
                       show_expr(f->st.s), show_expr(m.set)));
    st.k = St::K::Concl;
    st.ca = m.origin;
    st.cb = f->st.a;
    st.cgens = {};
    st.ccomplete = true;
    return fmt::format("both lie in a singleton: {} = {}", show_expr(st.ca), show_expr(st.cb));
  }

  std::string exec_order(const Step& s) {
    EP e = subst(s.e1);
    if (!s.id.empty()) {
      const Fact* f = find_fact(s.id);
      if (f->st.k != FactStmt::K::OrderEq && f->st.k != FactStmt::K::OrderDiv)
        fail(fmt::format("fact {} is not an order fact", s.id));
      if (!key_eq(f->st.a, e))
        fail(fmt::format("fact {} is about {}", s.id, show_expr(f->st.a)));
      if (s.m % f->st.m != 0)
        fail(fmt::format("fact {} gives order {}, which does not divide {}", s.id, f->st.m, s.m));
    } else {
      GroupView v = view_for(e);
      std::string why;
      Tri t = order_div_in_group(full_ctx(), v, nf_of(e), s.m, &why);
      if (t != Tri::Yes) fail(fmt::format("order of {} does not resolve to a divisor of {}: {}",
                                          show_expr(e), s.m, why));
    }
    Fact f;
    f.id = fmt::format("{}#ord{}", sc.id, ++autolocal);
    f.st.k = FactStmt::K::OrderDiv;
    f.st.a = e;
    f.st.m = s.m;
    f.owner = sc.id;
    f.note = fmt::format("order step, line {}", s.line);
    locals.push_back(std::move(f));
    repile();
    return fmt::format("{} is annihilated by {}", show_expr(e), s.m);
  }

  std::string exec_group(const Step& s) {
    std::string why;
    auto v = group_view(full_ctx(), s.sp, static_cast<int>(s.m), &why);
    if (!v) fail(why);
    if (v->partial) fail("the presentation is partial");
    if (v->cands.size() != 1)
      fail(fmt::format("{} presentation candidates remain; a marker is still unresolved",
                       v->cands.size()));
    std::vector<i64> got;
    for (i64 o : v->cands[0].ab.orders)
      if (o != 1) got.push_back(o);
    std::vector<i64> want = s.invs;
    std::sort(got.begin(), got.end());
    std::sort(want.begin(), want.end());
    if (got != want)
      fail(fmt::format("invariants are {}, script claims {}", fmt::join(got, "+"),
                       fmt::join(want, "+")));
    return fmt::format("pi({}, {}) = {}", s.m, show_space(s.sp), fmt::join(got, "+"));
  }

  /**** conclusions ****/

  bool claim_matches_target(const FactStmt& claim, const std::string& id) const {
    if (const RelRec* r = cat.rel(id)) {
      if (claim.k != FactStmt::K::Eq) return false;
      return (key_eq(claim.a, r->lhs) && key_eq(claim.b, r->rhs)) ||
             (key_eq(claim.a, r->rhs) && key_eq(claim.b, r->lhs));
    }
    if (const FactRec* f = cat.fact(id)) {
      const FactStmt& w = f->st;
      if (claim.k != w.k || claim.m != w.m || claim.mod != w.mod || claim.sym != w.sym ||
          claim.map != w.map)
        return false;
      for (auto [x, y] : {std::pair{claim.a, w.a}, {claim.b, w.b}, {claim.s, w.s}})
        if (static_cast<bool>(x) != static_cast<bool>(y) || (x && !key_eq(x, y))) return false;
      return true;
    }
    return false;
  }

  void check_span_zero(const GroupView& v, const std::vector<EP>& gens) const {
    for (const EP& g : gens) {
      std::string why;
      if (zero_in_group(full_ctx(), v, nf_of(g), &why) != Tri::Yes)
        fail(fmt::format("the residual generator {} is not zero: {}", show_expr(g), why));
    }
  }

  void check_span_inside(const GroupView& v, const std::vector<EP>& gens,
                         const std::vector<EP>& target, bool target_complete) const {
    for (const EP& g : gens) {
      std::string why;
      if (mem_span_in_group(full_ctx(), v, nf_of(g), target, target_complete, &why) != Tri::Yes)
        fail(fmt::format("the residual generator {} is not inside the claimed span: {}",
                         show_expr(g), why));
    }
  }

  void conclude_chain(const FactStmt& claim) {
    if (claim.k != FactStmt::K::Eq && claim.k != FactStmt::K::CosetEq)
      fail("a chain only proves equalities");
    bool fwd = engine_eq(claim.a, st.start) && engine_eq(claim.b, st.cur);
    bool bwd = !fwd && engine_eq(claim.a, st.cur) && engine_eq(claim.b, st.start);
    if (!fwd && !bwd)
      fail(fmt::format("the chain proves {} = {}, not the claim", show_expr(st.start),
                       show_expr(st.cur)));
  }

  void conclude_mem(const FactStmt& claim) {
    const MemSt& m = st.mem;
    if (m.meets) fail("a pinned part concludes through meet");
    switch (claim.k) {
      case FactStmt::K::Mem:
        if (!key_eq(claim.a, m.origin))
          fail(fmt::format("the state tracks {}, not {}", show_expr(m.origin), show_expr(claim.a)));
        if (key_eq(claim.s, m.set)) return;
        if (m.cst && m.cst->rep && key_eq(claim.s, m.cst->rep) && m.cst->gens.empty()) return;
        fail(fmt::format("the tracked container is {}, not {}", show_expr(m.set),
                         show_expr(claim.s)));
      case FactStmt::K::SubLeq:
        if (key_eq(claim.a, m.origin) && key_eq(claim.b, m.set)) return;
        fail("the containment does not match the tracked state");
      case FactStmt::K::Eq: {
        EP self, other;
        if (key_eq(claim.a, m.origin)) self = claim.a, other = claim.b;
        else if (key_eq(claim.b, m.origin)) self = claim.b, other = claim.a;
        else fail(fmt::format("neither side is the tracked {}", show_expr(m.origin)));
        if (!m.cst && !is_setvalued(m.set) && key_eq(other, m.set)) return;
        if (!m.cst) fail("no coset form yet; use rep, indet or an equality fact first");
        if (!m.cst->complete) fail("the coset form is partial; equality is not certified");
        if (key_eq(m.cst->rep, other) && m.cst->gens.empty()) return;
        GroupView v = view_from({other, m.cst->rep, m.origin});
        std::string why;
        if (eq_in_group(full_ctx(), v, nf_of(m.cst->rep), nf_of(other), &why) != Tri::Yes)
          fail(fmt::format("{} does not resolve to {}: {}", show_expr(m.cst->rep),
                           show_expr(other), why));
        check_span_zero(v, m.cst->gens);
        return;
      }
      case FactStmt::K::CosetEq: {
        if (!key_eq(claim.a, m.origin) && !key_eq(claim.b, m.origin))
          fail(fmt::format("neither side is the tracked {}", show_expr(m.origin)));
        EP other = key_eq(claim.a, m.origin) ? claim.b : claim.a;
        if (!m.cst) fail("no coset form yet; use rep, indet or an equality fact first");
        if (!m.cst->complete) fail("the coset form is partial; congruence is not certified");
        bool tcomp = true;
        std::vector<EP> target = span_of(claim.s, &tcomp);
        GroupView v = view_from({m.cst->rep, other, m.origin});
        std::string why;
        if (coseteq_in_group(full_ctx(), v, nf_of(m.cst->rep), nf_of(other), target, tcomp,
                             &why) != Tri::Yes)
          fail(fmt::format("{} is not congruent to {} modulo the claimed span: {}",
                           show_expr(m.cst->rep), show_expr(other), why));
        check_span_inside(v, m.cst->gens, target, tcomp);
        return;
      }
      default: fail("that claim shape cannot come from a membership");
    }
  }

  void conclude_concl(const FactStmt& claim) {
    if (claim.k != FactStmt::K::Eq && claim.k != FactStmt::K::CosetEq)
      fail("a congruence only proves equalities");
    if (!st.ccomplete) fail("the congruence span is partial; nothing can be claimed");
    bool fwd = engine_eq(claim.a, st.ca) && engine_eq(claim.b, st.cb);
    bool bwd = !fwd && engine_eq(claim.a, st.cb) && engine_eq(claim.b, st.ca);
    if (!fwd && !bwd)
      fail(fmt::format("the proven congruence relates {} and {}", show_expr(st.ca),
                       show_expr(st.cb)));
    if (st.cgens.empty()) return;
    GroupView v = view_from({st.ca, st.cb, st.cgens[0]});
    if (claim.k == FactStmt::K::Eq) {
      check_span_zero(v, st.cgens);
    } else {
      bool tcomp = true;
      std::vector<EP> target = span_of(claim.s, &tcomp);
      check_span_inside(v, st.cgens, target, tcomp);
    }
  }

  void conclude_resolve(const FactStmt& claim) {
    std::string why;
    switch (claim.k) {
      case FactStmt::K::Eq: {
        if (nf_equal(nf_of(claim.a), nf_of(claim.b))) return;
        GroupView v = view_from({claim.a, claim.b});
        if (eq_in_group(full_ctx(), v, nf_of(claim.a), nf_of(claim.b), &why) == Tri::Yes) return;
        fail(fmt::format("the sides do not resolve equal: {}", why));
      }
      case FactStmt::K::CosetEq: {
        bool comp = true;
        std::vector<EP> target = span_of(claim.s, &comp);
        GroupView v = view_from({claim.a, claim.b, target.empty() ? EP{} : target[0]});
        if (coseteq_in_group(full_ctx(), v, nf_of(claim.a), nf_of(claim.b), target, comp, &why) ==
            Tri::Yes)
          return;
        fail(fmt::format("the congruence does not resolve: {}", why));
      }
      case FactStmt::K::Mem: {
        bool comp = true;
        std::vector<EP> target = span_of(claim.s, &comp);
        GroupView v = view_from({claim.a, target.empty() ? EP{} : target[0]});
        if (mem_span_in_group(full_ctx(), v, nf_of(claim.a), target, comp, &why) == Tri::Yes)
          return;
        fail(fmt::format("the membership does not resolve: {}", why));
      }
      case FactStmt::K::OrderEq: {
        GroupView v = view_for(claim.a);
        if (order_eq_in_group(full_ctx(), v, nf_of(claim.a), claim.m, &why) == Tri::Yes) return;
        fail(fmt::format("the order does not resolve: {}", why));
      }
      case FactStmt::K::OrderDiv: {
        GroupView v = view_for(claim.a);
        if (order_div_in_group(full_ctx(), v, nf_of(claim.a), claim.m, &why) == Tri::Yes) return;
        fail(fmt::format("the order bound does not resolve: {}", why));
      }
      default: fail("that claim shape needs a prepared state");
    }
  }

  std::string exec_conclude(const Step& s) {
    FactStmt claim = subst(*s.stmt);
    std::string staterr;
    bool done = false;
    try {
      switch (st.k) {
        case St::K::Chain: conclude_chain(claim); break;
        case St::K::Mem: conclude_mem(claim); break;
        case St::K::Concl: conclude_concl(claim); break;
        default: fail(fmt::format("{} cannot justify a conclusion", state_name(st.k)));
      }
      done = true;
    } catch (const StepFail& e) {
      staterr = e.msg;
    }
    if (!done) {
      try {
        conclude_resolve(claim);
      } catch (const StepFail& e) {
        fail(fmt::format("{}; direct resolution also failed: {}", staterr, e.msg));
      }
    }

    std::vector<std::string> hits;
    for (auto it = unproved.begin(); it != unproved.end();) {
      if (claim_matches_target(claim, *it)) {
        hits.push_back(*it);
        if (cat.rel(*it)) out.proved_rels.push_back(*it);
        Fact f;
        f.id = *it;
        f.st = claim;
        f.owner = sc.id;
        f.note = fmt::format("concluded at line {}", s.line);
        out.produced.push_back(std::move(f));
        it = unproved.erase(it);
      } else {
        ++it;
      }
    }

    Fact loc;
    loc.id = s.id.empty() ? fmt::format("{}#{}", sc.id, ++autolocal) : s.id;
    if (!s.id.empty()) {
      for (const Fact* f : vis.facts)
        if (f->id == loc.id) fail(fmt::format("name {} is already a visible fact", loc.id));
      for (const Fact& f : locals)
        if (f.id == loc.id) fail(fmt::format("name {} is already used in this script", loc.id));
    }
    loc.st = claim;
    loc.owner = sc.id;
    loc.note = fmt::format("line {}", s.line);
    locals.push_back(std::move(loc));
    repile();
    if (hits.empty()) return "holds (local)";
    return fmt::format("holds; settles {}", fmt::join(hits, ", "));
  }
};

std::string Runner::exec(const Step& s) {
  switch (s.k) {
    case Step::K::Let: return exec_let(s);
    case Step::K::Focus: return exec_focus(s);
    case Step::K::Gives: return exec_gives(s);
    case Step::K::Normalize: return exec_normalize(s);
    case Step::K::Rewrite:
      if (s.m >= 0) {
        Step inner = s;
        inner.m = -1;
        Step at;
        at.k = Step::K::At;
        at.m = s.m;
        at.line = s.line;
        at.inner.push_back(std::move(inner));
        return exec_at(at);
      }
      return exec_rewrite(s);
    case Step::K::EqFact:
      if (s.m >= 0) {
        Step inner = s;
        inner.m = -1;
        Step at;
        at.k = Step::K::At;
        at.m = s.m;
        at.line = s.line;
        at.inner.push_back(std::move(inner));
        return exec_at(at);
      }
      return exec_eqfact(s);
    case Step::K::Congr: return exec_congr(s);
    case Step::K::Mono: return exec_mono(s);
    case Step::K::ExactKer: return exec_exactker(s);
    case Step::K::Wd: return exec_wd(s);
    case Step::K::Indet: return exec_indet(s);
    case Step::K::Mem: return exec_mem(s);
    case Step::K::Take: return exec_take(s);
    case Step::K::LComp: return exec_lcomp(s);
    case Step::K::RComp: return exec_rcomp(s);
    case Step::K::ShuffleL: return exec_shuffle_l(s);
    case Step::K::ShuffleR: return exec_shuffle_r(s);
    case Step::K::AbsorbL: return exec_absorb_l(s);
    case Step::K::AbsorbR: return exec_absorb_r(s);
    case Step::K::Slide: return exec_slide(s);
    case Step::K::Scalar: return exec_scalar(s);
    case Step::K::Suspend: return exec_suspend(s);
    case Step::K::Relax: return exec_relax(s);
    case Step::K::Subeq: return exec_subeq(s);
    case Step::K::Split: return exec_split(s);
    case Step::K::EntryNf: return exec_entry(s, false);
    case Step::K::EntryRw: return exec_entry(s, true);
    case Step::K::Jacobi: return exec_jacobi(s);
    case Step::K::At: return exec_at(s);
    case Step::K::Extract: return exec_extract(s);
    case Step::K::Rep: return exec_rep(s);
    case Step::K::Meet: return exec_meet(s);
    case Step::K::Same: return exec_same(s);
    case Step::K::Order: return exec_order(s);
    case Step::K::Group: return exec_group(s);
    case Step::K::Cases: fail("cases is handled by the driver loop");
    case Step::K::Conclude: return exec_conclude(s);
  }
  fail("unhandled step");
}

/**** the run loop, with case splitting ****/

struct Driver {
  static RunResult run(const Script& sc, const Catalog& cat, const Visibility& vis) {
    try {
      Runner rn(sc, cat, vis);  // throws on a bad proves target
      try {
        run_from(rn, 0);
      } catch (StepFail&) {
        // the failing step already recorded line and message
      }
      return std::move(rn.out);
    } catch (StepFail& e) {
      RunResult r;
      r.ok = false;
      r.error = e.msg;
      return r;
    }
  }

  static void run_from(Runner& rn, size_t from) {
    for (size_t i = from; i < rn.sc.steps.size(); ++i) {
      const Step& s = rn.sc.steps[i];
      if (s.k == Step::K::Cases) {
        run_cases(rn, i);
        return;
      }
      step_checked(rn, s);
    }
    finish(rn);
  }

  static void step_checked(Runner& rn, const Step& s) {
    try {
      std::string note = rn.exec(s);
      rn.out.log.push_back(StepLog{s.line, s.text, std::move(note)});
    } catch (StepFail& e) {
      rn.out.ok = false;
      rn.out.error = e.msg;
      rn.out.fail_line = s.line;
      throw;
    }
  }

  static void run_cases(Runner& rn, size_t at) {
    const Step& cs = rn.sc.steps[at];
    if (rn.cong.cong.count(cs.id))
      fail_at(rn, cs, fmt::format("unknown '{}' is already pinned", cs.id));
    size_t base = rn.out.log.size();
    std::vector<Runner> branches;
    for (i64 v : cs.invs) {
      Runner br = rn;
      br.repile();  // the copied piles still point into the original locals
      br.cong.cong[cs.id] = CongEnv::Rule{0, v};
      br.out.log.push_back(
          StepLog{cs.line, cs.text, fmt::format("assuming {} = {}", cs.id, v)});
      for (size_t i = at + 1; i < br.sc.steps.size(); ++i) {
        const Step& s = br.sc.steps[i];
        if (s.k == Step::K::Cases) fail_at(rn, s, "cases does not nest");
        try {
          std::string note = br.exec(s);
          br.out.log.push_back(StepLog{s.line, s.text, std::move(note)});
        } catch (StepFail& e) {
          rn.out.ok = false;
          rn.out.error = fmt::format("case {} = {}: {}", cs.id, v, e.msg);
          rn.out.fail_line = s.line;
          throw;
        }
      }
      try {
        finish(br);
      } catch (StepFail& e) {
        rn.out.ok = false;
        rn.out.error = fmt::format("case {} = {}: {}", cs.id, v, e.msg);
        rn.out.fail_line = cs.line;
        throw;
      }
      branches.push_back(std::move(br));
    }
    // every branch must conclude the same statements, or the case split
    // proves nothing about the unknown-free claims
    auto sig = [](const Runner& r) {
      std::vector<std::string> v;
      for (const Fact& f : r.locals)
        if (f.note.rfind("line", 0) == 0) v.push_back(show_stmt(f.st));
      std::sort(v.begin(), v.end());
      return v;
    };
    for (size_t i = 1; i < branches.size(); ++i)
      if (sig(branches[i]) != sig(branches[0]))
        fail_at(rn, cs, "the branches conclude different statements");
    rn.out.log = std::move(branches[0].out.log);
    for (size_t b = 1; b < branches.size(); ++b)
      for (size_t i = base; i < branches[b].out.log.size(); ++i)
        rn.out.log.push_back(branches[b].out.log[i]);
    rn.out.produced = std::move(branches[0].out.produced);
    rn.out.proved_rels = std::move(branches[0].out.proved_rels);
    rn.unproved.clear();
    rn.out.ok = true;
  }

  [[noreturn]] static void fail_at(Runner& rn, const Step& s, std::string msg) {
    rn.out.ok = false;
    rn.out.error = msg;
    rn.out.fail_line = s.line;
    throw StepFail{std::move(msg)};
  }

  static void finish(Runner& rn) {
    if (!rn.unproved.empty()) {
      std::vector<std::string> left(rn.unproved.begin(), rn.unproved.end());
      rn.out.ok = false;
      rn.out.error = fmt::format("declared but never concluded: {}", fmt::join(left, ", "));
      rn.out.fail_line = 0;
      throw StepFail{rn.out.error};
    }
    rn.out.ok = true;
  }
};

}  // namespace

RunResult run_script(const Script& sc, const Catalog& cat, const Visibility& vis) {
  return Driver::run(sc, cat, vis);
}

}  // namespace stem31
