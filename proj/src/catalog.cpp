#include "stem31/catalog.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>

namespace stem31 {

const GroupRec* Catalog::group(Space x, int k) const {
  auto it = group_index.find({x, k});
  return it == group_index.end() ? nullptr : &groups[it->second];
}

const RelRec* Catalog::rel(const std::string& id) const {
  auto it = rel_index.find(id);
  return it == rel_index.end() ? nullptr : &rels[it->second];
}

const FactRec* Catalog::fact(const std::string& id) const {
  auto it = fact_index.find(id);
  return it == fact_index.end() ? nullptr : &facts[it->second];
}

std::optional<ClassInfo> class_info(const Catalog& cat, const std::string& name, int inst) {
  auto it = cat.classes.find({name, inst});
  if (it != cat.classes.end())
    return ClassInfo{it->second.deg, it->second.order, true, &it->second, 0};
  auto fit = cat.families.find(name);
  if (fit == cat.families.end() || fit->second.empty()) return std::nullopt;
  int top = *fit->second.rbegin();
  if (inst <= top) return std::nullopt;  // gaps below the top are never implied
  const ClassRec& t = cat.classes.at({name, top});
  if (!t.susp_of) return std::nullopt;  // the family does not suspend onward
  int s = inst - top;
  return ClassInfo{Deg{suspend(t.deg.dom, s), suspend(t.deg.cod, s)}, t.order, false, &t, s};
}

bool suspends_to(const Catalog& cat, const std::string& name, int i, int j) {
  if (i > j) return false;
  if (!class_info(cat, name, i)) return false;
  for (int t = i + 1; t <= j; ++t) {
    auto it = cat.classes.find({name, t});
    if (it != cat.classes.end()) {
      if (!it->second.susp_of || *it->second.susp_of != std::make_pair(name, t - 1)) return false;
    } else if (!class_info(cat, name, t)) {
      return false;
    }
  }
  return true;
}

/**** degrees ****/

namespace {

DegRes ok(Deg d) { return DegRes{DegRes::K::Ok, d, {}}; }
DegRes any() { return DegRes{DegRes::K::Any, {}, {}}; }
DegRes err(std::string m) { return DegRes{DegRes::K::Err, {}, std::move(m)}; }

}  // namespace

DegRes deg_of(const Catalog& cat, const EP& e) {
  switch (e->k) {
    case Expr::K::Zero: return any();
    case Expr::K::Iota: return ok(Deg{sphere(e->n), sphere(e->n)});
    case Expr::K::Cls: {
      if (e->inst == kBareInst)
        return err(fmt::format("unresolved name '{}' (script variable outside a script?)", e->name));
      auto ci = class_info(cat, e->name, e->inst);
      if (!ci) return err(fmt::format("unknown class {}({})", e->name, e->inst));
      return ok(ci->deg);
    }
    case Expr::K::Susp: {
      DegRes r = deg_of(cat, e->sub[0]);
      if (r.k != DegRes::K::Ok) return r;
      if (r.d.dom.k == Space::K::MP || r.d.cod.k == Space::K::MP)
        return err("structural E does not apply to pair groups (use relE facts)");
      return ok(Deg{suspend(r.d.dom, e->n), suspend(r.d.cod, e->n)});
    }
    case Expr::K::Hopf: {
      DegRes r = deg_of(cat, e->sub[0]);
      if (r.k != DegRes::K::Ok) return r;
      if (r.d.dom.k != Space::K::S || r.d.cod.k != Space::K::S)
        return err("H needs a sphere-to-sphere class");
      return ok(Deg{r.d.dom, sphere(2 * r.d.cod.n - 1)});
    }
    case Expr::K::PMap: {
      DegRes r = deg_of(cat, e->sub[0]);
      if (r.k != DegRes::K::Ok) return r;
      if (r.d.dom.k != Space::K::S || r.d.cod.k != Space::K::S)
        return err("P needs a sphere-to-sphere class");
      if (r.d.cod.n % 2 == 0)
        return err(fmt::format("P needs an odd target sphere, got S{}", r.d.cod.n));
      return ok(Deg{sphere(r.d.dom.n - 2), sphere((r.d.cod.n - 1) / 2)});
    }
    case Expr::K::Comp: {
      std::optional<Deg> cur;  // degree of the suffix consumed so far
      for (auto it = e->sub.rbegin(); it != e->sub.rend(); ++it) {
        DegRes r = deg_of(cat, *it);
        if (r.k == DegRes::K::Err) return r;
        if (r.k == DegRes::K::Any) return any();  // a zero factor swallows the chain
        if (cur) {
          if (r.d.dom != cur->cod)
            return err(fmt::format("composition mismatch: {} then a map out of {}",
                                   show_space(cur->cod), show_space(r.d.dom)));
          cur = Deg{cur->dom, r.d.cod};
        } else {
          cur = r.d;
        }
      }
      return cur ? ok(*cur) : any();
    }
    case Expr::K::Sum:
    case Expr::K::Span: {
      std::optional<Deg> cur;
      for (auto& t : e->sub) {
        DegRes r = deg_of(cat, t);
        if (r.k == DegRes::K::Err) return r;
        if (r.k == DegRes::K::Any) continue;
        if (cur && r.d != *cur)
          return err(fmt::format("mixed degrees in a sum: {} vs {}", show_deg(*cur),
                                 show_deg(r.d)));
        cur = r.d;
      }
      return cur ? ok(*cur) : any();
    }
    case Expr::K::Scal: return deg_of(cat, e->sub[0]);
    case Expr::K::Wh: {
      DegRes a = deg_of(cat, e->sub[0]), b = deg_of(cat, e->sub[1]);
      if (a.k == DegRes::K::Err) return a;
      if (b.k == DegRes::K::Err) return b;
      if (a.k == DegRes::K::Any || b.k == DegRes::K::Any)
        return err("Whitehead product entries need concrete degrees");
      if (a.d.cod != b.d.cod) return err("Whitehead product entries live over different spaces");
      if (a.d.dom.k != Space::K::S || b.d.dom.k != Space::K::S)
        return err("Whitehead product entries must be sphere classes");
      return ok(Deg{sphere(a.d.dom.n + b.d.dom.n - 1), a.d.cod});
    }
    case Expr::K::Brk: {
      DegRes a = deg_of(cat, e->sub[0]), b = deg_of(cat, e->sub[1]), c = deg_of(cat, e->sub[2]);
      for (DegRes* r : {&a, &b, &c}) {
        if (r->k == DegRes::K::Err) return *r;
        if (r->k == DegRes::K::Any) return err("bracket entries need concrete degrees");
      }
      if (a.d.dom != b.d.cod || b.d.dom != c.d.cod)
        return err("bracket entries do not compose");
      if (c.d.dom.k != Space::K::S) return err("bracket third entry must come from a sphere");
      return ok(Deg{sphere(c.d.dom.n + 1), a.d.cod});
    }
    case Expr::K::PiSet: return ok(pi_deg(e->n, e->sp));
  }
  return err("unhandled expression kind");
}

std::optional<std::string> deg_mismatch(const Catalog& cat, const EP& a, const EP& b) {
  DegRes ra = deg_of(cat, a), rb = deg_of(cat, b);
  if (ra.k == DegRes::K::Err) return ra.err;
  if (rb.k == DegRes::K::Err) return rb.err;
  if (ra.k == DegRes::K::Any || rb.k == DegRes::K::Any) return std::nullopt;
  if (ra.d != rb.d)
    return fmt::format("degree mismatch: {} vs {}", show_deg(ra.d), show_deg(rb.d));
  return std::nullopt;
}

/**** parsing ****/

namespace {

struct CatParser {
  Catalog cat;
  std::vector<std::string> errors;
  std::string filename;
  int line = 0;

  void error(const std::string& msg) {
    errors.push_back(fmt::format("{}:{}: {}", filename, line, msg));
  }

  std::string read_id(Parser& p) {
    std::string id;
    while (!p.done() && !p.is_punct(":")) id += p.next().text;
    p.expect_punct(":");
    if (id.empty()) p.fail("empty record id");
    return id;
  }

  std::string read_src(Parser& p) {
    if (!p.is_name("src")) p.fail("expected src \"...\"");
    p.next();
    if (p.peek().k != Tok::K::Str) p.fail("expected a quoted citation after src");
    return p.next().text;
  }

  Deg parse_degree(Parser& p) {
    std::string head = p.expect_name();
    if (head == "pi") {
      p.expect_punct("(");
      int k = static_cast<int>(p.expect_int());
      p.expect_punct(",");
      std::string sp = p.expect_name();
      auto x = parse_space(sp);
      if (!x) p.fail(fmt::format("bad space '{}'", sp));
      p.expect_punct(")");
      return pi_deg(k, *x);
    }
    if (head == "hom") {
      p.expect_punct("(");
      auto a = parse_space(p.expect_name());
      p.expect_punct(",");
      auto b = parse_space(p.expect_name());
      p.expect_punct(")");
      if (!a || !b) p.fail("bad space in hom(...)");
      return Deg{*a, *b};
    }
    p.fail("expected pi(...) or hom(...)");
  }

  void parse_class(Parser& p) {
    ClassRec r;
    r.line = line;
    r.name = p.expect_name();
    p.expect_punct("(");
    r.inst = static_cast<int>(p.expect_int());
    p.expect_punct(")");
    p.expect_punct(":");
    r.deg = parse_degree(p);
    if (!p.is_name("order")) p.fail("expected order");
    p.next();
    if (p.is_punct("?")) {
      p.next();
      r.order = std::nullopt;
    } else {
      r.order = p.expect_int();
    }
    if (p.is_name("susp_of")) {
      p.next();
      std::string n = p.expect_name();
      p.expect_punct("(");
      int i = static_cast<int>(p.expect_int());
      p.expect_punct(")");
      r.susp_of = {n, i};
    }
    r.src = read_src(p);
    auto key = std::make_pair(r.name, r.inst);
    if (cat.classes.count(key)) {
      error(fmt::format("duplicate class {}({})", r.name, r.inst));
      return;
    }
    cat.classes[key] = r;
    cat.families[r.name].insert(r.inst);
  }

  void parse_group(Parser& p) {
    GroupRec g;
    g.line = line;
    auto x = parse_space(p.expect_name());
    if (!x) p.fail("bad space");
    g.space = *x;
    g.k = static_cast<int>(p.expect_int());
    p.expect_punct("=");
    bool first = true;
    for (;;) {
      if (!first) {
        if (!p.is_punct("+")) break;
        p.next();
      }
      first = false;
      if (p.is_punct("..")) {  // trailing "..." partial marker
        p.next();
        if (p.is_punct(".")) p.next();
        g.partial = true;
        break;
      }
      if (p.peek().k == Tok::K::Int) {
        i64 m = p.expect_int();
        if (m == 0 && !p.is_punct("{")) {
          if (!g.summands.empty()) p.fail("a 0 summand must stand alone");
          break;  // the trivial group
        }
        p.expect_punct("{");
        Summand s;
        s.k = Summand::K::Num;
        s.order = m;
        s.gen = p.parse_expr();
        p.expect_punct("}");
        g.summands.push_back(std::move(s));
      } else if (p.is_name("G2")) {
        p.next();
        p.expect_punct("{");
        Summand s;
        s.k = Summand::K::G2;
        s.gen = p.parse_expr();
        p.expect_punct(",");
        s.gen2 = p.parse_expr();
        p.expect_punct("}");
        g.summands.push_back(std::move(s));
      } else if (p.is_name("G")) {
        p.next();
        p.expect_punct("{");
        Summand s;
        s.k = Summand::K::G1;
        s.gen = p.parse_expr();
        p.expect_punct("}");
        g.summands.push_back(std::move(s));
      } else {
        p.fail("expected a summand");
      }
    }
    g.src = read_src(p);
    auto key = std::make_pair(g.space, g.k);
    if (cat.group_index.count(key)) {
      error(fmt::format("duplicate group {} {}", show_space(g.space), g.k));
      return;
    }
    cat.group_index[key] = cat.groups.size();
    cat.groups.push_back(std::move(g));
  }

  void parse_rel(Parser& p) {
    RelRec r;
    r.line = line;
    r.id = read_id(p);
    r.lhs = p.parse_expr();
    p.expect_punct("=>");
    r.rhs = p.parse_expr();
    if (p.is_name("when")) {
      p.next();
      r.conds.push_back(parse_stmt(p));
      while (p.is_punct(",")) {
        p.next();
        r.conds.push_back(parse_stmt(p));
      }
    }
    r.src = read_src(p);
    if (cat.rel_index.count(r.id)) {
      error(fmt::format("duplicate rel id {}", r.id));
      return;
    }
    cat.rel_index[r.id] = cat.rels.size();
    cat.rels.push_back(std::move(r));
  }

  void parse_bracket(Parser& p) {
    FactRec r;
    r.line = line;
    r.from_bracket = true;
    r.id = read_id(p);
    EP lhs = p.parse_expr();
    std::string relname = p.expect_name();
    EP rhs = p.parse_expr();
    if (relname == "eq") {
      r.st = FactStmt{FactStmt::K::Eq, lhs, rhs, nullptr, {}, 0, 0, ""};
    } else if (relname == "ni") {
      r.st = FactStmt{FactStmt::K::Mem, rhs, nullptr, lhs, {}, 0, 0, ""};
    } else if (relname == "sub") {
      r.st = FactStmt{FactStmt::K::SubLeq, lhs, rhs, nullptr, {}, 0, 0, ""};
    } else {
      p.fail("expected eq, ni or sub in a bracket record");
    }
    r.src = read_src(p);
    add_fact(std::move(r));
  }

  void parse_fact(Parser& p) {
    FactRec r;
    r.line = line;
    r.id = read_id(p);
    r.st = parse_stmt(p);
    r.src = read_src(p);
    add_fact(std::move(r));
  }

  void add_fact(FactRec r) {
    if (cat.fact_index.count(r.id)) {
      error(fmt::format("duplicate fact id {}", r.id));
      return;
    }
    cat.fact_index[r.id] = cat.facts.size();
    cat.facts.push_back(std::move(r));
  }

  void parse_line(const std::string& text) {
    Parser p(text);
    if (p.done()) return;
    std::string kind = p.expect_name();
    if (kind == "space") {
      std::string tok = p.expect_name();
      if (!parse_space(tok)) p.fail(fmt::format("bad space token '{}'", tok));
      cat.spaces.push_back(tok);
    } else if (kind == "class") {
      parse_class(p);
    } else if (kind == "group") {
      parse_group(p);
    } else if (kind == "rel") {
      parse_rel(p);
    } else if (kind == "bracket") {
      parse_bracket(p);
    } else if (kind == "fact") {
      parse_fact(p);
    } else {
      p.fail(fmt::format("unknown record kind '{}'", kind));
    }
    if (!p.done()) p.fail("trailing input after record");
  }
};

// every class mentioned in an expression must resolve; bare names are banned
void check_expr_classes(const Catalog& cat, const EP& e, std::vector<std::string>& out,
                        const std::string& where) {
  if (e->k == Expr::K::Cls) {
    if (e->inst == kBareInst)
      out.push_back(fmt::format("{}: bare name '{}' is not allowed in the catalog", where, e->name));
    else if (!class_info(cat, e->name, e->inst))
      out.push_back(fmt::format("{}: unknown class {}({})", where, e->name, e->inst));
  }
  for (auto& s : e->sub) check_expr_classes(cat, s, out, where);
}

void integrity(Catalog& cat, std::vector<std::string>& errors, const std::string& filename) {
  auto where = [&](int line) { return fmt::format("{}:{}", filename, line); };

  for (auto& [key, c] : cat.classes) {
    if (c.susp_of) {
      auto base = cat.classes.find(*c.susp_of);
      if (base == cat.classes.end()) {
        errors.push_back(fmt::format("{}: susp_of target {}({}) not declared", where(c.line),
                                     c.susp_of->first, c.susp_of->second));
      } else {
        Deg want{suspend(base->second.deg.dom, 1), suspend(base->second.deg.cod, 1)};
        if (c.deg != want)
          errors.push_back(fmt::format("{}: {}({}) does not look like the suspension of {}({})",
                                       where(c.line), c.name, c.inst, c.susp_of->first,
                                       c.susp_of->second));
        if (c.order && base->second.order && *base->second.order != 0 &&
            (*c.order == 0 || *base->second.order % *c.order != 0))
          errors.push_back(
              fmt::format("{}: order of {}({}) must divide the order of its desuspension",
                          where(c.line), c.name, c.inst));
      }
    }
  }

  for (auto& g : cat.groups) {
    for (auto& s : g.summands) {
      for (const EP* gen : {&s.gen, &s.gen2}) {
        if (!*gen) continue;
        check_expr_classes(cat, *gen, errors, where(g.line));
        DegRes r = deg_of(cat, *gen);
        if (r.k == DegRes::K::Err)
          errors.push_back(fmt::format("{}: {}", where(g.line), r.err));
        else if (r.k == DegRes::K::Ok && r.d != pi_deg(g.k, g.space))
          errors.push_back(fmt::format("{}: generator {} has degree {}, group wants {}",
                                       where(g.line), show_expr(*gen), show_deg(r.d),
                                       show_deg(pi_deg(g.k, g.space))));
      }
      if (s.k == Summand::K::Num && s.order < 0)
        errors.push_back(fmt::format("{}: negative summand order", where(g.line)));
    }
  }

  for (auto& r : cat.rels) {
    check_expr_classes(cat, r.lhs, errors, where(r.line));
    check_expr_classes(cat, r.rhs, errors, where(r.line));
    if (auto m = deg_mismatch(cat, r.lhs, r.rhs))
      errors.push_back(fmt::format("{}: rel {}: {}", where(r.line), r.id, *m));
  }

  for (auto& f : cat.facts) {
    for (const EP* e : {&f.st.a, &f.st.b, &f.st.s})
      if (*e) check_expr_classes(cat, *e, errors, where(f.line));
    std::optional<std::string> m;
    switch (f.st.k) {
      case FactStmt::K::Eq: m = deg_mismatch(cat, f.st.a, f.st.b); break;
      case FactStmt::K::CosetEq:
        m = deg_mismatch(cat, f.st.a, f.st.b);
        if (!m) m = deg_mismatch(cat, f.st.a, f.st.s);
        break;
      case FactStmt::K::Mem: m = deg_mismatch(cat, f.st.a, f.st.s); break;
      case FactStmt::K::SubLeq: m = deg_mismatch(cat, f.st.a, f.st.b); break;
      default: break;
    }
    if (m) errors.push_back(fmt::format("{}: fact {}: {}", where(f.line), f.id, *m));
  }

  std::sort(cat.spaces.begin(), cat.spaces.end());
  cat.spaces.erase(std::unique(cat.spaces.begin(), cat.spaces.end()), cat.spaces.end());
}

}  // namespace

Catalog parse_catalog(const std::string& text, const std::string& filename) {
  CatParser cp;
  cp.filename = filename;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    ++cp.line;
    try {
      cp.parse_line(line);
    } catch (const ParseError& e) {
      cp.error(fmt::format("{} (at column {})", e.msg, e.pos + 1));
    }
  }
  integrity(cp.cat, cp.errors, filename);
  if (!cp.errors.empty()) throw LoadError{fmt::to_string(fmt::join(cp.errors, "\n"))};
  return std::move(cp.cat);
}

Catalog load_catalog(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError{fmt::format("cannot open catalog '{}'", path)};
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_catalog(ss.str(), path);
}

/**** serialization ****/

namespace {

std::string show_degree(const Deg& d) {
  if (d.dom.k == Space::K::S)
    return fmt::format("pi({}, {})", d.dom.n, show_space(d.cod));
  return fmt::format("hom({}, {})", show_space(d.dom), show_space(d.cod));
}

}  // namespace

std::string show_catalog(const Catalog& cat) {
  std::string out;
  for (auto& s : cat.spaces) out += fmt::format("space {}\n", s);
  for (auto& [key, c] : cat.classes) {
    out += fmt::format("class {}({}) : {} order {}", c.name, c.inst, show_degree(c.deg),
                       c.order ? std::to_string(*c.order) : "?");
    if (c.susp_of) out += fmt::format(" susp_of {}({})", c.susp_of->first, c.susp_of->second);
    out += fmt::format(" src \"{}\"\n", c.src);
  }
  std::vector<const GroupRec*> gs;
  for (auto& g : cat.groups) gs.push_back(&g);
  std::sort(gs.begin(), gs.end(), [](const GroupRec* a, const GroupRec* b) {
    return std::tie(a->space, a->k) < std::tie(b->space, b->k);
  });
  for (const GroupRec* g : gs) {
    out += fmt::format("group {} {} =", show_space(g->space), g->k);
    if (g->summands.empty() && !g->partial) out += " 0";
    bool first = true;
    for (auto& s : g->summands) {
      out += first ? " " : " + ";
      first = false;
      switch (s.k) {
        case Summand::K::Num: out += fmt::format("{}{{{}}}", s.order, show_expr(s.gen)); break;
        case Summand::K::G1: out += fmt::format("G{{{}}}", show_expr(s.gen)); break;
        case Summand::K::G2:
          out += fmt::format("G2{{{}, {}}}", show_expr(s.gen), show_expr(s.gen2));
          break;
      }
    }
    if (g->partial) out += first ? " ..." : " + ...";
    out += fmt::format(" src \"{}\"\n", g->src);
  }
  for (auto& r : cat.rels) {
    out += fmt::format("rel {} : {} => {}", r.id, show_expr(r.lhs), show_expr(r.rhs));
    if (!r.conds.empty()) {
      out += " when ";
      bool first = true;
      for (auto& c : r.conds) {
        if (!first) out += ", ";
        first = false;
        out += show_stmt(c);
      }
    }
    out += fmt::format(" src \"{}\"\n", r.src);
  }
  for (auto& f : cat.facts) {
    if (f.from_bracket) {
      if (f.st.k == FactStmt::K::Eq)
        out += fmt::format("bracket {} : {} eq {}", f.id, show_expr(f.st.a), show_expr(f.st.b));
      else if (f.st.k == FactStmt::K::Mem)
        out += fmt::format("bracket {} : {} ni {}", f.id, show_expr(f.st.s), show_expr(f.st.a));
      else
        out += fmt::format("bracket {} : {} sub {}", f.id, show_expr(f.st.a), show_expr(f.st.b));
    } else {
      out += fmt::format("fact {} : {}", f.id, show_stmt(f.st));
    }
    out += fmt::format(" src \"{}\"\n", f.src);
  }
  return out;
}

}  // namespace stem31
