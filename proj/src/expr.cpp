#include "stem31/expr.hpp"

#include <cctype>
#include <cstring>

#include <fmt/format.h>

namespace stem31 {

/**** constructors ****/

EP mk_zero() {
  static EP z = std::make_shared<Expr>();
  return z;
}

EP mk_iota(int n) {
  auto e = std::make_shared<Expr>();
  e->k = Expr::K::Iota;
  e->n = n;
  return e;
}

EP mk_cls(std::string name, int inst) {
  auto e = std::make_shared<Expr>();
  e->k = Expr::K::Cls;
  e->name = std::move(name);
  e->inst = inst;
  return e;
}

EP mk_susp(int t, EP x) {
  if (t == 0) return x;
  auto e = std::make_shared<Expr>();
  e->k = Expr::K::Susp;
  e->n = t;
  e->sub = {std::move(x)};
  return e;
}

EP mk_hopf(EP x) {
  auto e = std::make_shared<Expr>();
  e->k = Expr::K::Hopf;
  e->sub = {std::move(x)};
  return e;
}

EP mk_pmap(EP x) {
  auto e = std::make_shared<Expr>();
  e->k = Expr::K::PMap;
  e->sub = {std::move(x)};
  return e;
}

EP mk_comp(std::vector<EP> fs) {
  if (fs.size() == 1) return fs[0];
  auto e = std::make_shared<Expr>();
  e->k = Expr::K::Comp;
  e->sub = std::move(fs);
  return e;
}

EP mk_sum(std::vector<EP> ts) {
  if (ts.empty()) return mk_zero();
  if (ts.size() == 1) return ts[0];
  auto e = std::make_shared<Expr>();
  e->k = Expr::K::Sum;
  e->sub = std::move(ts);
  return e;
}

EP mk_scal(Coeff c, EP x) {
  if (c.is_one()) return x;
  auto e = std::make_shared<Expr>();
  e->k = Expr::K::Scal;
  e->c = std::move(c);
  e->sub = {std::move(x)};
  return e;
}

EP mk_wh(EP a, EP b) {
  auto e = std::make_shared<Expr>();
  e->k = Expr::K::Wh;
  e->sub = {std::move(a), std::move(b)};
  return e;
}

EP mk_brk(EP a, EP b, EP c, int t) {
  auto e = std::make_shared<Expr>();
  e->k = Expr::K::Brk;
  e->n = t;
  e->sub = {std::move(a), std::move(b), std::move(c)};
  return e;
}

EP mk_piset(int k, Space x) {
  auto e = std::make_shared<Expr>();
  e->k = Expr::K::PiSet;
  e->n = k;
  e->sp = x;
  return e;
}

EP mk_span(std::vector<EP> gens) {
  auto e = std::make_shared<Expr>();
  e->k = Expr::K::Span;
  e->sub = std::move(gens);
  return e;
}

bool is_setvalued(const EP& e) {
  switch (e->k) {
    case Expr::K::PiSet:
    case Expr::K::Span:
    case Expr::K::Brk: return true;
    default:
      for (auto& s : e->sub)
        if (is_setvalued(s)) return true;
      return false;
  }
}

bool expr_eq(const EP& a, const EP& b) {
  if (a.get() == b.get()) return true;
  if (a->k != b->k || a->n != b->n || a->inst != b->inst || a->name != b->name) return false;
  if (a->k == Expr::K::PiSet && a->sp != b->sp) return false;
  if (a->k == Expr::K::Scal && !(a->c == b->c)) return false;
  if (a->sub.size() != b->sub.size()) return false;
  for (size_t i = 0; i < a->sub.size(); ++i)
    if (!expr_eq(a->sub[i], b->sub[i])) return false;
  return true;
}

/**** printing ****/

namespace {

std::string latex_name(const std::string& name, int inst) {
  // peel decorations off the family name, then map the greek stem
  std::string base = name;
  auto ends = [&](const char* suf) {
    size_t l = std::strlen(suf);
    return base.size() > l && base.compare(base.size() - l, l, suf) == 0;
  };
  std::string primes, star;
  while (ends("'")) {
    primes += "'";
    base.pop_back();
  }
  if (ends("*")) {
    star = "^{*}";
    base.pop_back();
  }
  bool bar = false, tilde = false;
  if (ends("bar")) {
    bar = true;
    base.resize(base.size() - 3);
  } else if (ends("tilde")) {
    tilde = true;
    base.resize(base.size() - 5);
  }
  static const std::pair<const char*, const char*> greek[] = {
      {"alpha", "\\alpha"}, {"beta", "\\beta"},     {"delta", "\\delta"}, {"eps", "\\varepsilon"},
      {"eta", "\\eta"},     {"theta", "\\theta"},   {"kappa", "\\kappa"}, {"lambda", "\\lambda"},
      {"mu", "\\mu"},       {"nu", "\\nu"},         {"xi", "\\xi"},       {"rho", "\\rho"},
      {"sigma", "\\sigma"}, {"tau", "\\tau"},       {"phi", "\\varphi"},  {"chi", "\\chi"},
      {"omega", "\\omega"}, {"zeta", "\\zeta"},     {"iota", "\\iota"},
  };
  std::string head = base, tail;
  for (auto& [a, l] : greek)
    if (base.rfind(a, 0) == 0) {
      head = l;
      tail = base.substr(std::strlen(a));  // e.g. the 3 of mu3
      break;
    }
  std::string core = head;
  if (bar) core = "\\bar{" + core + "}";
  if (tilde) core = "\\tilde{" + core + "}";
  core += primes + star;
  std::string subs = tail.empty() ? std::to_string(inst) : tail + "," + std::to_string(inst);
  return core + "_{" + subs + "}";
}

struct Shower {
  Style st;

  std::string paren_term(const EP& e) {
    std::string s = show(e);
    if (e->k == Expr::K::Sum) return "(" + s + ")";
    return s;
  }

  std::string factor(const EP& e) {
    std::string s = show(e);
    if (e->k == Expr::K::Sum || e->k == Expr::K::Scal) return "(" + s + ")";
    return s;
  }

  std::string show(const EP& e) {
    bool tex = st == Style::Latex;
    switch (e->k) {
      case Expr::K::Zero: return "0";
      case Expr::K::Iota:
        return tex ? fmt::format("\\iota_{{{}}}", e->n) : fmt::format("iota({})", e->n);
      case Expr::K::Cls:
        return tex ? latex_name(e->name, e->inst) : fmt::format("{}({})", e->name, e->inst);
      case Expr::K::Susp:
        if (e->n == 1) return fmt::format("E({})", show(e->sub[0]));
        if (tex) return fmt::format("E^{{{}}}({})", e->n, show(e->sub[0]));
        return fmt::format("E^{}({})", e->n, show(e->sub[0]));
      case Expr::K::Hopf: return fmt::format("H({})", show(e->sub[0]));
      case Expr::K::PMap: return fmt::format("P({})", show(e->sub[0]));
      case Expr::K::Comp: {
        std::string s;
        for (auto& f : e->sub) {
          if (!s.empty() && !tex) s += ".";
          s += factor(f);
        }
        return s;
      }
      case Expr::K::Sum: {
        std::string s;
        for (auto& t : e->sub) {
          if (!s.empty()) s += " + ";
          s += show(t);
        }
        return s;
      }
      case Expr::K::Scal:
        return coeff_show(e->c) + (tex ? "\\," : " ") + paren_term(e->sub[0]);
      case Expr::K::Wh:
        return fmt::format("[{}, {}]", show(e->sub[0]), show(e->sub[1]));
      case Expr::K::Brk: {
        std::string b =
            tex ? fmt::format("\\{{{}, {}, {}\\}}", show(e->sub[0]), show(e->sub[1]),
                              show(e->sub[2]))
                : fmt::format("{{{}, {}, {}}}", show(e->sub[0]), show(e->sub[1]), show(e->sub[2]));
        if (e->n > 0) b += tex ? fmt::format("_{{{}}}", e->n) : fmt::format("_{}", e->n);
        return b;
      }
      case Expr::K::PiSet:
        if (tex) return fmt::format("\\pi_{{{}}}({})", e->n, show_space(e->sp));
        return fmt::format("pi({}, {})", e->n, show_space(e->sp));
      case Expr::K::Span: {
        std::string s;
        for (auto& g : e->sub) {
          if (!s.empty()) s += ", ";
          s += show(g);
        }
        return (tex ? "\\langle " + s + "\\rangle" : "span{" + s + "}");
      }
    }
    return "?";
  }
};

}  // namespace

std::string show_expr(const EP& e, Style st) { return Shower{st}.show(e); }

/**** lexer ****/

std::vector<Tok> tokenize(const std::string& s) {
  std::vector<Tok> out;
  size_t i = 0;
  auto prev_is_value = [&] {
    if (out.empty()) return false;
    const Tok& t = out.back();
    if (t.k == Tok::K::Int || t.k == Tok::K::Name) return true;
    return t.k == Tok::K::Punct && (t.text == ")" || t.text == "]" || t.text == "}");
  };
  while (i < s.size()) {
    char ch = s[i];
    if (std::isspace(static_cast<unsigned char>(ch))) {
      ++i;
      continue;
    }
    if (ch == '#') {
      while (i < s.size() && s[i] != '\n') ++i;
      continue;
    }
    int pos = static_cast<int>(i);
    if (std::isdigit(static_cast<unsigned char>(ch)) ||
        (ch == '-' && i + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i + 1])) &&
         !prev_is_value())) {
      bool neg = ch == '-';
      if (neg) ++i;
      i64 v = 0;
      while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) v = v * 10 + (s[i++] - '0');
      out.push_back(Tok{Tok::K::Int, s.substr(pos, i - pos), neg ? -v : v, pos});
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(ch))) {
      size_t j = i + 1;
      while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_' ||
                              s[j] == '\'' || s[j] == '*'))
        ++j;
      out.push_back(Tok{Tok::K::Name, s.substr(i, j - i), 0, pos});
      i = j;
      continue;
    }
    if (ch == '"') {
      size_t j = i + 1;
      while (j < s.size() && s[j] != '"') ++j;
      if (j == s.size()) throw ParseError{"unterminated string", pos};
      out.push_back(Tok{Tok::K::Str, s.substr(i + 1, j - i - 1), 0, pos});
      i = j + 1;
      continue;
    }
    static const char* two[] = {"=>", "..", "->", nullptr};
    bool matched = false;
    for (int t = 0; two[t]; ++t)
      if (s.compare(i, 2, two[t]) == 0) {
        out.push_back(Tok{Tok::K::Punct, two[t], 0, pos});
        i += 2;
        matched = true;
        break;
      }
    if (matched) continue;
    if (std::strchr("()[]{},.+^*_=<>:;|-@/&!?~%", ch)) {
      out.push_back(Tok{Tok::K::Punct, std::string(1, ch), 0, pos});
      ++i;
      continue;
    }
    throw ParseError{fmt::format("stray character '{}'", ch), pos};
  }
  out.push_back(Tok{Tok::K::End, "", 0, static_cast<int>(s.size())});
  return out;
}

/**** parser ****/

const Tok& Parser::peek(int ahead) const {
  size_t j = at + ahead;
  if (j >= toks.size()) j = toks.size() - 1;
  return toks[j];
}

Tok Parser::next() {
  Tok t = peek();
  if (at + 1 < toks.size()) ++at;
  return t;
}

bool Parser::is_punct(const std::string& p, int ahead) const {
  return peek(ahead).k == Tok::K::Punct && peek(ahead).text == p;
}

bool Parser::is_name(const std::string& n, int ahead) const {
  return peek(ahead).k == Tok::K::Name && peek(ahead).text == n;
}

void Parser::expect_punct(const std::string& p) {
  if (!is_punct(p)) fail(fmt::format("expected '{}'", p));
  next();
}

std::string Parser::expect_name() {
  if (peek().k != Tok::K::Name) fail("expected a name");
  return next().text;
}

i64 Parser::expect_int() {
  if (peek().k != Tok::K::Int) fail("expected an integer");
  return next().num;
}

void Parser::fail(const std::string& msg) const {
  throw ParseError{fmt::format("{} (got '{}')", msg, peek().text.empty() ? "<end>" : peek().text),
                   peek().pos};
}

namespace {

EP parse_factor(Parser& p) {
  if (p.peek().k == Tok::K::Int && p.peek().num == 0) {
    p.next();
    return mk_zero();
  }
  if (p.is_punct("(")) {
    p.next();
    EP e = p.parse_expr();
    p.expect_punct(")");
    return e;
  }
  if (p.is_punct("[")) {
    p.next();
    EP a = p.parse_expr();
    p.expect_punct(",");
    EP b = p.parse_expr();
    p.expect_punct("]");
    return mk_wh(a, b);
  }
  if (p.is_punct("{")) {
    p.next();
    EP a = p.parse_expr();
    p.expect_punct(",");
    EP b = p.parse_expr();
    p.expect_punct(",");
    EP c = p.parse_expr();
    p.expect_punct("}");
    int t = 0;
    if (p.is_punct("_")) {
      p.next();
      t = static_cast<int>(p.expect_int());
    }
    return mk_brk(a, b, c, t);
  }
  if (p.peek().k != Tok::K::Name) p.fail("expected a factor");
  std::string name = p.next().text;
  if (name == "iota") {
    p.expect_punct("(");
    int n = static_cast<int>(p.expect_int());
    p.expect_punct(")");
    return mk_iota(n);
  }
  if (name == "pi" && p.is_punct("(")) {
    p.next();
    int k = static_cast<int>(p.expect_int());
    p.expect_punct(",");
    std::string sp = p.expect_name();
    auto x = parse_space(sp);
    if (!x) p.fail(fmt::format("bad space token '{}'", sp));
    p.expect_punct(")");
    return mk_piset(k, *x);
  }
  if (name == "span" && p.is_punct("{")) {
    p.next();
    std::vector<EP> gens{p.parse_expr()};
    while (p.is_punct(",")) {
      p.next();
      gens.push_back(p.parse_expr());
    }
    p.expect_punct("}");
    return mk_span(std::move(gens));
  }
  if (name == "E" && (p.is_punct("(") || p.is_punct("^"))) {
    int t = 1;
    if (p.is_punct("^")) {
      p.next();
      t = static_cast<int>(p.expect_int());
    }
    p.expect_punct("(");
    EP e = p.parse_expr();
    p.expect_punct(")");
    return mk_susp(t, e);
  }
  if ((name == "H" || name == "P") && p.is_punct("(")) {
    p.next();
    EP e = p.parse_expr();
    p.expect_punct(")");
    return name == "H" ? mk_hopf(e) : mk_pmap(e);
  }
  if (p.is_punct("(") && p.peek(1).k == Tok::K::Int && p.is_punct(")", 2)) {
    p.next();
    int inst = static_cast<int>(p.expect_int());
    p.expect_punct(")");
    return mk_cls(name, inst);
  }
  // bare name: a script variable, resolved by the caller's environment
  return mk_cls(name, kBareInst);
}

std::optional<Coeff> parse_coeff_atom(Parser& p) {
  if (p.peek().k == Tok::K::Int) {
    // an integer is a coefficient unless it is a literal 0 standing alone
    if (p.peek().num == 0) return std::nullopt;
    Coeff c = coeff_int(p.next().num);
    if (p.is_punct("*")) p.next();
    return c;
  }
  if (p.is_name("pm") && p.peek(1).k == Tok::K::Int) {
    p.next();
    Coeff c = coeff_int(p.next().num);
    c.pm = true;
    if (p.is_punct("*")) p.next();
    return c;
  }
  if ((p.is_name("odd") || p.is_name("sym")) && p.is_punct("[", 1)) {
    bool odd = p.is_name("odd");
    p.next();
    p.next();
    std::string s = p.expect_name();
    p.expect_punct("]");
    if (p.is_punct("*")) p.next();
    return odd ? coeff_odd(s) : coeff_sym(s);
  }
  return std::nullopt;
}

}  // namespace

EP Parser::parse_term() {
  Coeff c = coeff_int(1);
  while (auto atom = parse_coeff_atom(*this)) {
    auto m = coeff_mul(c, *atom);
    if (!m) fail("coefficient would multiply two unknowns");
    c = *m;
  }
  std::vector<EP> fs{parse_factor(*this)};
  while (is_punct(".")) {
    next();
    fs.push_back(parse_factor(*this));
  }
  return mk_scal(c, mk_comp(std::move(fs)));
}

EP Parser::parse_expr() {
  std::vector<EP> ts{parse_term()};
  while (is_punct("+")) {
    next();
    ts.push_back(parse_term());
  }
  return mk_sum(std::move(ts));
}

EP parse_expr_str(const std::string& s) {
  Parser p(s);
  EP e = p.parse_expr();
  if (!p.done()) p.fail("trailing input after expression");
  return e;
}

}  // namespace stem31
