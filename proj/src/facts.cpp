#include "stem31/facts.hpp"

#include <fmt/format.h>

namespace stem31 {

MapRef parse_map(Parser& p) {
  std::string n = p.expect_name();
  MapRef m;
  if (n == "E") {
    m.k = MapRef::K::E;
    m.t = 1;
    if (p.is_punct("^")) {
      p.next();
      m.t = static_cast<int>(p.expect_int());
    }
  } else if (n == "H") {
    m.k = MapRef::K::H;
  } else if (n == "P") {
    m.k = MapRef::K::P;
  } else if (n == "bd") {
    m.k = MapRef::K::Bd;
  } else if (n == "relE") {
    m.k = MapRef::K::RelE;
  } else {
    p.fail(fmt::format("unknown map '{}'", n));
  }
  return m;
}

FactStmt parse_stmt(Parser& p) {
  FactStmt st;
  std::string head = p.expect_name();
  if (head == "eq") {
    st.a = p.parse_expr();
    p.expect_punct("=");
    st.b = p.parse_expr();
    if (p.is_name("mod")) {
      p.next();
      st.s = p.parse_expr();
      st.k = FactStmt::K::CosetEq;
    } else {
      st.k = FactStmt::K::Eq;
    }
  } else if (head == "mem") {
    st.k = FactStmt::K::Mem;
    st.a = p.parse_expr();
    if (!p.is_name("in")) p.fail("expected 'in'");
    p.next();
    st.s = p.parse_expr();
  } else if (head == "sub") {
    st.k = FactStmt::K::SubLeq;
    st.a = p.parse_expr();
    p.expect_punct("<");
    p.expect_punct("=");
    st.b = p.parse_expr();
  } else if (head == "order") {
    st.a = p.parse_expr();
    if (p.is_punct("=")) {
      p.next();
      st.k = FactStmt::K::OrderEq;
    } else if (p.is_punct("|")) {
      p.next();
      st.k = FactStmt::K::OrderDiv;
    } else {
      p.fail("expected '=' or '|' after order");
    }
    st.m = p.expect_int();
  } else if (head == "exponent") {
    st.k = FactStmt::K::ExpDiv;
    st.a = p.parse_expr();
    p.expect_punct("|");
    st.m = p.expect_int();
  } else if (head == "mono") {
    st.k = FactStmt::K::Mono;
    st.map = parse_map(p);
    st.a = p.parse_expr();
  } else if (head == "epi") {
    st.k = FactStmt::K::Epi;
    st.map = parse_map(p);
    st.a = p.parse_expr();
    p.expect_punct("=");
    st.b = p.parse_expr();
  } else if (head == "ker") {
    st.k = FactStmt::K::Ker;
    st.map = parse_map(p);
    st.a = p.parse_expr();
    p.expect_punct("=");
    st.s = p.parse_expr();
  } else if (head == "cong") {
    st.k = FactStmt::K::Cong;
    st.sym = p.expect_name();
    p.expect_punct("=");
    st.m = p.expect_int();
    if (!p.is_name("mod")) p.fail("expected 'mod'");
    p.next();
    st.mod = p.expect_int();
  } else if (head == "odd") {
    st.k = FactStmt::K::OddSym;
    st.sym = p.expect_name();
  } else {
    p.fail(fmt::format("unknown statement head '{}'", head));
  }
  return st;
}

FactStmt parse_stmt_str(const std::string& s) {
  Parser p(s);
  FactStmt st = parse_stmt(p);
  if (!p.done()) p.fail("trailing input after statement");
  return st;
}

std::string show_map(const MapRef& m) {
  switch (m.k) {
    case MapRef::K::E: return m.t == 1 ? "E" : fmt::format("E^{}", m.t);
    case MapRef::K::H: return "H";
    case MapRef::K::P: return "P";
    case MapRef::K::Bd: return "bd";
    case MapRef::K::RelE: return "relE";
  }
  return "?";
}

std::string show_stmt(const FactStmt& st, Style style) {
  auto e = [&](const EP& x) { return show_expr(x, style); };
  switch (st.k) {
    case FactStmt::K::Eq: return fmt::format("eq {} = {}", e(st.a), e(st.b));
    case FactStmt::K::CosetEq:
      return fmt::format("eq {} = {} mod {}", e(st.a), e(st.b), e(st.s));
    case FactStmt::K::Mem: return fmt::format("mem {} in {}", e(st.a), e(st.s));
    case FactStmt::K::SubLeq: return fmt::format("sub {} <= {}", e(st.a), e(st.b));
    case FactStmt::K::OrderEq: return fmt::format("order {} = {}", e(st.a), st.m);
    case FactStmt::K::OrderDiv: return fmt::format("order {} | {}", e(st.a), st.m);
    case FactStmt::K::ExpDiv: return fmt::format("exponent {} | {}", e(st.a), st.m);
    case FactStmt::K::Mono: return fmt::format("mono {} {}", show_map(st.map), e(st.a));
    case FactStmt::K::Epi:
      return fmt::format("epi {} {} = {}", show_map(st.map), e(st.a), e(st.b));
    case FactStmt::K::Ker:
      return fmt::format("ker {} {} = {}", show_map(st.map), e(st.a), e(st.s));
    case FactStmt::K::Cong: return fmt::format("cong {} = {} mod {}", st.sym, st.m, st.mod);
    case FactStmt::K::OddSym: return fmt::format("odd {}", st.sym);
  }
  return "?";
}

}  // namespace stem31
