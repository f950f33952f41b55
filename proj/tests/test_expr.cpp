#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "stem31/expr.hpp"

using namespace stem31;

static std::string rt(const std::string& s) { return show_expr(parse_expr_str(s)); }

TEST_CASE("space parsing and printing") {
  auto s = parse_space("S9");
  REQUIRE(s.has_value());
  CHECK(s->k == Space::K::S);
  CHECK(s->n == 9);
  CHECK(show_space(*s) == "S9");
  CHECK(parse_space("M12")->k == Space::K::M);
  CHECK(parse_space("CP7")->k == Space::K::CP);
  CHECK(parse_space("MP12")->k == Space::K::MP);
  CHECK(!parse_space("X4").has_value());
  CHECK(!parse_space("S").has_value());
  CHECK(suspend(sphere(9), 2) == sphere(11));
  CHECK(show_deg(pi_deg(26, sphere(9))) == "pi(26, S9)");
  CHECK(show_deg(Deg{Space{Space::K::M, 25}, sphere(10)}) == "hom(M25, S10)");
}

TEST_CASE("expression round trips") {
  for (const char* s : {
           "eta(9).sigma(10).sigma(17)",
           "2 nu(5)",
           "pm 2 sigma(9).nu(16)",
           "odd[x] nu(7).sigma(10)",
           "E^11(eps'(3))",
           "E(sigma'(7))",
           "[iota(8), iota(8)]",
           "{nu(6), eta(9), zeta(10)}_1",
           "nubar(9) + eps(9)",
           "8 iota(30)",
           "P(sigma*(21))",
           "H(beta'(10))",
           "(nubar(6) + eps(6)).sigma(14)",
           "0",
           "{F1(30), 8 iota(30), 2 sigma(30)}_1",
           "sym[y] alpha3_IV(9)",
       })
    CHECK(rt(s) == s);
}

TEST_CASE("alternate spellings parse to the same tree") {
  CHECK(expr_eq(parse_expr_str("2*nu(5)"), parse_expr_str("2 nu(5)")));
  CHECK(expr_eq(parse_expr_str("{a, b, c}"), parse_expr_str("{ a ,b, c }_0")));
  CHECK(expr_eq(parse_expr_str("-2 nu(5)"), parse_expr_str("-2*nu(5)")));
}

TEST_CASE("bare names are script variables") {
  EP e = parse_expr_str("b1.sigma(30)");
  REQUIRE(e->k == Expr::K::Comp);
  CHECK(e->sub[0]->k == Expr::K::Cls);
  CHECK(e->sub[0]->inst == kBareInst);
  CHECK(e->sub[0]->name == "b1");
}

TEST_CASE("parse errors carry positions") {
  CHECK_THROWS_AS(parse_expr_str("eta("), ParseError);
  CHECK_THROWS_AS(parse_expr_str("eta(9) +"), ParseError);
  CHECK_THROWS_AS(parse_expr_str("sym[x] sym[y] nu(5)"), ParseError);
  CHECK_THROWS_AS(parse_expr_str("eta(9) sigma(10)"), ParseError);
}

TEST_CASE("latex output") {
  CHECK(show_expr(parse_expr_str("eta(9).sigmabar(10)"), Style::Latex) ==
        "\\eta_{9}\\bar{\\sigma}_{10}");
  CHECK(show_expr(parse_expr_str("mu3(12)"), Style::Latex) == "\\mu_{3,12}");
  CHECK(show_expr(parse_expr_str("2 zeta'(6)"), Style::Latex) == "2\\,\\zeta'_{6}");
  CHECK(show_expr(parse_expr_str("kappa*(10)"), Style::Latex) == "\\kappa^{*}_{10}");
}

TEST_CASE("coefficient algebra") {
  auto m = coeff_mul(coeff_odd("x"), coeff_int(2));
  REQUIRE(m.has_value());
  CHECK(m->n == 2);
  CHECK(m->odd == std::vector<std::string>{"x"});
  CHECK(!coeff_mul(coeff_sym("a"), coeff_sym("b")).has_value());

  auto a = coeff_add(*m, *m);
  REQUIRE(a.has_value());
  CHECK(a->n == 4);
  CHECK(!coeff_add(coeff_odd("x"), coeff_int(1)).has_value());

  Coeff pm2 = coeff_int(2);
  pm2.pm = true;
  CHECK(!coeff_add(pm2, coeff_int(2)).has_value());
}

TEST_CASE("coefficient divisibility under congruences") {
  CongEnv env;
  CHECK(coeff_divisible(coeff_scale(4, coeff_odd("x")), 4, env));
  CHECK(!coeff_divisible(coeff_scale(4, coeff_odd("x")), 8, env));
  Coeff c = coeff_scale(2, coeff_sym("y"));  // 2y
  CHECK(!coeff_divisible(c, 8, env));
  env.cong["y"] = CongEnv::Rule{4, 0};  // y = 0 mod 4
  CHECK(coeff_divisible(c, 8, env));
  CHECK(coeff_value(coeff_int(5)) == 5);
  CHECK(!coeff_value(coeff_odd("x")).has_value());
  CHECK(coeff_subst(coeff_sym("y"), "y", 3).n == 3);
}

TEST_CASE("coefficient residue sets") {
  CongEnv env;
  auto r = coeff_residues(coeff_scale(2, coeff_odd("x")), 8, env);
  REQUIRE(r.has_value());
  CHECK(*r == std::set<i64>{2, 6});
  Coeff pm2 = coeff_int(2);
  pm2.pm = true;
  CHECK(*coeff_residues(pm2, 16, env) == std::set<i64>{2, 14});
  CHECK(*coeff_residues(pm2, 4, env) == std::set<i64>{2});
  CHECK(!coeff_residues(coeff_sym("z"), 4, env).has_value());
}
