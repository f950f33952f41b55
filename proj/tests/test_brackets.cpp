#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "stem31/brackets.hpp"
#include "stem31/kb.hpp"

using namespace stem31;

/*
 * The fixture is built around {nu(6), eta(9), zeta(10)} landing in pi(22, S6),
 * with both flanking groups present so the indeterminacy resolves, plus a
 * tail of classes (th, w) long enough for shuffles and a Jacobi sum.
 */
static const char* kBase = R"(
class nu(5)     : pi(8, S5) order 8 src "t"
class nu(6)     : pi(9, S6) order 8 susp_of nu(5) src "t"
class eta(2)    : pi(3, S2) order 2 src "t"
class eta(3)    : pi(4, S3) order 2 susp_of eta(2) src "t"
class zeta(9)   : pi(20, S9) order 8 src "t"
class zeta(10)  : pi(21, S10) order 8 susp_of zeta(9) src "t"
class sigma(8)  : pi(15, S8) order 16 src "t"
class sigma(9)  : pi(16, S9) order 16 susp_of sigma(8) src "t"
class sigma(10) : pi(17, S10) order 16 susp_of sigma(9) src "t"
class zeta'(6)  : pi(22, S6) order 8 src "t"
class mu(6)     : pi(15, S6) order 2 src "t"
class epsbar(7) : pi(22, S7) order 2 src "t"
class th(21)    : pi(33, S21) order 2 src "t"
class w(33)     : pi(40, S33) order 2 src "t"
class x(33)     : pi(41, S33) order 2 src "t"

group S9 22 = 2{sigma(9).nu(16).nu(19)} src "t"
group S6 11 = 0{P(iota(13))} src "t"
group S6 22 = 8{zeta'(6)} + 2{mu(6).sigma(15)} + 2{eta(6).epsbar(7)} src "t"

rel nh   : nu(6).eta(9) => 0 src "t"
rel hz   : eta(9).zeta(10) => 0 src "t"
rel zt   : zeta(10).th(21) => 0 src "t"
rel tw   : th(21).w(33) => 0 src "t"
rel nsnn : nu(6).sigma(9).nu(16).nu(19) => eta(6).epsbar(7) src "t"
rel pz   : P(zeta(13)) => pm 2 zeta'(6) src "t"
)";

struct Fix {
  Catalog cat;
  std::vector<CompiledRule> rules;
  KB kb;
  FactPiles piles;
  RwCtx ctx;

  explicit Fix(const std::string& extra = "") {
    cat = parse_catalog(std::string(kBase) + extra, "mini");
    rules = compile_rules(cat);
    kb.add_axioms(cat);
    piles = pile_facts(kb.visible({}));
    ctx.cat = &cat;
    ctx.rules = &rules;
    ctx.eq_facts = piles.eqs;
    ctx.ann_facts = piles.anns;
    ctx.epi_facts = piles.epis;
    ctx.susp_facts = piles.susps;
    ctx.exp_facts = piles.exps;
    ctx.ord_facts = piles.ords;
    ctx.cong = &piles.cong;
  }

  BrkSpec brk(const std::string& s) {
    std::string why;
    auto b = as_bracket(ctx, parse_expr_str(s), &why);
    REQUIRE_MESSAGE(b, why);
    return *b;
  }
  GroupView view(const std::string& sp, int k) {
    std::string why;
    auto v = group_view(ctx, *parse_space(sp), k, &why);
    REQUIRE_MESSAGE(v, why);
    return *v;
  }
};

static EP pe(const std::string& s) { return parse_expr_str(s); }

TEST_CASE("bracket specs and their degrees") {
  Fix fx;
  auto s = fx.brk("{nu(6), eta(9), zeta(10)}");
  CHECK(s.t == 0);
  CHECK(s.deg == pi_deg(22, sphere(6)));

  auto s1 = fx.brk("{nu(6), eta(9), zeta(10)}_1");
  CHECK(s1.t == 1);

  std::string why;
  CHECK(!as_bracket(fx.ctx, pe("{nu(6), zeta(10), eta(9)}"), &why));
  CHECK(why.find("do not compose") != std::string::npos);
  CHECK(!as_bracket(fx.ctx, pe("nu(6)"), &why));
  CHECK(why.find("not a bracket") != std::string::npos);
}

TEST_CASE("structural desuspension") {
  Fix fx;
  const Catalog& cat = fx.cat;
  auto same = [&](std::optional<EP> got, const std::string& want) {
    REQUIRE(got);
    CHECK(show_expr(*got) == show_expr(pe(want)));
  };
  same(desuspend(cat, pe("eta(9)"), 3), "eta(6)");
  same(desuspend(cat, pe("zeta(10)"), 1), "zeta(9)");
  CHECK(!desuspend(cat, pe("zeta(10)"), 2));
  same(desuspend(cat, pe("iota(5)"), 4), "iota(1)");
  CHECK(!desuspend(cat, pe("iota(5)"), 5));
  same(desuspend(cat, pe("E^3(nu(6))"), 2), "E(nu(6))");
  same(desuspend(cat, pe("E^3(nu(6))"), 3), "nu(6)");
  CHECK(!desuspend(cat, pe("E^3(nu(6))"), 5));  // nu stops at nu(5)
  same(desuspend(cat, pe("2 nu(6).eta(9)"), 1), "2 nu(5).eta(8)");
  same(desuspend(cat, pe("nu(6) + 2 nu(6)"), 1), "nu(5) + 2 nu(5)");
  same(desuspend(cat, pe("0"), 10), "0");
  CHECK(!desuspend(cat, pe("H(nu(6))"), 1));
  CHECK(!desuspend(cat, pe("P(iota(13))"), 1));
}

TEST_CASE("well-definedness needs both composites to vanish") {
  Fix fx;
  Wd wd = well_defined(fx.ctx, fx.brk("{nu(6), eta(9), zeta(10)}"));
  CHECK(wd.ok);
  CHECK(wd.ab.is_zero());
  CHECK(wd.bc.is_zero());
  CHECK(show_expr(wd.c0) == "zeta(10)");

  // At subscript 1 the desuspended composite eta(8).zeta(9) has no vanishing
  // rule here, so the residual must be reported, not guessed away.
  Wd w1 = well_defined(fx.ctx, fx.brk("{nu(6), eta(9), zeta(10)}_1"));
  CHECK(!w1.ok);
  CHECK(w1.why.find("does not vanish") != std::string::npos);
  CHECK(w1.why.find("eta(8)") != std::string::npos);

  Wd w2 = well_defined(fx.ctx, fx.brk("{nu(6), eta(9), zeta(10)}_2"));
  CHECK(!w2.ok);
  CHECK(w2.why.find("not a 2-fold suspension") != std::string::npos);
}

TEST_CASE("indeterminacy resolves through both flanking groups") {
  Fix fx;
  auto s = fx.brk("{nu(6), eta(9), zeta(10)}");
  std::string why;
  auto ind = indeterminacy(fx.ctx, s, &why);
  REQUIRE_MESSAGE(ind, why);
  CHECK(ind->gens.size() == 2);
  CHECK(!ind->partial);
  CHECK(ind->note.find("pi(22, S9)") != std::string::npos);
  CHECK(ind->note.find("pi(11, S6)") != std::string::npos);

  auto v = fx.view("S6", 22);
  auto rs = resolve_ind(fx.ctx, v, *ind, &why);
  REQUIRE(rs);
  CHECK(!rs->partial);
  REQUIRE(rs->per_cand.size() == 1);
  const Subgroup& I = rs->per_cand[0];
  // nu(6).sigma(9)nu(16)nu(19) lands on eta(6).epsbar(7); P(iota(13)).zeta(11)
  // folds to P(zeta(13)) = pm 2 zeta'(6).  Together: Z4 + Z2 inside the value
  // group.
  CHECK(sub_order(I) == 8);
  CHECK(sub_invariants(I) == Vec{2, 4});
  CHECK(sub_contains(I, {2, 0, 0}));
  CHECK(sub_contains(I, {0, 0, 1}));
  CHECK(!sub_contains(I, {1, 0, 0}));
  CHECK(!sub_contains(I, {0, 1, 0}));
}

TEST_CASE("unresolvable indeterminacy generators flag the span partial") {
  Fix fx;
  auto v = fx.view("S6", 22);
  Ind fake;
  fake.gens.push_back(pe("nu(6).sigma(9)"));  // wrong stem, cannot resolve
  auto rs = resolve_ind(fx.ctx, v, fake);
  REQUIRE(rs);
  CHECK(rs->partial);
  CHECK(sub_order(rs->per_cand[0]) == 1);
}

TEST_CASE("shuffles move a factor across the bracket with a sign") {
  Fix fx;
  auto s = fx.brk("{nu(6), eta(9), zeta(10)}");
  std::string why;
  auto sr = shuffle_right(fx.ctx, s, pe("E(th(21))"), &why);
  REQUIRE_MESSAGE(sr, why);
  CHECK(sr->negate);
  CHECK(expr_eq(sr->set, mk_comp({pe("nu(6)"), pe("{eta(9), zeta(10), th(21)}")})));

  auto inner = fx.brk("{eta(9), zeta(10), th(21)}");
  auto sl = shuffle_left(fx.ctx, pe("nu(6)"), inner, &why);
  REQUIRE_MESSAGE(sl, why);
  CHECK(sl->negate);
  CHECK(expr_eq(sl->set, mk_comp({brk_expr(s), mk_susp(1, pe("th(21)"))})));

  // the right factor must be a suspension
  CHECK(!shuffle_right(fx.ctx, s, pe("th(22)"), &why));
  CHECK(why.find("not a suspension") != std::string::npos);
}

TEST_CASE("absorption laws") {
  Fix fx;
  std::string why;
  auto inner = fx.brk("{eta(9), zeta(10), th(21)}");
  auto al = absorb_left(fx.ctx, pe("nu(6)"), inner, &why);
  REQUIRE_MESSAGE(al, why);
  CHECK(!al->negate);
  CHECK(expr_eq(al->set, pe("{nu(6).eta(9), zeta(10), th(21)}")));

  auto s = fx.brk("{nu(6), eta(9), zeta(10)}");
  auto ar = absorb_right(fx.ctx, s, pe("E(th(21))"), &why);
  REQUIRE_MESSAGE(ar, why);
  CHECK(expr_eq(ar->set, pe("{nu(6), eta(9), zeta(10).th(21)}")));
}

TEST_CASE("slides split composite entries") {
  Fix fx;
  std::string why;
  auto s2 = fx.brk("{nu(6), eta(9).zeta(10), th(21)}");
  auto r1 = slide(fx.ctx, s2, 1, &why);
  REQUIRE_MESSAGE(r1, why);
  CHECK(expr_eq(r1->set, pe("{nu(6).eta(9), zeta(10), th(21)}")));

  auto s3 = fx.brk("{nu(6), eta(9), zeta(10).th(21)}");
  auto r2 = slide(fx.ctx, s3, 2, &why);
  REQUIRE_MESSAGE(r2, why);
  CHECK(expr_eq(r2->set, pe("{nu(6), eta(9).zeta(10), th(21)}")));

  CHECK(!slide(fx.ctx, fx.brk("{nu(6), eta(9), zeta(10)}"), 1, &why));
  CHECK(why.find("nothing to slide") != std::string::npos);
}

TEST_CASE("a degree map composes into the right entry") {
  Fix fx;
  std::string why;
  auto s = fx.brk("{nu(6), eta(9), zeta(10)}");
  auto r = scalar_right(fx.ctx, s, 2, &why);
  REQUIRE_MESSAGE(r, why);
  CHECK(expr_eq(r->set, pe("{nu(6), eta(9), 2 zeta(10)}")));
}

TEST_CASE("suspension raises the subscript; equality needs the cited epi") {
  Fix fe("fact se  : epi E pi(22, S6) = pi(23, S7) src \"t\"\n"
         "fact bad : epi E pi(21, S6) = pi(22, S7) src \"t\"\n");
  auto s = fe.brk("{nu(6), eta(9), zeta(10)}");
  std::string why;
  bool is_eq = true;
  auto r = suspend_bracket(fe.ctx, s, nullptr, &is_eq, &why);
  REQUIRE_MESSAGE(r, why);
  CHECK(!is_eq);
  CHECK(r->negate);
  CHECK(expr_eq(r->set, pe("{E(nu(6)), E(eta(9)), E(zeta(10))}_1")));

  auto re = suspend_bracket(fe.ctx, s, fe.kb.find("se"), &is_eq, &why);
  REQUIRE_MESSAGE(re, why);
  CHECK(is_eq);
  CHECK(re->note.find("se") != std::string::npos);

  CHECK(!suspend_bracket(fe.ctx, s, fe.kb.find("bad"), &is_eq, &why));
  CHECK(why.find("bad") != std::string::npos);
  CHECK(!is_eq);
}

static const char* kDeeper = "rel hz8 : eta(8).zeta(9) => 0 src \"t\"\n";

TEST_CASE("relaxing the subscript downward") {
  Fix fx(kDeeper);
  auto s1 = fx.brk("{nu(6), eta(9), zeta(10)}_1");
  CHECK(well_defined(fx.ctx, s1).ok);
  std::string why;
  auto r = relax_bracket(fx.ctx, s1, 0, &why);
  REQUIRE_MESSAGE(r, why);
  CHECK(expr_eq(r->set, pe("{nu(6), eta(9), zeta(10)}")));

  auto s0 = fx.brk("{nu(6), eta(9), zeta(10)}");
  CHECK(!relax_bracket(fx.ctx, s0, 1, &why));
  CHECK(why.find("downward") != std::string::npos);
}

TEST_CASE("equal resolved indeterminacies let subscripts interchange") {
  Fix fx(std::string(kDeeper) + "group S8 21 = 2{sigma(8).nu(15).nu(18)} src \"t\"\n");
  auto s1 = fx.brk("{nu(6), eta(9), zeta(10)}_1");
  auto v = fx.view("S6", 22);
  std::string why;
  auto r = subeq_bracket(fx.ctx, s1, 0, v, &why);
  REQUIRE_MESSAGE(r, why);
  CHECK(expr_eq(r->set, pe("{nu(6), eta(9), zeta(10)}")));
  CHECK(r->note.find("agree") != std::string::npos);
}

TEST_CASE("a partially listed flank blocks the subscript equality") {
  Fix fx(std::string(kDeeper) + "group S8 21 = 2{sigma(8).nu(15).nu(18)} + ... src \"t\"\n");
  auto s1 = fx.brk("{nu(6), eta(9), zeta(10)}_1");
  auto v = fx.view("S6", 22);
  std::string why;
  CHECK(!subeq_bracket(fx.ctx, s1, 0, v, &why));
  CHECK(why.find("partial") != std::string::npos);
}

TEST_CASE("a sum entry splits into one bracket per summand") {
  Fix fx;
  std::string why;
  auto s = fx.brk("{nu(6) + nu(6), eta(9), zeta(10)}");
  auto r = add_split(fx.ctx, s, 1, &why);
  REQUIRE_MESSAGE(r, why);
  CHECK(expr_eq(r->set, mk_sum({pe("{nu(6), eta(9), zeta(10)}"),
                                pe("{nu(6), eta(9), zeta(10)}")})));
  CHECK(!add_split(fx.ctx, s, 2, &why));
  CHECK(why.find("not a sum") != std::string::npos);

  auto mid = fx.brk("{nu(6), eta(9) + eta(9), zeta(10)}");
  auto rm = add_split(fx.ctx, mid, 2, &why);
  REQUIRE_MESSAGE(rm, why);
  CHECK(expr_eq(rm->set, mk_sum({pe("{nu(6), eta(9), zeta(10)}"),
                                 pe("{nu(6), eta(9), zeta(10)}")})));

  auto plain = fx.brk("{nu(6), eta(9), zeta(10)}");
  CHECK(!add_split(fx.ctx, plain, 1, &why));
  CHECK(why.find("not a sum") != std::string::npos);
}

TEST_CASE("a scalar slides toward the left once its carrier suspends") {
  Fix fx;
  std::string why;
  auto s = fx.brk("{nu(6), 2 eta(9), zeta(10)}");
  auto r = slide(fx.ctx, s, 1, &why);
  REQUIRE_MESSAGE(r, why);
  CHECK(expr_eq(r->set, pe("{2 nu(6), eta(9), zeta(10)}")));
  CHECK(r->note.find("scalar") != std::string::npos);

  auto s2 = fx.brk("{nu(6), eta(9), 2 zeta(10)}");
  auto r2 = slide(fx.ctx, s2, 2, &why);
  REQUIRE_MESSAGE(r2, why);
  CHECK(expr_eq(r2->set, pe("{nu(6), 2 eta(9), zeta(10)}")));
}

TEST_CASE("the Jacobi sum checks all four adjacent composites") {
  Fix fx;
  std::string why;
  auto j = jacobi_sum(fx.ctx, pe("nu(6)"), pe("eta(9)"), pe("zeta(10)"), pe("th(21)"),
                      pe("w(33)"), &why);
  REQUIRE_MESSAGE(j, why);
  CHECK(j->note.find("pi(42, S6)") != std::string::npos);
  CHECK(expr_eq(j->t3, mk_brk(pe("nu(6)"), pe("eta(9)"),
                              pe("{zeta(10), th(21), w(33)}"), 0)));
  CHECK(expr_eq(j->t1, mk_brk(pe("{nu(6), eta(9), zeta(10)}"), mk_susp(1, pe("th(21)")),
                              mk_susp(1, pe("w(33)")), 0)));

  // th(21).x(33) has no vanishing rule: the third inner bracket must refuse.
  CHECK(!jacobi_sum(fx.ctx, pe("nu(6)"), pe("eta(9)"), pe("zeta(10)"), pe("th(21)"),
                    pe("x(33)"), &why));
  CHECK(why.find("inner bracket 3") != std::string::npos);
  CHECK(why.find("does not vanish") != std::string::npos);
}
