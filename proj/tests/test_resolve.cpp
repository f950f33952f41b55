#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "stem31/resolve.hpp"

using namespace stem31;

// Small catalog exercising every summand shape: plain cyclic slots, an
// infinite slot, a partial listing, and both marker kinds.
static const char* kBase = R"(
class eta(9) : pi(10, S9) order 2 src "t"
class sigma(9) : pi(16, S9) order 16 src "t"
class sigma(10) : pi(17, S10) order 16 src "t"
class nubar(9) : pi(17, S9) order 2 src "t"
class eps(9) : pi(17, S9) order 2 src "t"
class a(5) : pi(13, S5) order 4 src "t"
class b(5) : pi(13, S5) order ? src "t"
class c(10) : pi(41, S10) order 8 src "t"
class d(10) : pi(41, S10) order ? src "t"
class e(10) : pi(41, S10) order 2 src "t"
class f(7) : pi(30, S7) order 2 src "t"
class g(7) : pi(30, S7) order 2 src "t"

group S9 17 = 2{nubar(9)} + 2{eps(9)} src "t"
group S9 16 = 16{sigma(9)} src "t"
group S8 8 = 0{iota(8)} src "t"
group S6 12 = 0 src "t"
group S5 13 = 4{a(5)} + G{b(5)} src "t"
group S10 41 = 8{c(10)} + G2{d(10), e(10)} src "t"
group S7 30 = 2{f(7)} + ... src "t"

rel 2.8b : eta(9).sigma(10) => nubar(9) + eps(9) src "t"
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

  NF nf(const std::string& s) { return normalize(ctx, parse_expr_str(s)); }
  GroupView view(const std::string& sp, int k) {
    std::string why;
    auto v = group_view(ctx, *parse_space(sp), k, &why);
    REQUIRE_MESSAGE(v, why);
    return *v;
  }
};

TEST_CASE("group views and marker candidates") {
  Fix fx;
  auto v = fx.view("S9", 17);
  CHECK(v.cands.size() == 1);
  CHECK(v.cands[0].ab.orders == Vec{2, 2});
  CHECK(v.cands[0].gmap.count("nubar(9)") == 1);

  auto vm = fx.view("S5", 13);
  CHECK(vm.cands.size() == 2);
  CHECK(vm.svs[1].k == SummandView::K::G1);
  CHECK(vm.cands[0].ab.orders == Vec{4});
  CHECK(vm.cands[1].ab.orders == Vec{4, 2});

  auto vp = fx.view("S10", 41);
  CHECK(vp.cands.size() == 2);
  CHECK(vp.svs[1].k == SummandView::K::G2);

  CHECK(fx.view("S7", 30).partial);
  CHECK(fx.view("S6", 12).cands[0].ab.rank() == 0);

  std::string why;
  CHECK(!group_view(fx.ctx, *parse_space("S9"), 99, &why));
  CHECK(why.find("no presentation") != std::string::npos);
}

TEST_CASE("marker resolution from facts") {
  Fix fz("fact bz : eq b(5) = 0 src \"t\"\n");
  auto v = fz.view("S5", 13);
  CHECK(v.cands.size() == 1);
  CHECK(v.svs[1].k == SummandView::K::Dropped);
  CHECK(v.cands[0].ab.orders == Vec{4});
  CHECK(zero_in_group(fz.ctx, v, fz.nf("b(5)")) == Tri::Yes);

  Fix f4("fact de : eq 2 d(10) = e(10) src \"t\"\n");
  auto v4 = f4.view("S10", 41);
  CHECK(v4.cands.size() == 1);
  CHECK(v4.svs[1].k == SummandView::K::Z4Pair);
  CHECK(v4.cands[0].ab.orders == Vec{8, 4});
  CHECK(zero_in_group(f4.ctx, v4, f4.nf("2 d(10)")) == Tri::No);
  CHECK(eq_in_group(f4.ctx, v4, f4.nf("2 d(10)"), f4.nf("e(10)")) == Tri::Yes);
  CHECK(order_eq_in_group(f4.ctx, v4, f4.nf("d(10)"), 4) == Tri::Yes);
  CHECK(zero_in_group(f4.ctx, v4, f4.nf("2 d(10) + e(10)")) == Tri::Yes);

  Fix f2("fact d2 : order d(10) = 2 src \"t\"\n");
  auto v2 = f2.view("S10", 41);
  CHECK(v2.cands.size() == 1);
  CHECK(v2.svs[1].k == SummandView::K::Z2Pair);
  CHECK(v2.cands[0].ab.orders == Vec{8, 2, 2});
  CHECK(zero_in_group(f2.ctx, v2, f2.nf("2 d(10)")) == Tri::Yes);
  CHECK(zero_in_group(f2.ctx, v2, f2.nf("d(10) + e(10)")) == Tri::No);
}

TEST_CASE("unresolved markers only settle both-ways claims") {
  Fix fx;
  auto vm = fx.view("S5", 13);
  CHECK(zero_in_group(fx.ctx, vm, fx.nf("b(5)")) == Tri::Unknown);
  CHECK(zero_in_group(fx.ctx, vm, fx.nf("2 b(5)")) == Tri::Yes);
  CHECK(zero_in_group(fx.ctx, vm, fx.nf("a(5)")) == Tri::No);

  auto vp = fx.view("S10", 41);
  CHECK(zero_in_group(fx.ctx, vp, fx.nf("2 d(10)")) == Tri::Unknown);
  CHECK(zero_in_group(fx.ctx, vp, fx.nf("4 d(10)")) == Tri::Yes);
}

TEST_CASE("resolving rewritten chains") {
  Fix fx;
  auto v = fx.view("S9", 17);
  NF hs = fx.nf("eta(9).sigma(10)");
  std::string why;
  auto r = resolve_nf(fx.ctx, v, hs, &why);
  REQUIRE_MESSAGE(r, why);
  CHECK(r->sets[0] == std::vector<Vec>{{1, 1}});
  CHECK(zero_in_group(fx.ctx, v, hs) == Tri::No);
  CHECK(eq_in_group(fx.ctx, v, hs, fx.nf("nubar(9) + eps(9)")) == Tri::Yes);
  CHECK(eq_in_group(fx.ctx, v, hs, fx.nf("nubar(9)")) == Tri::No);
  CHECK(zero_in_group(fx.ctx, v, fx.nf("2 nubar(9)")) == Tri::Yes);

  // wrong stem: the element does not live in this group at all
  why.clear();
  CHECK(!resolve_nf(fx.ctx, v, fx.nf("sigma(9)"), &why));
  CHECK(why.find("degree") != std::string::npos);

  // right degree but no listed generator matches
  auto v7 = fx.view("S7", 30);
  why.clear();
  CHECK(!resolve_nf(fx.ctx, v7, fx.nf("g(7)"), &why));
  CHECK(why.find("no listed generator") != std::string::npos);
  CHECK(zero_in_group(fx.ctx, v7, fx.nf("f(7)")) == Tri::No);
}

TEST_CASE("ambiguous coefficients expand into value sets") {
  Fix fx;
  auto v = fx.view("S9", 16);

  auto r = resolve_nf(fx.ctx, v, fx.nf("odd[x] 2 sigma(9)"));
  REQUIRE(r);
  CHECK(r->sets[0] == std::vector<Vec>{{2}, {6}, {10}, {14}});
  CHECK(order_eq_in_group(fx.ctx, v, fx.nf("odd[x] 2 sigma(9)"), 8) == Tri::Yes);
  CHECK(order_div_in_group(fx.ctx, v, fx.nf("odd[x] 2 sigma(9)"), 4) == Tri::No);

  auto rp = resolve_nf(fx.ctx, v, fx.nf("pm 2 sigma(9)"));
  REQUIRE(rp);
  CHECK(rp->sets[0] == std::vector<Vec>{{2}, {14}});
  CHECK(eq_in_group(fx.ctx, v, fx.nf("pm 2 sigma(9)"), fx.nf("pm 2 sigma(9)")) == Tri::Yes);
  CHECK(eq_in_group(fx.ctx, v, fx.nf("pm 2 sigma(9)"), fx.nf("2 sigma(9)")) == Tri::Unknown);
  CHECK(eq_in_group(fx.ctx, v, fx.nf("2 sigma(9)"), fx.nf("pm 2 sigma(9)")) == Tri::Yes);

  CHECK(order_eq_in_group(fx.ctx, v, fx.nf("8 sigma(9)"), 2) == Tri::Yes);
  CHECK(zero_in_group(fx.ctx, v, fx.nf("16 sigma(9)")) == Tri::Yes);

  // a free integer unknown never resolves
  std::string why;
  CHECK(!resolve_nf(fx.ctx, v, fx.nf("sym[y] sigma(9)"), &why));
  CHECK(why.find("free unknown") != std::string::npos);
}

TEST_CASE("congruence environment narrows unknowns") {
  Fix fx("fact cy : cong y = 2 mod 4 src \"t\"\n");
  auto v = fx.view("S9", 16);
  auto r = resolve_nf(fx.ctx, v, fx.nf("sym[y] sigma(9)"));
  REQUIRE(r);
  CHECK(r->sets[0] == std::vector<Vec>{{2}, {6}, {10}, {14}});
  CHECK(order_eq_in_group(fx.ctx, v, fx.nf("sym[y] sigma(9)"), 8) == Tri::Yes);
}

TEST_CASE("infinite slots and cosets") {
  Fix fx;
  auto v = fx.view("S8", 8);
  CHECK(zero_in_group(fx.ctx, v, fx.nf("3 iota(8)")) == Tri::No);

  std::vector<EP> two{parse_expr_str("2 iota(8)")};
  std::vector<EP> four{parse_expr_str("4 iota(8)")};
  CHECK(coseteq_in_group(fx.ctx, v, fx.nf("3 iota(8)"), fx.nf("iota(8)"), two) == Tri::Yes);
  CHECK(coseteq_in_group(fx.ctx, v, fx.nf("3 iota(8)"), fx.nf("iota(8)"), four) == Tri::No);
  CHECK(mem_span_in_group(fx.ctx, v, fx.nf("6 iota(8)"), two) == Tri::Yes);
  CHECK(mem_span_in_group(fx.ctx, v, fx.nf("6 iota(8)"), four) == Tri::No);

  // an odd unit over a Z slot has no fixed span
  std::vector<EP> oddg{parse_expr_str("odd[u] iota(8)")};
  CHECK(mem_span_in_group(fx.ctx, v, fx.nf("iota(8)"), oddg) == Tri::Unknown);
}

TEST_CASE("span generator lists") {
  Fix fx;
  std::string why;
  bool complete = true;

  auto s = span_gens_of(fx.ctx, parse_expr_str("span{a(5), 2 b(5)}"), &complete, &why);
  REQUIRE(s);
  CHECK(s->size() == 2);
  CHECK(complete);

  auto g = span_gens_of(fx.ctx, parse_expr_str("pi(41, S10)"), &complete, &why);
  REQUIRE(g);
  CHECK(g->size() == 3);  // the G2 pair lists both
  CHECK(complete);

  auto p = span_gens_of(fx.ctx, parse_expr_str("pi(30, S7)"), &complete, &why);
  REQUIRE(p);
  CHECK(!complete);

  auto sc = span_gens_of(fx.ctx, parse_expr_str("2 pi(16, S9)"), &complete, &why);
  REQUIRE(sc);
  REQUIRE(sc->size() == 1);
  auto v16 = fx.view("S9", 16);
  CHECK(mem_span_in_group(fx.ctx, v16, fx.nf("4 sigma(9)"), *sc) == Tri::Yes);
  CHECK(mem_span_in_group(fx.ctx, v16, fx.nf("sigma(9)"), *sc) == Tri::No);

  CHECK(!span_gens_of(fx.ctx, parse_expr_str("{eta(9), sigma(10), sigma(17)}"), &complete, &why));

  // over a partial listing a No only means "not in the listed part"
  auto v7 = fx.view("S7", 30);
  std::vector<EP> twof{parse_expr_str("2 f(7)")};  // spans the trivial subgroup
  CHECK(mem_span_in_group(fx.ctx, v7, fx.nf("f(7)"), twof, true) == Tri::No);
  CHECK(mem_span_in_group(fx.ctx, v7, fx.nf("f(7)"), twof, false) == Tri::Unknown);
}

TEST_CASE("odd units scale out of span generators") {
  Fix fx;
  auto v = fx.view("S9", 16);
  std::vector<EP> gens{parse_expr_str("odd[u] 2 sigma(9)")};
  CHECK(mem_span_in_group(fx.ctx, v, fx.nf("2 sigma(9)"), gens) == Tri::Yes);
  CHECK(mem_span_in_group(fx.ctx, v, fx.nf("sigma(9)"), gens) == Tri::No);

  std::vector<EP> pmg{parse_expr_str("pm 4 sigma(9)")};
  CHECK(mem_span_in_group(fx.ctx, v, fx.nf("12 sigma(9)"), pmg) == Tri::Yes);
}

TEST_CASE("element orders") {
  AbGroup g{{8, 2, 0}};
  CHECK(elem_order(g, {1, 0, 0}) == 8);
  CHECK(elem_order(g, {2, 1, 0}) == 4);
  CHECK(elem_order(g, {4, 1, 0}) == 2);
  CHECK(elem_order(g, {0, 0, 0}) == 1);
  CHECK(elem_order(g, {0, 0, 3}) == 0);
  CHECK(elem_order(g, {6, 0, 0}) == 4);
}
