#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "stem31/abelian.hpp"

using namespace stem31;

static bool divisibility_chain(const Snf& s) {
  int n = std::min(s.S.rows, s.S.cols);
  for (int i = 0; i + 1 < n; ++i) {
    i64 a = s.S.at(i, i), b = s.S.at(i + 1, i + 1);
    if (a == 0 && b != 0) return false;
    if (a != 0 && b % a != 0) return false;
  }
  for (int i = 0; i < s.S.rows; ++i)
    for (int j = 0; j < s.S.cols; ++j)
      if (i != j && s.S.at(i, j) != 0) return false;
  return true;
}

TEST_CASE("smith on a fixed matrix") {
  Mat A(2, 2);
  A.at(0, 0) = 2; A.at(0, 1) = 4;
  A.at(1, 0) = 6; A.at(1, 1) = 8;
  Snf s = smith(A);
  CHECK(s.S.at(0, 0) == 2);
  CHECK(s.S.at(1, 1) == 4);
  CHECK(mul(mul(s.U, A), s.V) == s.S);
  CHECK(std::abs(det(s.U)) == 1);
  CHECK(std::abs(det(s.V)) == 1);
}

TEST_CASE("smith on random matrices remultiplies") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> ent(-9, 9);
  for (int trial = 0; trial < 50; ++trial) {
    Mat A(4, 4);
    for (auto& v : A.a) v = ent(rng);
    Snf s = smith(A);
    CHECK(mul(mul(s.U, A), s.V) == s.S);
    CHECK(std::abs(det(s.U)) == 1);
    CHECK(std::abs(det(s.V)) == 1);
    CHECK(divisibility_chain(s));
  }
}

TEST_CASE("solve") {
  Mat A(2, 2);
  A.at(0, 0) = 2; A.at(0, 1) = 0;
  A.at(1, 0) = 0; A.at(1, 1) = 3;
  CHECK(solve(A, {4, 9}).has_value());
  CHECK(!solve(A, {1, 0}).has_value());
  auto x = solve(A, {6, -3});
  REQUIRE(x.has_value());
  CHECK(mul(A, *x) == Vec{6, -3});
}

TEST_CASE("subgroup membership in Z8+Z2") {
  AbGroup G{{8, 2}};
  Subgroup H = sub_span(G, {{2, 1}});
  CHECK(sub_contains(H, {4, 0}));
  CHECK(sub_contains(H, {6, 1}));
  CHECK(!sub_contains(H, {2, 0}));
  CHECK(!sub_contains(H, {1, 1}));
  CHECK(sub_order(H) == 4);
  CHECK(sub_invariants(H) == Vec{4});
  CHECK(quo_invariants(H) == Vec{4});
}

TEST_CASE("intersection in Z4+Z4") {
  AbGroup G{{4, 4}};
  Subgroup A = sub_span(G, {{2, 0}, {0, 2}});
  Subgroup B = sub_span(G, {{1, 1}});
  Subgroup I = sub_intersect(A, B);
  CHECK(sub_order(I) == 2);
  CHECK(sub_contains(I, {2, 2}));
  CHECK(!sub_contains(I, {2, 0}));
}

TEST_CASE("span and intersection agree with enumeration") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    AbGroup G{{(i64)(1 << (rng() % 3 + 1)), (i64)(1 << (rng() % 2 + 1))}};
    auto rnd_vec = [&] { return Vec{(i64)(rng() % 8), (i64)(rng() % 4)}; };
    std::vector<Vec> ga{rnd_vec(), rnd_vec()}, gb{rnd_vec()};
    Subgroup A = sub_span(G, ga), B = sub_span(G, gb);

    auto ea = enumerate_span(G, ga), eb = enumerate_span(G, gb);
    CHECK((i64)ea.size() == sub_order(A));
    for (const Vec& v : enumerate_group(G)) {
      bool in_a = std::find(ea.begin(), ea.end(), G.reduce(v)) != ea.end();
      CHECK(sub_contains(A, v) == in_a);
    }
    std::vector<Vec> ei;
    for (const Vec& v : ea)
      if (std::find(eb.begin(), eb.end(), v) != eb.end()) ei.push_back(v);
    Subgroup I = sub_intersect(A, B);
    CHECK(sub_order(I) == (i64)ei.size());
    for (const Vec& v : ei) CHECK(sub_contains(I, v));
  }
}

TEST_CASE("hom kernel, image, preimage") {
  Hom f{AbGroup{{4}}, AbGroup{{8}}, Mat::from_cols(1, {{2}})};
  CHECK(hom_well_defined(f));
  CHECK(sub_order(hom_kernel(f)) == 1);
  CHECK(sub_order(hom_image(f)) == 4);
  Subgroup S = sub_span(f.cod, {{4}});
  Subgroup P = hom_preimage(f, S);
  CHECK(sub_order(P) == 2);
  CHECK(sub_contains(P, {2}));
  CHECK(!sub_contains(P, {1}));

  Hom bad{AbGroup{{2}}, AbGroup{{8}}, Mat::from_cols(1, {{1}})};
  CHECK(!hom_well_defined(bad));
}

TEST_CASE("hom section") {
  Hom f{AbGroup{{8}}, AbGroup{{4}}, Mat::from_cols(1, {{1}})};
  auto x = hom_section(f, {3});
  REQUIRE(x.has_value());
  CHECK(hom_apply(f, *x) == Vec{3});
  Hom g{AbGroup{{2}}, AbGroup{{4}}, Mat::from_cols(1, {{2}})};
  CHECK(!hom_section(g, {1}).has_value());
}

TEST_CASE("cosets in Z8") {
  AbGroup G{{8}};
  Subgroup H = sub_span(G, {{4}});
  Coset a{{2}, H}, b{{6}, H}, c{{3}, H};
  CHECK(coset_eq(a, b));
  CHECK(!coset_eq(a, c));
  Coset s = coset_add(a, c);
  CHECK(coset_contains(s, {5}));
  CHECK(coset_contains(s, {1}));
}

TEST_CASE("quotient invariants") {
  AbGroup G{{0, 4}};  // Z + Z4
  Subgroup H = sub_span(G, {{2, 0}});
  CHECK(quo_invariants(H) == Vec{2, 4});
  Subgroup T = sub_trivial(G);
  CHECK(quo_invariants(T) == Vec{4, 0});
  CHECK(show_invariants(quo_invariants(T)) == "Z4 + Z");
}
