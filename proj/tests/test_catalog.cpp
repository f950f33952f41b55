#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "stem31/catalog.hpp"

using namespace stem31;

static const char* kMini = R"(
# a small consistent catalog
class iotafake(2) : pi(2, S2) order 0 src "x"
class eta(2) : pi(3, S2) order 0 src "Tod62"
class eta(3) : pi(4, S3) order 2 susp_of eta(2) src "Tod62"
class eta(4) : pi(5, S4) order 2 susp_of eta(3) src "Tod62"
class sigma'(7) : pi(14, S7) order 16 src "Tod62"
class sigma(8) : pi(15, S8) order 0 src "Tod62"
class sigma(9) : pi(16, S9) order 16 susp_of sigma(8) src "Tod62"
class nu(5) : pi(8, S5) order 8 src "Tod62"
class nu(6) : pi(9, S6) order 8 susp_of nu(5) src "Tod62"
class nu'(3) : pi(6, S3) order 4 src "Tod62"

group S3 4 = 2{eta(3)} src "Tod62"
group S2 3 = 0{eta(2)} src "Tod62"
group S23 36 = 0 src "Tod62"
group S9 40 = 16{eta(3)} src "bogus"

rel et34 : eta(3).eta(4).eta(5) => 4 nu'(3) when order eta(4) = 2 src "Tod62 5.5-ish"

bracket b1 : {eta(3), 2 iota(4), eta(4)}_1 ni 2 nu'(3) src "x"
fact f1 : mono E pi(14, S7) src "x"
fact ann1 : eq sigma'(7).pi(20, S14) = 0 src "x"
)";

static std::string fix_mini() {
  std::string s = kMini;
  auto cut = s.find("group S9 40");
  auto end = s.find('\n', cut);
  s.erase(cut, end - cut + 1);
  return s;
}

TEST_CASE("catalog parses and indexes") {
  Catalog cat = parse_catalog(fix_mini(), "mini");
  CHECK(cat.classes.size() == 10);
  CHECK(cat.rels.size() == 1);
  CHECK(cat.facts.size() == 3);
  REQUIRE(cat.group(sphere(3), 4) != nullptr);
  CHECK(cat.group(sphere(3), 4)->summands[0].order == 2);
  CHECK(cat.group(sphere(23), 36)->summands.empty());
  CHECK(cat.group(sphere(4), 7) == nullptr);
  REQUIRE(cat.rel("et34") != nullptr);
  CHECK(cat.rel("et34")->conds.size() == 1);
  CHECK(cat.fact("b1")->st.k == FactStmt::K::Mem);
  CHECK(cat.fact("f1")->st.k == FactStmt::K::Mono);
}

TEST_CASE("class info and implied suspensions") {
  Catalog cat = parse_catalog(fix_mini(), "mini");
  auto e4 = class_info(cat, "eta", 4);
  REQUIRE(e4.has_value());
  CHECK(e4->order == 2);
  CHECK(e4->order_exact);

  // eta(9) is implied: top declared is eta(4), itself a suspension
  auto e9 = class_info(cat, "eta", 9);
  REQUIRE(e9.has_value());
  CHECK(e9->deg == pi_deg(10, sphere(9)));
  CHECK(e9->order == 2);
  CHECK(!e9->order_exact);
  CHECK(e9->shift == 5);

  // sigma'(8) is not: the single record has no susp_of
  CHECK(!class_info(cat, "sigma'", 8).has_value());
  CHECK(!class_info(cat, "tau", 10).has_value());

  CHECK(suspends_to(cat, "eta", 3, 9));
  CHECK(suspends_to(cat, "eta", 2, 4));
  CHECK(!suspends_to(cat, "sigma'", 7, 8));
  CHECK(suspends_to(cat, "sigma", 8, 12));
  CHECK(!suspends_to(cat, "eta", 4, 3));
}

TEST_CASE("degree calculus") {
  Catalog cat = parse_catalog(fix_mini(), "mini");
  auto d = [&](const char* s) { return deg_of(cat, parse_expr_str(s)); };

  CHECK(d("eta(3).eta(4)").d == pi_deg(5, sphere(3)));
  CHECK(d("E^3(eta(3))").d == pi_deg(7, sphere(6)));
  CHECK(d("[iota(8), iota(8)]").d == pi_deg(15, sphere(8)));
  CHECK(d("H(sigma'(7))").d == pi_deg(14, sphere(13)));
  CHECK(d("P(iota(13))").d == pi_deg(11, sphere(6)));
  CHECK(d("{eta(3), 2 iota(4), eta(4)}_1").d == pi_deg(6, sphere(3)));
  CHECK(d("0").k == DegRes::K::Any);
  CHECK(d("2 nu(5) + 0").d == pi_deg(8, sphere(5)));

  CHECK(d("eta(4).eta(4)").k == DegRes::K::Err);   // S4 then a map into S5
  CHECK(d("P(iota(12))").k == DegRes::K::Err);     // even sphere
  CHECK(d("eta(3) + nu(5)").k == DegRes::K::Err);  // mixed degrees
  CHECK(d("missing(9)").k == DegRes::K::Err);

  CHECK(!deg_mismatch(cat, parse_expr_str("eta(3).eta(4).eta(5)"), parse_expr_str("4 nu'(3)")));
  CHECK(deg_mismatch(cat, parse_expr_str("eta(3)"), parse_expr_str("nu(5)")).has_value());
}

TEST_CASE("integrity failures are reported with lines") {
  CHECK_THROWS_AS(parse_catalog(kMini, "mini"), LoadError);  // S9 40 generator mismatch
  try {
    parse_catalog(kMini, "mini");
  } catch (const LoadError& e) {
    CHECK(e.msg.find("mini:") != std::string::npos);
    CHECK(e.msg.find("eta(3)") != std::string::npos);
  }

  // a rel whose two sides live in different groups must be rejected
  std::string bad = fix_mini();
  bad += "rel r2 : eta(3) => nu(5) src \"x\"\n";
  CHECK_THROWS_AS(parse_catalog(bad, "mini"), LoadError);

  std::string dup = fix_mini();
  dup += "fact f1 : odd x src \"x\"\n";
  CHECK_THROWS_AS(parse_catalog(dup, "mini"), LoadError);
}

TEST_CASE("serializer is idempotent") {
  Catalog cat = parse_catalog(fix_mini(), "mini");
  std::string once = show_catalog(cat);
  Catalog cat2 = parse_catalog(once, "mini2");
  CHECK(show_catalog(cat2) == once);
}
