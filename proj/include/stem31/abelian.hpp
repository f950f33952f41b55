#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

/*
 * Exact integer linear algebra for finitely generated abelian groups.
 * Everything here is small: ambient ranks stay below ~16 and orders are
 * powers of two, so plain int64 arithmetic never comes close to overflow.
 */

namespace stem31 {

using i64 = std::int64_t;
using Vec = std::vector<i64>;

/**** matrices ****/

struct Mat {
  int rows = 0, cols = 0;
  std::vector<i64> a;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0) {}

  i64& at(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
  i64 at(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }

  static Mat id(int n);
  static Mat diag(const Vec& d);
  static Mat from_cols(int rows, const std::vector<Vec>& cols);

  Vec col(int j) const;
  bool operator==(const Mat&) const = default;
};

Mat mul(const Mat& A, const Mat& B);
Vec mul(const Mat& A, const Vec& x);
Mat hcat(const Mat& A, const Mat& B);
i64 det(const Mat& A);  // Bareiss, exact

// Unimodular U, V with U*A*V = S, S diagonal with d1 | d2 | ... and di >= 0.
struct Snf {
  Mat U, S, V;
  int rank = 0;  // number of nonzero diagonal entries
};

Snf smith(Mat A);

// Integer solution of A*x = b, or nullopt if none exists.
std::optional<Vec> solve(const Mat& A, const Vec& b);

/**** abelian groups ****/

// Direct sum of cyclics, one generator per coordinate; order 0 means Z.
struct AbGroup {
  Vec orders;

  int rank() const { return static_cast<int>(orders.size()); }
  bool finite() const;
  i64 size() const;  // 0 when infinite
  Vec reduce(Vec v) const;
  bool is_zero(const Vec& v) const;
  Vec zero() const { return Vec(orders.size(), 0); }
};

Vec vadd(const AbGroup& G, const Vec& x, const Vec& y);
Vec vneg(const AbGroup& G, const Vec& x);
Vec vscale(const AbGroup& G, i64 m, const Vec& x);

// Invariant factors of coker(A) in Z^rows (i.e. Z^rows / colspan A),
// 1s dropped, finite factors in divisibility order, then 0s for free rank.
Vec coker_invariants(const Mat& A, int rows);

/**** subgroups ****/

struct Subgroup {
  AbGroup amb;
  Mat gens;  // amb.rank() x k, columns generate

  int ngens() const { return gens.cols; }
};

Subgroup sub_trivial(const AbGroup& G);
Subgroup sub_full(const AbGroup& G);
Subgroup sub_span(const AbGroup& G, const std::vector<Vec>& gens);
bool sub_contains(const Subgroup& H, const Vec& v);
bool sub_leq(const Subgroup& A, const Subgroup& B);
bool sub_eq(const Subgroup& A, const Subgroup& B);
Subgroup sub_sum(const Subgroup& A, const Subgroup& B);
Subgroup sub_intersect(const Subgroup& A, const Subgroup& B);
Subgroup sub_scale(i64 m, const Subgroup& H);  // {m*h : h in H}
Vec sub_invariants(const Subgroup& H);         // structure of H
Vec quo_invariants(const Subgroup& H);         // structure of amb/H
i64 sub_order(const Subgroup& H);

/**** cosets ****/

struct Coset {
  Vec rep;
  Subgroup sub;
};

bool coset_contains(const Coset& c, const Vec& v);
bool coset_eq(const Coset& a, const Coset& b);
Coset coset_add(const Coset& a, const Coset& b);

/**** homomorphisms ****/

struct Hom {
  AbGroup dom, cod;
  Mat f;  // cod.rank() x dom.rank(), column j = image of dom generator j
};

bool hom_well_defined(const Hom& h);
Vec hom_apply(const Hom& h, const Vec& x);
Subgroup hom_image(const Hom& h);
Subgroup hom_image_of(const Hom& h, const Subgroup& H);
Subgroup hom_kernel(const Hom& h);
Subgroup hom_preimage(const Hom& h, const Subgroup& S);
// Some x with h(x) = y, or nullopt.
std::optional<Vec> hom_section(const Hom& h, const Vec& y);

/**** brute-force oracles (test support, ambient must be small) ****/

std::vector<Vec> enumerate_group(const AbGroup& G);
std::vector<Vec> enumerate_span(const AbGroup& G, const std::vector<Vec>& gens);
bool same_element_set(std::vector<Vec> a, std::vector<Vec> b);

std::string show_invariants(const Vec& inv);

}  // namespace stem31
