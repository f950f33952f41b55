#include "stem31/abelian.hpp"

#include <algorithm>
#include <cassert>
#include <cstdlib>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

namespace stem31 {

/**** matrices ****/

Mat Mat::id(int n) {
  Mat m(n, n);
  for (int i = 0; i < n; ++i) m.at(i, i) = 1;
  return m;
}

Mat Mat::diag(const Vec& d) {
  Mat m(static_cast<int>(d.size()), static_cast<int>(d.size()));
  for (size_t i = 0; i < d.size(); ++i) m.at(static_cast<int>(i), static_cast<int>(i)) = d[i];
  return m;
}

Mat Mat::from_cols(int rows, const std::vector<Vec>& cols) {
  Mat m(rows, static_cast<int>(cols.size()));
  for (size_t j = 0; j < cols.size(); ++j) {
    if (static_cast<int>(cols[j].size()) != rows) throw std::invalid_argument("from_cols: bad column length");
    for (int i = 0; i < rows; ++i) m.at(i, static_cast<int>(j)) = cols[j][i];
  }
  return m;
}

Vec Mat::col(int j) const {
  Vec v(rows);
  for (int i = 0; i < rows; ++i) v[i] = at(i, j);
  return v;
}

Mat mul(const Mat& A, const Mat& B) {
  assert(A.cols == B.rows);
  Mat C(A.rows, B.cols);
  for (int i = 0; i < A.rows; ++i)
    for (int k = 0; k < A.cols; ++k) {
      i64 aik = A.at(i, k);
      if (aik == 0) continue;
      for (int j = 0; j < B.cols; ++j) C.at(i, j) += aik * B.at(k, j);
    }
  return C;
}

Vec mul(const Mat& A, const Vec& x) {
  assert(static_cast<int>(x.size()) == A.cols);
  Vec y(A.rows, 0);
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < A.cols; ++j) y[i] += A.at(i, j) * x[j];
  return y;
}

Mat hcat(const Mat& A, const Mat& B) {
  assert(A.rows == B.rows || A.cols == 0 || B.cols == 0);
  int rows = A.cols ? A.rows : B.rows;
  Mat C(rows, A.cols + B.cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < A.cols; ++j) C.at(i, j) = A.at(i, j);
    for (int j = 0; j < B.cols; ++j) C.at(i, A.cols + j) = B.at(i, j);
  }
  return C;
}

i64 det(const Mat& A) {
  assert(A.rows == A.cols);
  int n = A.rows;
  if (n == 0) return 1;
  Mat m = A;
  i64 sign = 1, prev = 1;
  for (int k = 0; k < n - 1; ++k) {
    if (m.at(k, k) == 0) {
      int p = -1;
      for (int i = k + 1; i < n; ++i)
        if (m.at(i, k) != 0) { p = i; break; }
      if (p < 0) return 0;
      for (int j = 0; j < n; ++j) std::swap(m.at(k, j), m.at(p, j));
      sign = -sign;
    }
    for (int i = k + 1; i < n; ++i)
      for (int j = k + 1; j < n; ++j)
        m.at(i, j) = (m.at(i, j) * m.at(k, k) - m.at(i, k) * m.at(k, j)) / prev;
    prev = m.at(k, k);
  }
  return sign * m.at(n - 1, n - 1);
}

/**** Smith normal form ****/

namespace {

struct SnfWorker {
  Mat A, U, V;

  void row_swap(int i, int j) {
    if (i == j) return;
    for (int c = 0; c < A.cols; ++c) std::swap(A.at(i, c), A.at(j, c));
    for (int c = 0; c < U.cols; ++c) std::swap(U.at(i, c), U.at(j, c));
  }
  void col_swap(int i, int j) {
    if (i == j) return;
    for (int r = 0; r < A.rows; ++r) std::swap(A.at(r, i), A.at(r, j));
    for (int r = 0; r < V.rows; ++r) std::swap(V.at(r, i), V.at(r, j));
  }
  void row_add(int dst, int src, i64 q) {  // row dst += q * row src
    if (q == 0) return;
    for (int c = 0; c < A.cols; ++c) A.at(dst, c) += q * A.at(src, c);
    for (int c = 0; c < U.cols; ++c) U.at(dst, c) += q * U.at(src, c);
  }
  void col_add(int dst, int src, i64 q) {
    if (q == 0) return;
    for (int r = 0; r < A.rows; ++r) A.at(r, dst) += q * A.at(r, src);
    for (int r = 0; r < V.rows; ++r) V.at(r, dst) += q * V.at(r, src);
  }
  void row_neg(int i) {
    for (int c = 0; c < A.cols; ++c) A.at(i, c) = -A.at(i, c);
    for (int c = 0; c < U.cols; ++c) U.at(i, c) = -U.at(i, c);
  }
};

}  // namespace

Snf smith(Mat A0) {
  SnfWorker w{std::move(A0), Mat::id(0), Mat::id(0)};
  w.U = Mat::id(w.A.rows);
  w.V = Mat::id(w.A.cols);
  int n = std::min(w.A.rows, w.A.cols);

  for (int t = 0; t < n; ++t) {
    // pick the nonzero entry of least magnitude as pivot
    int pi = -1, pj = -1;
    for (int i = t; i < w.A.rows; ++i)
      for (int j = t; j < w.A.cols; ++j) {
        i64 v = w.A.at(i, j);
        if (v == 0) continue;
        if (pi < 0 || std::llabs(v) < std::llabs(w.A.at(pi, pj))) { pi = i; pj = j; }
      }
    if (pi < 0) break;  // all zero from here on
    w.row_swap(t, pi);
    w.col_swap(t, pj);

    for (;;) {
      bool clean = true;
      for (int i = t + 1; i < w.A.rows; ++i) {
        i64 q = w.A.at(i, t) / w.A.at(t, t);
        w.row_add(i, t, -q);
        if (w.A.at(i, t) != 0) {  // remainder smaller than pivot: promote it
          w.row_swap(t, i);
          clean = false;
        }
      }
      for (int j = t + 1; j < w.A.cols; ++j) {
        i64 q = w.A.at(t, j) / w.A.at(t, t);
        w.col_add(j, t, -q);
        if (w.A.at(t, j) != 0) {
          w.col_swap(t, j);
          clean = false;
        }
      }
      if (!clean) continue;
      // pivot must divide the rest of the block for the chain condition
      int bi = -1;
      for (int i = t + 1; i < w.A.rows && bi < 0; ++i)
        for (int j = t + 1; j < w.A.cols; ++j)
          if (w.A.at(i, j) % w.A.at(t, t) != 0) { bi = i; break; }
      if (bi < 0) break;
      w.row_add(t, bi, 1);  // drag the offender into the pivot row, loop again
    }
    if (w.A.at(t, t) < 0) w.row_neg(t);
  }

  Snf out{w.U, w.A, w.V, 0};
  for (int t = 0; t < n; ++t)
    if (w.A.at(t, t) != 0) ++out.rank;
  return out;
}

std::optional<Vec> solve(const Mat& A, const Vec& b) {
  Snf s = smith(A);
  Vec y = mul(s.U, b);
  Vec z(A.cols, 0);
  for (int i = 0; i < A.rows; ++i) {
    i64 d = (i < std::min(A.rows, A.cols)) ? s.S.at(i, i) : 0;
    if (d == 0) {
      if (y[i] != 0) return std::nullopt;
    } else {
      if (y[i] % d != 0) return std::nullopt;
      z[i] = y[i] / d;
    }
  }
  return mul(s.V, z);
}

/**** abelian groups ****/

bool AbGroup::finite() const {
  return std::all_of(orders.begin(), orders.end(), [](i64 m) { return m != 0; });
}

i64 AbGroup::size() const {
  i64 p = 1;
  for (i64 m : orders) {
    if (m == 0) return 0;
    p *= m;
  }
  return p;
}

Vec AbGroup::reduce(Vec v) const {
  assert(v.size() == orders.size());
  for (size_t i = 0; i < v.size(); ++i) {
    if (orders[i] == 0) continue;
    v[i] %= orders[i];
    if (v[i] < 0) v[i] += orders[i];
  }
  return v;
}

bool AbGroup::is_zero(const Vec& v) const {
  Vec r = reduce(v);
  return std::all_of(r.begin(), r.end(), [](i64 x) { return x == 0; });
}

Vec vadd(const AbGroup& G, const Vec& x, const Vec& y) {
  Vec z(x);
  for (size_t i = 0; i < z.size(); ++i) z[i] += y[i];
  return G.reduce(z);
}

Vec vneg(const AbGroup& G, const Vec& x) {
  Vec z(x);
  for (auto& v : z) v = -v;
  return G.reduce(z);
}

Vec vscale(const AbGroup& G, i64 m, const Vec& x) {
  Vec z(x);
  for (auto& v : z) v *= m;
  return G.reduce(z);
}

Vec coker_invariants(const Mat& A, int rows) {
  Snf s = A.cols ? smith(A) : Snf{Mat::id(rows), Mat(rows, 0), Mat::id(0), 0};
  Vec inv;
  for (int i = 0; i < rows; ++i) {
    i64 d = (i < s.rank) ? s.S.at(i, i) : 0;
    if (d != 1) inv.push_back(d);
  }
  // finite factors already in divisibility order; move the 0s (free rank) last
  std::stable_partition(inv.begin(), inv.end(), [](i64 d) { return d != 0; });
  return inv;
}

/**** subgroups ****/

namespace {

// Columns spanning the lattice L(H) = <gens> + <orders * e_i> inside Z^n.
Mat lattice_of(const Subgroup& H) {
  return hcat(H.gens, Mat::diag(H.amb.orders));
}

// Basis for the integer kernel of A (columns x with A x = 0).
Mat int_kernel(const Mat& A) {
  if (A.cols == 0) return Mat(A.cols, 0);
  Snf s = smith(A);
  Mat K(A.cols, A.cols - s.rank);
  for (int j = s.rank; j < A.cols; ++j)
    for (int i = 0; i < A.cols; ++i) K.at(i, j - s.rank) = s.V.at(i, j);
  return K;
}

}  // namespace

Subgroup sub_trivial(const AbGroup& G) { return Subgroup{G, Mat(G.rank(), 0)}; }

Subgroup sub_full(const AbGroup& G) { return Subgroup{G, Mat::id(G.rank())}; }

Subgroup sub_span(const AbGroup& G, const std::vector<Vec>& gens) {
  std::vector<Vec> red;
  red.reserve(gens.size());
  for (const Vec& g : gens) {
    Vec r = G.reduce(g);
    if (!G.is_zero(r)) red.push_back(r);
  }
  return Subgroup{G, Mat::from_cols(G.rank(), red)};
}

bool sub_contains(const Subgroup& H, const Vec& v) {
  return solve(lattice_of(H), H.amb.reduce(v)).has_value();
}

bool sub_leq(const Subgroup& A, const Subgroup& B) {
  for (int j = 0; j < A.gens.cols; ++j)
    if (!sub_contains(B, A.gens.col(j))) return false;
  return true;
}

bool sub_eq(const Subgroup& A, const Subgroup& B) { return sub_leq(A, B) && sub_leq(B, A); }

Subgroup sub_sum(const Subgroup& A, const Subgroup& B) {
  assert(A.amb.orders == B.amb.orders);
  return Subgroup{A.amb, hcat(A.gens, B.gens)};
}

Subgroup sub_intersect(const Subgroup& A, const Subgroup& B) {
  assert(A.amb.orders == B.amb.orders);
  // A a = B b in the ambient group: kernel of [A | -B | diag m], read the a block
  Mat negB = B.gens;
  for (auto& v : negB.a) v = -v;
  Mat K = int_kernel(hcat(hcat(A.gens, negB), Mat::diag(A.amb.orders)));
  std::vector<Vec> gens;
  for (int j = 0; j < K.cols; ++j) {
    Vec a(A.gens.cols);
    for (int i = 0; i < A.gens.cols; ++i) a[i] = K.at(i, j);
    gens.push_back(A.amb.reduce(mul(A.gens, a)));
  }
  return sub_span(A.amb, gens);
}

Subgroup sub_scale(i64 m, const Subgroup& H) {
  Mat g = H.gens;
  for (auto& v : g.a) v *= m;
  return Subgroup{H.amb, g};
}

Vec sub_invariants(const Subgroup& H) {
  // relations among the generators: kernel of [gens | diag m] restricted to gens
  Mat K = int_kernel(lattice_of(H));
  Mat R(H.gens.cols, K.cols);
  for (int j = 0; j < K.cols; ++j)
    for (int i = 0; i < H.gens.cols; ++i) R.at(i, j) = K.at(i, j);
  return coker_invariants(R, H.gens.cols);
}

Vec quo_invariants(const Subgroup& H) { return coker_invariants(lattice_of(H), H.amb.rank()); }

i64 sub_order(const Subgroup& H) {
  i64 p = 1;
  for (i64 d : sub_invariants(H)) {
    if (d == 0) return 0;
    p *= d;
  }
  return p;
}

/**** cosets ****/

bool coset_contains(const Coset& c, const Vec& v) {
  Vec d(v);
  for (size_t i = 0; i < d.size(); ++i) d[i] -= c.rep[i];
  return sub_contains(c.sub, d);
}

bool coset_eq(const Coset& a, const Coset& b) {
  return sub_eq(a.sub, b.sub) && coset_contains(a, b.rep);
}

Coset coset_add(const Coset& a, const Coset& b) {
  Vec r(a.rep);
  for (size_t i = 0; i < r.size(); ++i) r[i] += b.rep[i];
  return Coset{a.sub.amb.reduce(r), sub_sum(a.sub, b.sub)};
}

/**** homomorphisms ****/

bool hom_well_defined(const Hom& h) {
  // m_j * f(e_j) must vanish in the codomain
  for (int j = 0; j < h.dom.rank(); ++j) {
    i64 m = h.dom.orders[j];
    if (m == 0) continue;
    Vec img = h.f.col(j);
    for (auto& v : img) v *= m;
    if (!h.cod.is_zero(img)) return false;
  }
  return true;
}

Vec hom_apply(const Hom& h, const Vec& x) { return h.cod.reduce(mul(h.f, x)); }

Subgroup hom_image(const Hom& h) { return Subgroup{h.cod, h.f}; }

Subgroup hom_image_of(const Hom& h, const Subgroup& H) {
  assert(H.amb.orders == h.dom.orders);
  return Subgroup{h.cod, mul(h.f, H.gens)};
}

Subgroup hom_preimage(const Hom& h, const Subgroup& S) {
  assert(S.amb.orders == h.cod.orders);
  // f x = S s + diag(m_cod) t : kernel of [f | -S | diag m_cod], read the x block
  Mat negS = S.gens;
  for (auto& v : negS.a) v = -v;
  Mat K = int_kernel(hcat(hcat(h.f, negS), Mat::diag(h.cod.orders)));
  std::vector<Vec> gens;
  for (int j = 0; j < K.cols; ++j) {
    Vec x(h.dom.rank());
    for (int i = 0; i < h.dom.rank(); ++i) x[i] = K.at(i, j);
    gens.push_back(h.dom.reduce(x));
  }
  return sub_span(h.dom, gens);
}

Subgroup hom_kernel(const Hom& h) { return hom_preimage(h, sub_trivial(h.cod)); }

std::optional<Vec> hom_section(const Hom& h, const Vec& y) {
  auto x = solve(hcat(h.f, Mat::diag(h.cod.orders)), h.cod.reduce(y));
  if (!x) return std::nullopt;
  Vec out(h.dom.rank());
  for (int i = 0; i < h.dom.rank(); ++i) out[i] = (*x)[i];
  return h.dom.reduce(out);
}

/**** brute-force oracles ****/

std::vector<Vec> enumerate_group(const AbGroup& G) {
  if (!G.finite()) throw std::invalid_argument("enumerate_group: infinite group");
  std::vector<Vec> all;
  Vec cur = G.zero();
  for (;;) {
    all.push_back(cur);
    int i = 0;
    while (i < G.rank()) {
      if (++cur[i] < G.orders[i]) break;
      cur[i] = 0;
      ++i;
    }
    if (i == G.rank()) break;
  }
  if (G.rank() == 0) return {Vec{}};
  return all;
}

std::vector<Vec> enumerate_span(const AbGroup& G, const std::vector<Vec>& gens) {
  std::set<Vec> seen;
  std::vector<Vec> queue{G.zero()};
  seen.insert(G.zero());
  while (!queue.empty()) {
    Vec v = queue.back();
    queue.pop_back();
    for (const Vec& g : gens) {
      Vec w = vadd(G, v, g);
      if (seen.insert(w).second) queue.push_back(w);
    }
  }
  return {seen.begin(), seen.end()};
}

bool same_element_set(std::vector<Vec> a, std::vector<Vec> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return a == b;
}

std::string show_invariants(const Vec& inv) {
  if (inv.empty()) return "0";
  std::string s;
  for (size_t i = 0; i < inv.size(); ++i) {
    if (i) s += " + ";
    s += inv[i] == 0 ? "Z" : "Z" + std::to_string(inv[i]);
  }
  return s;
}

}  // namespace stem31
