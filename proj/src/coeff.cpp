#include "stem31/coeff.hpp"

#include <algorithm>

#include <fmt/format.h>
#include <fmt/ranges.h>

namespace stem31 {

Coeff coeff_int(i64 n) {
  Coeff c;
  c.n = n;
  return c;
}

Coeff coeff_sym(const std::string& s) {
  Coeff c;
  c.n = 0;
  c.lin[s] = 1;
  return c;
}

Coeff coeff_odd(const std::string& s) {
  Coeff c;
  c.odd.push_back(s);
  return c;
}

Coeff coeff_neg(Coeff c) {
  c.n = -c.n;
  for (auto& [s, v] : c.lin) v = -v;
  return c;
}

Coeff coeff_scale(i64 m, Coeff c) {
  c.n *= m;
  for (auto& [s, v] : c.lin) v *= m;
  return c;
}

std::optional<Coeff> coeff_mul(const Coeff& a, const Coeff& b) {
  if (!a.lin.empty() && !b.lin.empty()) return std::nullopt;  // no bilinear terms
  Coeff c;
  c.pm = a.pm || b.pm;
  c.odd = a.odd;
  c.odd.insert(c.odd.end(), b.odd.begin(), b.odd.end());
  std::sort(c.odd.begin(), c.odd.end());
  c.n = a.n * b.n;
  c.lin.clear();
  for (auto& [s, v] : a.lin) c.lin[s] = v * b.n;
  for (auto& [s, v] : b.lin) c.lin[s] = v * a.n;
  std::erase_if(c.lin, [](const auto& kv) { return kv.second == 0; });
  return c;
}

std::optional<Coeff> coeff_add(const Coeff& a, const Coeff& b) {
  // same ambiguity decoration on both sides, else the sum is not a Coeff
  if (a.odd != b.odd || a.pm != b.pm) return std::nullopt;
  if (a.pm && !(a.n == b.n && a.lin == b.lin)) return std::nullopt;
  Coeff c = a;
  c.n += b.n;
  for (auto& [s, v] : b.lin) {
    c.lin[s] += v;
    if (c.lin[s] == 0) c.lin.erase(s);
  }
  return c;
}

std::string coeff_show(const Coeff& c) {
  std::vector<std::string> pieces;
  if (c.pm) pieces.push_back("pm");
  if (c.lin.empty()) {
    if (c.n != 1 || c.pm || c.odd.empty()) pieces.push_back(std::to_string(c.n));
  } else {
    std::string aff;
    if (c.n != 0) aff = std::to_string(c.n);
    for (auto& [s, v] : c.lin) {
      if (!aff.empty()) aff += "+";
      if (v != 1) aff += std::to_string(v) + " ";
      aff += fmt::format("sym[{}]", s);
    }
    pieces.push_back(c.lin.size() > 1 || c.n != 0 ? "(" + aff + ")" : aff);
  }
  for (auto& s : c.odd) pieces.push_back(fmt::format("odd[{}]", s));
  return fmt::format("{}", fmt::join(pieces, " "));
}

bool CongEnv::known_odd(const std::string& s) const {
  if (odd_syms.count(s)) return true;
  auto it = cong.find(s);
  return it != cong.end() && it->second.mod % 2 == 0 && it->second.residue % 2 != 0;
}

bool coeff_divisible(const Coeff& c, i64 d, const CongEnv& env) {
  if (d == 0) return c.is_zero();
  d = std::llabs(d);
  if (d == 1) return true;
  // odd units and pm cannot affect divisibility by anything we test against
  if (c.n % d != 0) return false;
  for (auto& [s, v] : c.lin) {
    auto it = env.cong.find(s);
    if (it != env.cong.end()) {
      if ((v * it->second.residue) % d == 0 && (v * it->second.mod) % d == 0) continue;
      return false;
    }
    if (v % d != 0) return false;  // symbol unconstrained: need d | v outright
  }
  return true;
}

std::optional<i64> coeff_value(const Coeff& c) {
  if (!c.lin.empty()) return std::nullopt;
  if (c.n == 0) return 0;
  if (!c.odd.empty() || c.pm) return std::nullopt;
  return c.n;
}

Coeff coeff_subst(const Coeff& c, const std::string& sym, i64 val) {
  Coeff out = c;
  auto it = out.lin.find(sym);
  if (it != out.lin.end()) {
    out.n += it->second * val;
    out.lin.erase(it);
  }
  return out;
}

std::optional<std::set<i64>> coeff_residues(const Coeff& c, i64 d, const CongEnv& env) {
  if (d <= 0) return std::nullopt;
  auto md = [&](i64 x) { return ((x % d) + d) % d; };
  std::set<i64> S{md(c.n)};
  // each constrained symbol contributes an arithmetic progression mod d
  for (const auto& [s, v] : c.lin) {
    if (v % d == 0) continue;
    std::set<i64> contrib;
    auto cg = env.cong.find(s);
    if (cg != env.cong.end()) {
      for (i64 t = 0; t < d; ++t)
        if (!contrib.insert(md(v * (cg->second.residue + cg->second.mod * t))).second) break;
    } else if (env.known_odd(s)) {
      for (i64 u = 1; u < 2 * d; u += 2) contrib.insert(md(v * u));
    } else {
      return std::nullopt;
    }
    std::set<i64> T;
    for (i64 a : S)
      for (i64 b : contrib) T.insert(md(a + b));
    S = std::move(T);
  }
  if (!c.odd.empty()) {
    std::set<i64> T;
    for (i64 u = 1; u < 2 * d; u += 2)
      for (i64 s : S) T.insert(md(s * u));
    S = T;
  }
  if (c.pm) {
    std::set<i64> T = S;
    for (i64 s : S) T.insert(md(-s));
    S = T;
  }
  return S;
}

}  // namespace stem31
