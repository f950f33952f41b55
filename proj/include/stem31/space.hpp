#pragma once

#include <optional>
#include <string>

namespace stem31 {

/*
 * The four space shapes the calculus runs over.
 *   S:  sphere S^n
 *   M:  mod 2 Moore space, cells in dimensions n-1 and n
 *   CP: suspended complex projective plane, cells in dimensions n and n+2
 *   MP: the pair (M^n, S^{n-1}), for relative groups
 */
struct Space {
  enum class K { S, M, CP, MP };
  K k = K::S;
  int n = 0;

  auto operator<=>(const Space&) const = default;
};

inline Space sphere(int n) { return Space{Space::K::S, n}; }

Space suspend(Space x, int t);
std::string show_space(const Space& s);
std::optional<Space> parse_space(const std::string& tok);

// A class is treated as a map dom -> cod; an element of pi_k(X) has
// dom = S^k, cod = X.
struct Deg {
  Space dom, cod;
  auto operator<=>(const Deg&) const = default;
};

inline Deg pi_deg(int k, Space x) { return Deg{sphere(k), x}; }
std::string show_deg(const Deg& d);

}  // namespace stem31
