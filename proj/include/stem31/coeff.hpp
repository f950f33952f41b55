#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "stem31/abelian.hpp"

namespace stem31 {

/*
 * Integer coefficient carrying exactly the ambiguity the composition
 * calculus runs into: an affine part in named integer unknowns, a product
 * of unspecified odd units (an "x odd" scalar from the literature), and an
 * unresolved global sign.  A coefficient stands for the set of integers
 *   { pm (n + sum lin[s]*s) * (product of odd values) }.
 */
struct Coeff {
  i64 n = 1;
  std::map<std::string, i64> lin;
  std::vector<std::string> odd;  // sorted multiset
  bool pm = false;

  bool is_const() const { return lin.empty(); }
  bool is_zero() const { return n == 0 && lin.empty(); }
  bool is_plain() const { return lin.empty() && odd.empty() && !pm; }
  bool is_one() const { return n == 1 && is_plain(); }

  auto operator<=>(const Coeff&) const = default;
};

Coeff coeff_int(i64 n);
Coeff coeff_sym(const std::string& s);       // the unknown integer s
Coeff coeff_odd(const std::string& s);       // the unknown odd unit s
Coeff coeff_neg(Coeff c);
Coeff coeff_scale(i64 m, Coeff c);

// nullopt when the product would need a symbol-by-symbol term.
std::optional<Coeff> coeff_mul(const Coeff& a, const Coeff& b);
// Merge for terms sharing a factor chain; nullopt when the ambiguity
// flags make the sum unrepresentable (kept as separate terms instead).
std::optional<Coeff> coeff_add(const Coeff& a, const Coeff& b);

std::string coeff_show(const Coeff& c);

/*
 * What is known about the unknowns: congruences sym = r (mod m) with m a
 * power of two, and oddness marks.  Grows as order arguments fire.
 */
struct CongEnv {
  struct Rule {
    i64 mod = 1, residue = 0;
  };
  std::map<std::string, Rule> cong;
  std::set<std::string> odd_syms;

  bool known_odd(const std::string& s) const;
};

// True when every integer the coefficient can stand for is divisible by d.
bool coeff_divisible(const Coeff& c, i64 d, const CongEnv& env);
// Constant value when there is no ambiguity left at all.
std::optional<i64> coeff_value(const Coeff& c);
Coeff coeff_subst(const Coeff& c, const std::string& sym, i64 val);
// Every residue mod d the coefficient can take (d > 0), or nullopt when a
// free symbol survives the environment.
std::optional<std::set<i64>> coeff_residues(const Coeff& c, i64 d, const CongEnv& env);

}  // namespace stem31
