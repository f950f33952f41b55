#pragma once

#include <string>

#include "stem31/expr.hpp"

namespace stem31 {

/*
 * Statements the engine can hold as knowledge or prove as conclusions.
 *
 *   eq <expr> = <expr>                  equality (element- or set-valued)
 *   eq <expr> = <expr> mod <expr>       congruence modulo the span of a set
 *   mem <expr> in <expr>                membership in a set-valued expression
 *   sub <expr> <= <expr>                set containment
 *   order <expr> = <INT>                exact order
 *   order <expr> | <INT>                order divides
 *   exponent pi(k, X) | <INT>           the whole group is killed by INT
 *   mono <map> pi(k, X)                 map injective on that group
 *   epi <map> pi(k, X) = pi(k', X')     image is the whole target group
 *   ker <map> pi(k, X) = <expr>         kernel equals the given set
 *   cong <name> = <INT> mod <INT>       congruence on an integer unknown
 *   odd <name>                          the unknown is odd
 *
 * <map> is E, E^t, H, P, bd (pair boundary) or relE (relative suspension).
 */

struct MapRef {
  enum class K { E, H, P, Bd, RelE };
  K k = K::E;
  int t = 1;  // only for E

  auto operator<=>(const MapRef&) const = default;
};

struct FactStmt {
  enum class K { Eq, CosetEq, Mem, SubLeq, OrderEq, OrderDiv, ExpDiv, Mono, Epi, Ker, Cong, OddSym };
  K k = K::Eq;
  EP a, b, s;  // operands; s is the mod-part / kernel set
  MapRef map;
  i64 m = 0, mod = 0;
  std::string sym;
};

MapRef parse_map(Parser& p);
FactStmt parse_stmt(Parser& p);
FactStmt parse_stmt_str(const std::string& s);
std::string show_stmt(const FactStmt& st, Style style = Style::Plain);
std::string show_map(const MapRef& m);

}  // namespace stem31
