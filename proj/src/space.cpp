#include "stem31/space.hpp"

#include <cctype>

namespace stem31 {

Space suspend(Space x, int t) {
  x.n += t;
  return x;
}

std::string show_space(const Space& s) {
  switch (s.k) {
    case Space::K::S: return "S" + std::to_string(s.n);
    case Space::K::M: return "M" + std::to_string(s.n);
    case Space::K::CP: return "CP" + std::to_string(s.n);
    case Space::K::MP: return "MP" + std::to_string(s.n);
  }
  return "?";
}

std::optional<Space> parse_space(const std::string& tok) {
  size_t p = 0;
  Space::K k;
  if (tok.rfind("CP", 0) == 0) { k = Space::K::CP; p = 2; }
  else if (tok.rfind("MP", 0) == 0) { k = Space::K::MP; p = 2; }
  else if (!tok.empty() && tok[0] == 'S') { k = Space::K::S; p = 1; }
  else if (!tok.empty() && tok[0] == 'M') { k = Space::K::M; p = 1; }
  else return std::nullopt;
  if (p >= tok.size()) return std::nullopt;
  int n = 0;
  for (; p < tok.size(); ++p) {
    if (!std::isdigit(static_cast<unsigned char>(tok[p]))) return std::nullopt;
    n = n * 10 + (tok[p] - '0');
  }
  return Space{k, n};
}

std::string show_deg(const Deg& d) {
  if (d.dom.k == Space::K::S)
    return "pi(" + std::to_string(d.dom.n) + ", " + show_space(d.cod) + ")";
  return "hom(" + show_space(d.dom) + ", " + show_space(d.cod) + ")";
}

}  // namespace stem31
