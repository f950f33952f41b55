#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "stem31/facts.hpp"

namespace stem31 {

/*
 * Catalog file records, one per line, '#' comments:
 *
 *   space <token>
 *   class <name> ( <inst> ) : <degree> order <INT|?> [susp_of <name> ( <inst> )] src "..."
 *       <degree> is pi(k, X) or hom(X, Y)
 *   group <space> <k> = <summand> + ... + <summand> src "..."
 *       summand: <order>{<expr>} | G{<expr>} | G2{<expr>, <expr>} | 0 | ...
 *       G marks a summand of order 1 or 2, unresolved; G2 marks a pair
 *       generating either Z2+Z2 or Z4 (second = twice the first); a trailing
 *       ... marks a partial presentation.
 *   rel <id> : <expr> => <expr> [when <stmt> (, <stmt>)*] src "..."
 *   bracket <id> : <bracket-expr> (eq <expr> | ni <expr> | sub <expr>) src "..."
 *   fact <id> : <stmt> src "..."
 */

struct ClassRec {
  std::string name;
  int inst = 0;
  Deg deg;
  std::optional<i64> order;  // nullopt = '?', 0 = infinite
  std::optional<std::pair<std::string, int>> susp_of;
  std::string src;
  int line = 0;
};

struct Summand {
  enum class K { Num, G1, G2 };
  K k = K::Num;
  i64 order = 0;
  EP gen, gen2;  // gen2 only for G2
};

struct GroupRec {
  Space space;
  int k = 0;
  std::vector<Summand> summands;
  bool partial = false;
  std::string src;
  int line = 0;
};

struct RelRec {
  std::string id;
  EP lhs, rhs;
  std::vector<FactStmt> conds;
  std::string src;
  int line = 0;
};

struct FactRec {
  std::string id;
  FactStmt st;
  bool from_bracket = false;  // written with the bracket record syntax
  std::string src;
  int line = 0;
};

struct Catalog {
  std::vector<std::string> spaces;
  std::map<std::pair<std::string, int>, ClassRec> classes;
  std::map<std::string, std::set<int>> families;  // name -> declared instances
  std::vector<GroupRec> groups;
  std::map<std::pair<Space, int>, size_t> group_index;
  std::vector<RelRec> rels;  // file order: this is the rewrite strategy order
  std::map<std::string, size_t> rel_index;
  std::vector<FactRec> facts;
  std::map<std::string, size_t> fact_index;

  const GroupRec* group(Space x, int k) const;
  const RelRec* rel(const std::string& id) const;
  const FactRec* fact(const std::string& id) const;
};

/*
 * Resolved per-instance class information.  Instances above the top
 * declared one are implied suspensions when the top record is itself a
 * suspension; their order is then only an upper bound in the divisibility
 * sense (suspension can shrink an order, never grow it).
 */
struct ClassInfo {
  Deg deg;
  std::optional<i64> order;
  bool order_exact = true;
  const ClassRec* base = nullptr;
  int shift = 0;  // instance minus base instance
};

std::optional<ClassInfo> class_info(const Catalog& cat, const std::string& name, int inst);
// True when E^(j-i) carries (name,i) to (name,j) along declared susp_of links.
bool suspends_to(const Catalog& cat, const std::string& name, int i, int j);

struct LoadError {
  std::string msg;  // includes file:line positions, one per line
};

Catalog load_catalog(const std::string& path);         // throws LoadError
Catalog parse_catalog(const std::string& text, const std::string& filename);
std::string show_catalog(const Catalog& cat);          // canonical serialization

/**** degrees ****/

struct DegRes {
  enum class K { Ok, Any, Err };
  K k = K::Err;
  Deg d;
  std::string err;

  bool ok() const { return k != K::Err; }
};

DegRes deg_of(const Catalog& cat, const EP& e);
// Degree check for an equation or membership: both sides must agree.
std::optional<std::string> deg_mismatch(const Catalog& cat, const EP& a, const EP& b);

}  // namespace stem31
