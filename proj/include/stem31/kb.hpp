#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "stem31/catalog.hpp"

namespace stem31 {

/*
 * Append-only store of established facts.  Axioms come straight from the
 * catalog; everything else is added by proof scripts and tagged with the
 * script that proved it.  Scripts only see axioms plus facts owned by
 * scripts in their (transitive) uses list, so the dependency order declared
 * in a script is what actually limits which knowledge it may lean on.
 */

struct Fact {
  std::string id;
  FactStmt st;
  bool axiom = false;
  std::string owner;  // proving script, empty for axioms
  std::string note;   // one line: which step established it
  int line = 0;       // catalog line for axioms
};

struct KB {
  const Catalog* cat = nullptr;
  std::vector<Fact> facts;
  std::map<std::string, size_t> by_id;

  void add_axioms(const Catalog& c);
  // Returns false on duplicate id.
  bool add(Fact f);
  const Fact* find(const std::string& id) const;

  // All facts visible to a script given the transitive closure of its uses.
  std::vector<const Fact*> visible(const std::set<std::string>& owners) const;
};

// Classify facts into the piles normalize() wants.  `out` must outlive use.
struct FactPiles {
  std::vector<const Fact*> eqs;
  std::vector<const Fact*> anns;
  std::vector<const Fact*> epis;
  std::vector<const Fact*> susps;
  std::vector<const Fact*> exps;
  std::vector<const Fact*> ords;
  CongEnv cong;
};

FactPiles pile_facts(const std::vector<const Fact*>& facts);

// lhs . pi(k, X) = 0 decomposition, if st has that shape.
struct AnnShape {
  EP prefix;
  int k = 0;
  Space sp;
};
std::optional<AnnShape> as_ann(const FactStmt& st);

// eq lhs = E(...) or eq E(...) = rhs; yields the non-suspension side.
std::optional<EP> as_susp_cert(const FactStmt& st);

}  // namespace stem31
