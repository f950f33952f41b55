#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "stem31/brackets.hpp"
#include "stem31/kb.hpp"

namespace stem31 {

/*
 * Proof scripts.  One directive per line, '#' comments:
 *
 *   script <id>
 *   uses <id> <id> ...
 *   proves <id> ...
 *   let <name> = <expr>
 *   step <kind> ...
 *   conclude [<name>:] <stmt>
 *
 * A script is a checked derivation, not a search: every step names the rule,
 * fact or law instance it leans on, and the executor refuses the step when
 * the cited justification does not apply.  What a script may cite is limited
 * to axioms plus conclusions of the scripts it declares under `uses`.
 *
 * The executor threads one of four states through the steps:
 *
 *   chain        a proven equality  start = current form
 *   membership   a set known to contain the thing under study, optionally
 *                sharpened to a coset  representative + span
 *   sum          a signed sum of sets that together contain zero
 *   congruence   a proven  a = b modulo a span
 *
 * Step kinds, with the state each one expects:
 *
 *   focus <expr>                      begin a chain at that expression
 *   gives <expr>                      chain: assert the current form
 *   rewrite <rule-id>[~] [at <k>]     apply that relation (~ = reversed)
 *                                     where it matches; `at` picks a sum part
 *   eq <fact-id>[~] [at <k>]         same, citing an equality fact; a fact
 *                                     whose left side names the whole current
 *                                     set replaces the set outright
 *   congr <fact-id>[~] [at a|b]      congruence: rewrite one side through a
 *                                     mod-span equality, widening the span
 *   normalize                         chain: replace by the engine normal form
 *   mono <map> by <fact-id>           strip the map off a proven equality or
 *                                     a pinned membership, citing injectivity
 *   exact ker <map> = <expr> by <id>  chain  map(x) = 0  plus the cited kernel
 *                                     fact turn into membership of x; on a
 *                                     membership it sharpens the coset instead
 *   wd <bracket>                      check both defining composites vanish
 *   indet <bracket> [= g, ... | = 0]  resolve the indeterminacy, optionally
 *                                     against an expected generating set
 *   mem <fact-id>                     start membership from a mem fact
 *   take <bracket>                    start membership from a bracket itself
 *   lcomp <expr> / rcomp <expr>       compose the tracked set on either side
 *   shuffle-left <expr> into <brk>    the shuffling and absorption laws,
 *   shuffle-right <brk> by <expr>     each checked on the spot including
 *   absorb-left <expr> into <brk>     well-definedness of the new bracket
 *   absorb-right <brk> by <expr>
 *   slide <brk> at <1|2>              move a factor or scalar one entry left
 *   scalar <brk> by <int>             compose a degree map on the right
 *   suspend [<brk>] [eq-by <id>]      suspend the set (or both chain sides);
 *                                     the cited epi upgrades it to equality
 *   relax <brk> to <int>              lower the bracket subscript
 *   subeq <brk> to <int>              raise it, when the indeterminacies agree
 *   split <brk> at <1|2|3>            split a sum entry into a sum of brackets
 *   entrynf <brk> at <k>              normalize entry k of the bracket
 *   entryrw <rule-id>[~] at <k>       rewrite inside entry k, citing a rule
 *   jacobi <e>, <e>, <e>, <e>, <e>    the three-bracket sum containing zero
 *   at <k> <step>                     run a step against part k of that sum
 *   extract <k>                       pin part k: the others must be cosets,
 *                                     so part k meets the negated total
 *   rep <fact-id> | rep 0             bracket membership into coset form, from
 *                                     a cited member (or the zero element)
 *   meet <fact-id>                    a pinned part meeting a known coset
 *                                     yields the congruence of the two reps
 *   same <fact-id>                    two members of a singleton set are equal
 *   order <expr> = <int> [by <id>]    record an element order for later steps
 *   group <space> <k> is <n>+<n>+...  check the resolved invariants
 *   cases <name> in {0, 1}            run the remaining steps once per value;
 *                                     the conclusions must not depend on it
 *
 * conclude checks the claim against the state (element equalities through
 * the normalizer and group resolution, set and coset claims through the
 * membership machinery) and must cover every id named under proves.  A
 * `name:` prefix lets later steps of the same script cite the conclusion.
 */

struct Step {
  enum class K {
    Let, Focus, Gives, Rewrite, EqFact, Congr, Normalize, Mono, ExactKer, Wd,
    Indet, Mem, Take, LComp, RComp, ShuffleL, ShuffleR, AbsorbL, AbsorbR, Slide,
    Scalar, Suspend, Relax, Subeq, Split, EntryNf, EntryRw, Jacobi, At, Extract,
    Rep, Meet, Same, Order, Group, Cases, Conclude
  };
  K k = K::Let;
  std::string id;        // cited rule/fact id, let/cases/conclusion name
  bool rev = false;      // reversed rule or fact direction
  EP e1, e2;             // expression operands (law target bracket in e1)
  std::vector<EP> list;  // jacobi entries, expected indeterminacy generators
  bool expect = false;   // indet: an expected set was written (empty = zero)
  std::optional<FactStmt> stmt;  // conclude
  MapRef map;                    // mono / exact ker
  i64 m = 0;                     // integers: scalar, subscripts, part index
  Space sp;                      // group check
  std::vector<i64> invs;         // group check invariants, cases values
  std::vector<Step> inner;       // At: the wrapped step
  int line = 0;
  std::string text;  // the source line, for reports
};

struct Script {
  std::string id;
  std::vector<std::string> uses;
  std::vector<std::string> proves;
  std::vector<Step> steps;
  std::string file;
};

Script parse_script(const std::string& text, const std::string& filename);  // throws LoadError
Script load_script(const std::string& path);

/**** execution ****/

struct StepLog {
  int line = 0;
  std::string text;
  std::string note;
};

struct RunResult {
  bool ok = false;
  std::string error;  // first failing step's complaint
  int fail_line = 0;
  std::vector<StepLog> log;
  std::vector<Fact> produced;           // fact conclusions, owner = script id
  std::vector<std::string> proved_rels; // relation targets certified here
};

// Rules and facts the script may cite: everything unowned plus everything
// owned by a script in the (transitive) uses closure.
struct Visibility {
  std::vector<CompiledRule> rules;
  std::vector<const Fact*> facts;
};

Visibility visible_for(const Catalog& cat, const std::vector<CompiledRule>& all_rules,
                       const KB& kb, const std::map<std::string, std::string>& owner_of,
                       const std::set<std::string>& use_closure);

RunResult run_script(const Script& sc, const Catalog& cat, const Visibility& vis);

}  // namespace stem31
