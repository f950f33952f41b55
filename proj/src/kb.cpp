#include "stem31/kb.hpp"

namespace stem31 {

void KB::add_axioms(const Catalog& c) {
  cat = &c;
  for (const auto& fr : c.facts) {
    Fact f;
    f.id = fr.id;
    f.st = fr.st;
    f.axiom = true;
    f.line = fr.line;
    add(std::move(f));
  }
}

bool KB::add(Fact f) {
  if (by_id.count(f.id)) return false;
  by_id[f.id] = facts.size();
  facts.push_back(std::move(f));
  return true;
}

const Fact* KB::find(const std::string& id) const {
  auto it = by_id.find(id);
  return it == by_id.end() ? nullptr : &facts[it->second];
}

std::vector<const Fact*> KB::visible(const std::set<std::string>& owners) const {
  std::vector<const Fact*> out;
  for (const auto& f : facts)
    if (f.axiom || owners.count(f.owner)) out.push_back(&f);
  return out;
}

std::optional<AnnShape> as_ann(const FactStmt& st) {
  if (st.k != FactStmt::K::Eq) return std::nullopt;
  if (!st.b || st.b->k != Expr::K::Zero) return std::nullopt;
  if (!st.a || st.a->k != Expr::K::Comp || st.a->sub.size() < 2) return std::nullopt;
  const EP& last = st.a->sub.back();
  if (last->k != Expr::K::PiSet) return std::nullopt;
  AnnShape sh;
  std::vector<EP> pre(st.a->sub.begin(), st.a->sub.end() - 1);
  sh.prefix = mk_comp(pre);
  sh.k = last->n;
  sh.sp = last->sp;
  return sh;
}

std::optional<EP> as_susp_cert(const FactStmt& st) {
  if (st.k != FactStmt::K::Eq) return std::nullopt;
  if (!st.a || !st.b) return std::nullopt;
  if (st.s) return std::nullopt;  // mod facts don't certify
  if (st.b->k == Expr::K::Susp) return st.a;
  if (st.a->k == Expr::K::Susp) return st.b;
  return std::nullopt;
}

FactPiles pile_facts(const std::vector<const Fact*>& facts) {
  FactPiles p;
  for (const Fact* f : facts) {
    switch (f->st.k) {
      case FactStmt::K::Eq:
        if (as_ann(f->st))
          p.anns.push_back(f);
        else if (!is_setvalued(f->st.a) && !is_setvalued(f->st.b))
          p.eqs.push_back(f);
        if (as_susp_cert(f->st)) p.susps.push_back(f);
        break;
      case FactStmt::K::Epi:
        p.epis.push_back(f);
        break;
      case FactStmt::K::OrderEq:
      case FactStmt::K::OrderDiv:
        p.ords.push_back(f);
        break;
      case FactStmt::K::ExpDiv:
        p.exps.push_back(f);
        break;
      case FactStmt::K::Cong:
        p.cong.cong[f->st.sym] = {f->st.mod, f->st.m};
        break;
      case FactStmt::K::OddSym:
        p.cong.odd_syms.insert(f->st.sym);
        break;
      default:
        break;
    }
  }
  return p;
}

}  // namespace stem31
