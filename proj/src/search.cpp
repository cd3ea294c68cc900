#include "auditlog/search.hpp"

#include <algorithm>

namespace auditlog {

namespace {

ProofTerm make(Rule r) {
  ProofTerm t;
  t.rule = r;
  return t;
}

ProofTerm make1(Rule r, ProofTerm child) {
  ProofTerm t;
  t.rule = r;
  t.children.push_back(std::move(child));
  return t;
}

// Swap indices that move item i to the last position of an n-item context,
// in the order they apply to the conclusion.
std::vector<std::size_t> swaps_to_back(std::size_t i, std::size_t n) {
  std::vector<std::size_t> out;
  for (std::size_t k = i; k + 1 < n; ++k) out.push_back(k);
  return out;
}

// Swap indices realizing a stable partition: marked items first, order kept.
std::vector<std::size_t> partition_swaps(std::vector<bool> mask) {
  std::vector<std::size_t> out;
  std::size_t target = 0;
  for (;;) {
    std::size_t q = target;
    while (q < mask.size() && !mask[q]) ++q;
    if (q >= mask.size()) break;
    for (std::size_t k = q; k > target; --k) {
      out.push_back(k - 1);
      std::swap(mask[k - 1], mask[k]);
    }
    ++target;
  }
  return out;
}

ProofTerm wrap_swaps(Rule perm_rule, const std::vector<std::size_t>& swaps, ProofTerm inner) {
  for (auto it = swaps.rbegin(); it != swaps.rend(); ++it) {
    ProofTerm p = make1(perm_rule, std::move(inner));
    p.position = *it;
    inner = std::move(p);
  }
  return inner;
}

template <typename T>
void apply_swaps(std::vector<T>& items, const std::vector<std::size_t>& swaps) {
  for (std::size_t idx : swaps) std::swap(items[idx], items[idx + 1]);
}

std::set<std::string> names_of(const Sequent& s) {
  std::set<std::string> out;
  out.insert(s.reasoner.name);
  for (const auto& g : s.gamma) {
    if (g.kind == NonLinItem::Kind::Pol)
      collect_names(*g.pol, out);
    else
      collect_names(g.act, out);
  }
  for (const auto& d : s.delta) collect_names(d.act, out);
  collect_names(*s.goal, out);
  return out;
}

struct Searcher {
  const ActionRegistry& reg;
  const SignatureTable& sigs;

  std::optional<OpDerivation> build_op(const std::vector<NonLinItem>& gamma, const PolicyRef& p,
                                       const AgentId& reasoner) {
    auto find_owns = [&](const Term& data) -> std::optional<std::size_t> {
      for (std::size_t i = 0; i < gamma.size(); ++i) {
        const NonLinItem& it = gamma[i];
        if (it.kind == NonLinItem::Kind::Pol && it.pol->kind() == Policy::Kind::Owns) {
          const auto& o = it.pol->as_owns();
          if (o.data == data && o.owner.is_agent(reasoner)) return i;
        }
      }
      return std::nullopt;
    };
    OpDerivation od;
    switch (p->kind()) {
      case Policy::Kind::CondImplies: {
        auto child = build_op(gamma, p->as_cond().body, reasoner);
        if (!child) return std::nullopt;
        od.rule = OpDerivation::Rule::CondImp;
        od.children.push_back(std::move(*child));
        return od;
      }
      case Policy::Kind::ObligImplies: {
        auto child = build_op(gamma, p->as_oblig().body, reasoner);
        if (!child) return std::nullopt;
        od.rule = OpDerivation::Rule::ObligImp;
        od.children.push_back(std::move(*child));
        return od;
      }
      case Policy::Kind::And: {
        auto l = build_op(gamma, p->as_and().lhs, reasoner);
        if (!l) return std::nullopt;
        auto r = build_op(gamma, p->as_and().rhs, reasoner);
        if (!r) return std::nullopt;
        od.rule = OpDerivation::Rule::And;
        od.children.push_back(std::move(*l));
        od.children.push_back(std::move(*r));
        return od;
      }
      case Policy::Kind::SaysTo: {
        auto child = build_op(gamma, p->as_says().body, reasoner);
        if (!child) return std::nullopt;
        od.rule = OpDerivation::Rule::Says;
        od.children.push_back(std::move(*child));
        return od;
      }
      case Policy::Kind::Forall: {
        std::set<std::string> taken;
        for (const auto& g : gamma) {
          if (g.kind == NonLinItem::Kind::Pol)
            collect_names(*g.pol, taken);
          else
            collect_names(g.act, taken);
        }
        collect_names(*p, taken);
        taken.insert(reasoner.name);
        const auto& fa = p->as_forall();
        std::string eigen = fresh_name(fa.binder.name(), taken);
        Term e = fa.binder.sort() == Sort::Agent ? Term::agent_const(eigen) : Term::data_const(eigen);
        auto child = build_op(gamma, substitute(fa.body, fa.binder, e), reasoner);
        if (!child) return std::nullopt;
        od.rule = OpDerivation::Rule::Forall;
        od.eigen = eigen;
        od.children.push_back(std::move(*child));
        return od;
      }
      case Policy::Kind::Owns: {
        auto idx = find_owns(p->as_owns().data);
        if (!idx) return std::nullopt;
        od.rule = OpDerivation::Rule::Owns;
        od.owns_indices.push_back(*idx);
        return od;
      }
      case Policy::Kind::Atom: {
        const PredicateSignature* sig = sigs.find(p->as_atom().pred);
        if (!sig) return std::nullopt;
        od.rule = OpDerivation::Rule::Atom;
        for (std::size_t pos : sig->affected_data) {
          auto idx = find_owns(p->as_atom().args.at(pos));
          if (!idx) return std::nullopt;
          od.owns_indices.push_back(*idx);
        }
        return od;
      }
      case Policy::Kind::PayloadHole:
        return std::nullopt;
    }
    return std::nullopt;
  }

  std::vector<Term> witness_candidates(const Sequent& s, Sort sort) {
    std::set<Term> seen;
    auto scan_term = [&](const Term& t) {
      if (!t.is_var() && t.sort() == sort) seen.insert(t);
    };
    // walk everything; variables are skipped
    std::vector<PolicyRef> stack;
    auto scan_action = [&](const ActionTemplate& a) {
      for (const auto& t : a.args) scan_term(t);
      if (a.payload) stack.push_back(a.payload);
    };
    for (const auto& g : s.gamma) {
      if (g.kind == NonLinItem::Kind::Pol)
        stack.push_back(g.pol);
      else
        scan_action(g.act);
    }
    for (const auto& d : s.delta) scan_action(d.act);
    stack.push_back(s.goal);
    while (!stack.empty()) {
      PolicyRef p = stack.back();
      stack.pop_back();
      switch (p->kind()) {
        case Policy::Kind::Atom:
          for (const auto& t : p->as_atom().args) scan_term(t);
          break;
        case Policy::Kind::Owns:
          scan_term(p->as_owns().owner);
          scan_term(p->as_owns().data);
          break;
        case Policy::Kind::SaysTo:
          scan_term(p->as_says().speaker);
          scan_term(p->as_says().target);
          stack.push_back(p->as_says().body);
          break;
        case Policy::Kind::And:
          stack.push_back(p->as_and().lhs);
          stack.push_back(p->as_and().rhs);
          break;
        case Policy::Kind::CondImplies:
          stack.push_back(p->as_cond().cond);
          stack.push_back(p->as_cond().body);
          break;
        case Policy::Kind::ObligImplies:
          scan_action(p->as_oblig().req.action);
          stack.push_back(p->as_oblig().body);
          break;
        case Policy::Kind::Forall:
          stack.push_back(p->as_forall().body);
          break;
        case Policy::Kind::PayloadHole:
          break;
      }
    }
    return std::vector<Term>(seen.begin(), seen.end());
  }

  // Move gamma item i to the back, producing the permuted sequent and a
  // wrapper that prefixes the emitted proof with the matching perms.
  Sequent select_gamma(const Sequent& s, std::size_t i, std::vector<std::size_t>& swaps) {
    swaps = swaps_to_back(i, s.gamma.size());
    Sequent out = s;
    apply_swaps(out.gamma, swaps);
    return out;
  }

  Sequent select_delta(const Sequent& s, std::size_t j, std::vector<std::size_t>& swaps) {
    swaps = swaps_to_back(j, s.delta.size());
    Sequent out = s;
    apply_swaps(out.delta, swaps);
    return out;
  }

  std::optional<ProofTerm> prove(const Sequent& s, int depth) {
    if (depth <= 0) return std::nullopt;
    const std::size_t n = s.gamma.size();

    // init on any matching policy item
    for (std::size_t i = 0; i < n; ++i) {
      const NonLinItem& it = s.gamma[i];
      if (it.kind == NonLinItem::Kind::Pol && alpha_eq(it.pol, s.goal)) {
        std::vector<std::size_t> swaps = swaps_to_back(i, n);
        return wrap_swaps(Rule::PermL, swaps, make(Rule::Init));
      }
    }

    // fresh policy creation from owned data
    if (auto od = build_op(s.gamma, s.goal, s.reasoner)) {
      ProofTerm t = make(Rule::DerPol);
      t.op = std::move(*od);
      return t;
    }

    // right rules
    switch (s.goal->kind()) {
      case Policy::Kind::CondImplies: {
        Sequent premise = s;
        premise.gamma.push_back(NonLinItem::policy(s.goal->as_cond().cond));
        premise.goal = s.goal->as_cond().body;
        if (auto sub = prove(premise, depth - 1)) return make1(Rule::ImpR, std::move(*sub));
        break;
      }
      case Policy::Kind::ObligImplies: {
        Sequent premise = s;
        premise.goal = s.goal->as_oblig().body;
        Rule r = s.goal->as_oblig().req.mode == ObligMode::Once ? Rule::BangImpR : Rule::QuestImpR;
        if (auto sub = prove(premise, depth - 1)) return make1(r, std::move(*sub));
        break;
      }
      case Policy::Kind::Forall: {
        const auto& fa = s.goal->as_forall();
        std::string eigen = fresh_name(fa.binder.name(), names_of(s));
        Term e = fa.binder.sort() == Sort::Agent ? Term::agent_const(eigen) : Term::data_const(eigen);
        Sequent premise = s;
        premise.goal = substitute(fa.body, fa.binder, e);
        if (auto sub = prove(premise, depth - 1)) {
          ProofTerm t = make1(fa.binder.sort() == Sort::Agent ? Rule::ForallRAgent : Rule::ForallRData,
                              std::move(*sub));
          t.eigen = eigen;
          return t;
        }
        break;
      }
      default:
        break;
    }

    // left rules, one context item at a time
    for (std::size_t i = 0; i < n; ++i) {
      const NonLinItem& it = s.gamma[i];
      std::vector<std::size_t> swaps;
      switch (it.kind) {
        case NonLinItem::Kind::Act: {
          PolicyRef c = concl(it.act, s.reasoner, reg);
          if (!c) break;
          Sequent premise = select_gamma(s, i, swaps);
          premise.gamma.back() = NonLinItem::policy(c);
          if (auto sub = prove(premise, depth - 1))
            return wrap_swaps(Rule::PermL, swaps, make1(Rule::ObsAct, std::move(*sub)));
          break;
        }
        case NonLinItem::Kind::ManyOblig: {
          Sequent premise = select_gamma(s, i, swaps);
          premise.gamma.pop_back();
          premise.goal = Policy::oblig_implies(Requirement{ObligMode::Many, it.act}, s.goal);
          if (auto sub = prove(premise, depth - 1))
            return wrap_swaps(Rule::PermL, swaps, make1(Rule::QuestImpL, std::move(*sub)));
          break;
        }
        case NonLinItem::Kind::Pol: {
          switch (it.pol->kind()) {
            case Policy::Kind::SaysTo: {
              const auto& says = it.pol->as_says();
              if (says.target.is_agent(s.reasoner)) {
                Sequent premise = select_gamma(s, i, swaps);
                premise.gamma.back() = NonLinItem::policy(says.body);
                if (auto sub = prove(premise, depth - 1))
                  return wrap_swaps(Rule::PermL, swaps, make1(Rule::Say, std::move(*sub)));
              }
              // refine: conclude says(A, psi, B) from says(A, phi, B)
              if (s.goal->kind() == Policy::Kind::SaysTo && says.speaker.is_agent(s.reasoner) &&
                  says.speaker == s.goal->as_says().speaker && says.target == s.goal->as_says().target) {
                Sequent premise;
                premise.reasoner = s.reasoner;
                premise.gamma.push_back(NonLinItem::policy(says.body));
                premise.goal = s.goal->as_says().body;
                if (auto sub = prove(premise, depth - 1)) {
                  swaps = swaps_to_back(i, n);
                  return wrap_swaps(Rule::PermL, swaps, make1(Rule::Refine, std::move(*sub)));
                }
              }
              break;
            }
            case Policy::Kind::And: {
              for (Rule r : {Rule::AndL1, Rule::AndL2}) {
                Sequent premise = select_gamma(s, i, swaps);
                premise.gamma.back() = NonLinItem::policy(
                    r == Rule::AndL1 ? it.pol->as_and().lhs : it.pol->as_and().rhs);
                if (auto sub = prove(premise, depth - 1))
                  return wrap_swaps(Rule::PermL, swaps, make1(r, std::move(*sub)));
              }
              break;
            }
            case Policy::Kind::Forall: {
              const auto& fa = it.pol->as_forall();
              for (const Term& w : witness_candidates(s, fa.binder.sort())) {
                Sequent premise = select_gamma(s, i, swaps);
                premise.gamma.back() = NonLinItem::policy(substitute(fa.body, fa.binder, w));
                if (auto sub = prove(premise, depth - 1)) {
                  ProofTerm t = make1(fa.binder.sort() == Sort::Agent ? Rule::ForallLAgent
                                                                      : Rule::ForallLData,
                                      std::move(*sub));
                  t.witness = w;
                  return wrap_swaps(Rule::PermL, swaps, std::move(t));
                }
              }
              break;
            }
            case Policy::Kind::CondImplies: {
              // move the implication to the back, then split the rest
              Sequent moved = select_gamma(s, i, swaps);
              const auto& imp = moved.gamma.back().pol->as_cond();
              std::size_t rest = moved.gamma.size() - 1;
              for (std::uint64_t gmask = 0; gmask < (1ull << rest); ++gmask) {
                for (std::uint64_t dmask = 0; dmask < (1ull << moved.delta.size()); ++dmask) {
                  std::vector<bool> gsel(rest), dsel(moved.delta.size());
                  for (std::size_t k = 0; k < rest; ++k) gsel[k] = gmask & (1ull << k);
                  for (std::size_t k = 0; k < moved.delta.size(); ++k) dsel[k] = dmask & (1ull << k);
                  auto gswaps = partition_swaps(gsel);
                  auto dswaps = partition_swaps(dsel);
                  Sequent arranged = moved;
                  std::vector<NonLinItem> rest_items(arranged.gamma.begin(),
                                                     arranged.gamma.end() - 1);
                  apply_swaps(rest_items, gswaps);
                  rest_items.push_back(arranged.gamma.back());
                  arranged.gamma = rest_items;
                  apply_swaps(arranged.delta, dswaps);
                  std::size_t gsplit = std::count(gsel.begin(), gsel.end(), true);
                  std::size_t dsplit = std::count(dsel.begin(), dsel.end(), true);
                  Sequent left;
                  left.reasoner = s.reasoner;
                  left.gamma.assign(arranged.gamma.begin(), arranged.gamma.begin() + gsplit);
                  left.delta.assign(arranged.delta.begin(), arranged.delta.begin() + dsplit);
                  left.goal = imp.cond;
                  auto lsub = prove(left, depth - 1);
                  if (!lsub) continue;
                  Sequent right;
                  right.reasoner = s.reasoner;
                  right.gamma.assign(arranged.gamma.begin() + gsplit, arranged.gamma.end() - 1);
                  right.gamma.push_back(NonLinItem::policy(imp.body));
                  right.delta.assign(arranged.delta.begin() + dsplit, arranged.delta.end());
                  right.goal = s.goal;
                  auto rsub = prove(right, depth - 1);
                  if (!rsub) continue;
                  ProofTerm t;
                  t.rule = Rule::ImpL;
                  t.gamma_split = gsplit;
                  t.delta_split = dsplit;
                  t.children.push_back(std::move(*lsub));
                  t.children.push_back(std::move(*rsub));
                  ProofTerm inner = wrap_swaps(Rule::PermAct, dswaps, std::move(t));
                  // gamma swaps act on positions before the implication moved back
                  inner = wrap_swaps(Rule::PermL, gswaps, std::move(inner));
                  return wrap_swaps(Rule::PermL, swaps, std::move(inner));
                }
              }
              break;
            }
            default:
              break;
          }
          break;
        }
      }
    }

    // use-once obligations from the linear context
    for (std::size_t j = 0; j < s.delta.size(); ++j) {
      std::vector<std::size_t> swaps;
      Sequent premise = select_delta(s, j, swaps);
      LinItem consumed = premise.delta.back();
      premise.delta.pop_back();
      premise.goal = Policy::oblig_implies(Requirement{ObligMode::Once, consumed.act}, s.goal);
      if (auto sub = prove(premise, depth - 1))
        return wrap_swaps(Rule::PermAct, swaps, make1(Rule::BangImpL, std::move(*sub)));
    }

    // conjunction on the right, with context splits (tried last)
    if (s.goal->kind() == Policy::Kind::And) {
      for (std::uint64_t gmask = 0; gmask < (1ull << n); ++gmask) {
        for (std::uint64_t dmask = 0; dmask < (1ull << s.delta.size()); ++dmask) {
          std::vector<bool> gsel(n), dsel(s.delta.size());
          for (std::size_t k = 0; k < n; ++k) gsel[k] = gmask & (1ull << k);
          for (std::size_t k = 0; k < s.delta.size(); ++k) dsel[k] = dmask & (1ull << k);
          auto gswaps = partition_swaps(gsel);
          auto dswaps = partition_swaps(dsel);
          Sequent arranged = s;
          apply_swaps(arranged.gamma, gswaps);
          apply_swaps(arranged.delta, dswaps);
          std::size_t gsplit = std::count(gsel.begin(), gsel.end(), true);
          std::size_t dsplit = std::count(dsel.begin(), dsel.end(), true);
          Sequent left;
          left.reasoner = s.reasoner;
          left.gamma.assign(arranged.gamma.begin(), arranged.gamma.begin() + gsplit);
          left.delta.assign(arranged.delta.begin(), arranged.delta.begin() + dsplit);
          left.goal = s.goal->as_and().lhs;
          auto lsub = prove(left, depth - 1);
          if (!lsub) continue;
          Sequent right;
          right.reasoner = s.reasoner;
          right.gamma.assign(arranged.gamma.begin() + gsplit, arranged.gamma.end());
          right.delta.assign(arranged.delta.begin() + dsplit, arranged.delta.end());
          right.goal = s.goal->as_and().rhs;
          auto rsub = prove(right, depth - 1);
          if (!rsub) continue;
          ProofTerm t;
          t.rule = Rule::AndR;
          t.gamma_split = gsplit;
          t.delta_split = dsplit;
          t.children.push_back(std::move(*lsub));
          t.children.push_back(std::move(*rsub));
          ProofTerm inner = wrap_swaps(Rule::PermAct, dswaps, std::move(t));
          return wrap_swaps(Rule::PermL, gswaps, std::move(inner));
        }
      }
    }

    return std::nullopt;
  }
};

}  // namespace

std::optional<ProofTerm> search(const Sequent& s, int max_depth, const ActionRegistry& reg,
                                const SignatureTable& sigs) {
  if (max_depth < 1) throw Error("search: max_depth must be at least 1");
  Searcher searcher{reg, sigs};
  return searcher.prove(s, max_depth);
}

}  // namespace auditlog
