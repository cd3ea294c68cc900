#include "auditlog/actions.hpp"

#include <algorithm>

namespace auditlog {

namespace {

ActionKindSpec builtin_creates() {
  ActionKindSpec s;
  s.name = "creates";
  s.formals = {"x", "y"};
  s.arg_sorts = {Sort::Agent, Sort::Data};
  s.obs = ObsRule{ObsForm::ActorOnly, {}};
  s.concl_rule = DerivedPolicyRule{false, 0, Policy::owns(Term::var("x", Sort::Agent), Term::var("y", Sort::Data))};
  s.builtin = true;
  return s;
}

ActionKindSpec builtin_comm() {
  ActionKindSpec s;
  s.name = "comm";
  s.formals = {"x", "y", "p"};
  s.arg_sorts = {Sort::Agent, Sort::Agent};
  s.has_payload = true;
  s.payload_formal = "p";
  s.obs = ObsRule{ObsForm::BothEndpoints, {}};
  PolicyRef says = Policy::says_to(Term::var("x", Sort::Agent), Policy::payload_hole("p"),
                                   Term::var("y", Sort::Agent));
  s.po_rule = DerivedPolicyRule{false, 0, says};     // the sender must justify
  s.concl_rule = DerivedPolicyRule{false, 1, says};  // the receiver may conclude
  s.builtin = true;
  return s;
}

// Replace every payload hole by the given policy.
PolicyRef fill_holes(const PolicyRef& p, const PolicyRef& payload) {
  switch (p->kind()) {
    case Policy::Kind::PayloadHole:
      return payload;
    case Policy::Kind::Atom:
    case Policy::Kind::Owns:
      return p;
    case Policy::Kind::SaysTo: {
      const auto& n = p->as_says();
      return Policy::says_to(n.speaker, fill_holes(n.body, payload), n.target);
    }
    case Policy::Kind::And: {
      const auto& n = p->as_and();
      return Policy::conj(fill_holes(n.lhs, payload), fill_holes(n.rhs, payload));
    }
    case Policy::Kind::CondImplies: {
      const auto& n = p->as_cond();
      return Policy::cond_implies(fill_holes(n.cond, payload), fill_holes(n.body, payload));
    }
    case Policy::Kind::ObligImplies: {
      const auto& n = p->as_oblig();
      ActionTemplate act = n.req.action;
      if (act.payload) act.payload = fill_holes(act.payload, payload);
      return Policy::oblig_implies(Requirement{n.req.mode, std::move(act)}, fill_holes(n.body, payload));
    }
    case Policy::Kind::Forall: {
      const auto& n = p->as_forall();
      return Policy::forall(n.binder, fill_holes(n.body, payload));
    }
  }
  throw Error("unreachable");
}

void collect_holes(const Policy& p, std::set<std::string>& out) {
  switch (p.kind()) {
    case Policy::Kind::PayloadHole: out.insert(p.as_hole().name); return;
    case Policy::Kind::Atom:
    case Policy::Kind::Owns: return;
    case Policy::Kind::SaysTo: collect_holes(*p.as_says().body, out); return;
    case Policy::Kind::And:
      collect_holes(*p.as_and().lhs, out);
      collect_holes(*p.as_and().rhs, out);
      return;
    case Policy::Kind::CondImplies:
      collect_holes(*p.as_cond().cond, out);
      collect_holes(*p.as_cond().body, out);
      return;
    case Policy::Kind::ObligImplies:
      if (p.as_oblig().req.action.payload) collect_holes(*p.as_oblig().req.action.payload, out);
      collect_holes(*p.as_oblig().body, out);
      return;
    case Policy::Kind::Forall: collect_holes(*p.as_forall().body, out); return;
  }
}

// Instantiate a rule template for one instance: formals -> arguments,
// payload hole -> payload.
PolicyRef instantiate(const ActionKindSpec& spec, const DerivedPolicyRule& rule,
                      const ActionTemplate& act) {
  PolicyRef result = rule.templ;
  for (std::size_t i = 0; i < spec.arg_sorts.size(); ++i) {
    Term formal = Term::var(spec.formals[i], spec.arg_sorts[i]);
    result = substitute(result, formal, act.args[i]);
  }
  if (spec.has_payload) result = fill_holes(result, act.payload);
  return result;
}

}  // namespace

ActionRegistry::ActionRegistry() {
  ActionKindSpec c = builtin_creates();
  kinds_.emplace(c.name, std::move(c));
  ActionKindSpec m = builtin_comm();
  kinds_.emplace(m.name, std::move(m));
}

void ActionRegistry::register_kind(ActionKindSpec spec) {
  if (kinds_.count(spec.name)) throw RegistryError("duplicate action kind: " + spec.name);
  if (spec.formals.size() != spec.arg_sorts.size() + (spec.has_payload ? 1 : 0))
    throw RegistryError("action kind " + spec.name + ": formal/sort count mismatch");
  if (spec.has_payload && spec.payload_formal != spec.formals.back())
    throw RegistryError("action kind " + spec.name + ": the policy parameter must come last");
  auto check_template = [&](const DerivedPolicyRule& rule, const char* what) {
    if (!rule.templ) throw RegistryError("action kind " + spec.name + ": empty " + what + " template");
    if (!rule.for_all_agents) {
      if (rule.agent_arg >= spec.arg_sorts.size() || spec.arg_sorts[rule.agent_arg] != Sort::Agent)
        throw RegistryError("action kind " + spec.name + ": " + what +
                            " subject is not an agent argument");
    }
    for (const Term& v : free_vars(*rule.templ)) {
      bool declared = false;
      for (std::size_t i = 0; i < spec.arg_sorts.size(); ++i)
        if (spec.formals[i] == v.name() && spec.arg_sorts[i] == v.sort()) declared = true;
      if (!declared)
        throw RegistryError("action kind " + spec.name + ": " + what +
                            " template references undeclared placeholder " + v.name());
    }
    std::set<std::string> holes;
    collect_holes(*rule.templ, holes);
    for (const auto& h : holes)
      if (!spec.has_payload || h != spec.payload_formal)
        throw RegistryError("action kind " + spec.name + ": " + what +
                            " template references undeclared placeholder " + h);
  };
  if (spec.po_rule) check_template(*spec.po_rule, "po");
  if (spec.concl_rule) check_template(*spec.concl_rule, "concl");
  if (spec.obs.form == ObsForm::ExplicitArgs) {
    for (std::size_t pos : spec.obs.positions)
      if (pos >= spec.arg_sorts.size() || spec.arg_sorts[pos] != Sort::Agent)
        throw RegistryError("action kind " + spec.name + ": observer position " + std::to_string(pos) +
                            " is not an agent argument");
  }
  kinds_.emplace(spec.name, std::move(spec));
}

const ActionKindSpec* ActionRegistry::find(const std::string& name) const {
  auto it = kinds_.find(name);
  return it == kinds_.end() ? nullptr : &it->second;
}

const ActionKindSpec& ActionRegistry::require(const std::string& name) const {
  const ActionKindSpec* s = find(name);
  if (!s) throw RegistryError("unknown action kind: " + name);
  return *s;
}

std::set<AgentId> obs(const ActionInstance& act, const ActionRegistry& reg,
                      const std::vector<AgentId>& roster) {
  const ActionKindSpec& spec = reg.require(act.action.kind);
  std::set<AgentId> out;
  auto agent_at = [&](std::size_t pos) {
    const Term& t = act.action.args.at(pos);
    if (t.kind() != Term::Kind::AgentConst)
      throw SortError("observer argument of " + act.action.kind + " is not a ground agent");
    out.insert(AgentId{t.name()});
  };
  switch (spec.obs.form) {
    case ObsForm::ActorOnly:
    case ObsForm::BothEndpoints: {
      std::size_t wanted = spec.obs.form == ObsForm::ActorOnly ? 1 : 2;
      for (std::size_t i = 0; i < spec.arg_sorts.size() && wanted > 0; ++i) {
        if (spec.arg_sorts[i] == Sort::Agent) {
          agent_at(i);
          --wanted;
        }
      }
      if (wanted > 0) throw RegistryError("action kind " + spec.name + " lacks agent arguments for obs");
      break;
    }
    case ObsForm::AllAgents:
      out.insert(roster.begin(), roster.end());
      break;
    case ObsForm::ExplicitArgs:
      for (std::size_t pos : spec.obs.positions) agent_at(pos);
      break;
  }
  return out;
}

PolicyRef po(const ActionTemplate& act, const AgentId& agent, const ActionRegistry& reg) {
  const ActionKindSpec& spec = reg.require(act.kind);
  if (!spec.po_rule) return nullptr;
  const auto& rule = *spec.po_rule;
  if (!rule.for_all_agents && !act.args.at(rule.agent_arg).is_agent(agent)) return nullptr;
  return instantiate(spec, rule, act);
}

PolicyRef po(const ActionInstance& act, const AgentId& agent, const ActionRegistry& reg) {
  return po(act.action, agent, reg);  // the id never affects the obligation
}

PolicyRef concl(const ActionTemplate& act, const AgentId& agent, const ActionRegistry& reg) {
  const ActionKindSpec& spec = reg.require(act.kind);
  if (!spec.concl_rule) return nullptr;
  const auto& rule = *spec.concl_rule;
  if (!rule.for_all_agents && !act.args.at(rule.agent_arg).is_agent(agent)) return nullptr;
  return instantiate(spec, rule, act);
}

void validate_action(const ActionTemplate& act, const ActionRegistry& reg, const SignatureTable& sigs) {
  const ActionKindSpec& spec = reg.require(act.kind);
  if (act.args.size() != spec.arg_sorts.size())
    throw SortError("action " + act.kind + " expects " + std::to_string(spec.arg_sorts.size()) +
                    " term arguments, got " + std::to_string(act.args.size()));
  for (std::size_t i = 0; i < act.args.size(); ++i) {
    if (act.args[i].sort() != spec.arg_sorts[i])
      throw SortError("action " + act.kind + ": argument " + std::to_string(i) + " must be " +
                      sort_name(spec.arg_sorts[i]));
  }
  if (spec.has_payload != static_cast<bool>(act.payload))
    throw SortError("action " + act.kind + (spec.has_payload ? " requires" : " does not take") +
                    " a policy argument");
  if (act.payload) validate_policy(*act.payload, sigs, reg);
}

void validate_policy(const Policy& p, const SignatureTable& sigs, const ActionRegistry& reg,
                     bool allow_holes) {
  switch (p.kind()) {
    case Policy::Kind::Atom: {
      const auto& n = p.as_atom();
      const PredicateSignature* sig = sigs.find(n.pred);
      if (!sig) throw SortError("unknown predicate: " + n.pred);
      if (sig->arg_sorts.size() != n.args.size())
        throw SortError("predicate " + n.pred + " expects " + std::to_string(sig->arg_sorts.size()) +
                        " arguments");
      for (std::size_t i = 0; i < n.args.size(); ++i)
        if (n.args[i].sort() != sig->arg_sorts[i])
          throw SortError("predicate " + n.pred + ": argument " + std::to_string(i) + " must be " +
                          sort_name(sig->arg_sorts[i]));
      return;
    }
    case Policy::Kind::Owns:
      if (p.as_owns().owner.sort() != Sort::Agent || p.as_owns().data.sort() != Sort::Data)
        throw SortError("ill-sorted owns");
      return;
    case Policy::Kind::SaysTo:
      if (p.as_says().speaker.sort() != Sort::Agent || p.as_says().target.sort() != Sort::Agent)
        throw SortError("ill-sorted says");
      validate_policy(*p.as_says().body, sigs, reg, allow_holes);
      return;
    case Policy::Kind::And:
      validate_policy(*p.as_and().lhs, sigs, reg, allow_holes);
      validate_policy(*p.as_and().rhs, sigs, reg, allow_holes);
      return;
    case Policy::Kind::CondImplies:
      validate_policy(*p.as_cond().cond, sigs, reg, allow_holes);
      validate_policy(*p.as_cond().body, sigs, reg, allow_holes);
      return;
    case Policy::Kind::ObligImplies: {
      const auto& act = p.as_oblig().req.action;
      const ActionKindSpec& spec = reg.require(act.kind);
      if (act.args.size() != spec.arg_sorts.size())
        throw SortError("action " + act.kind + ": wrong argument count in requirement");
      for (std::size_t i = 0; i < act.args.size(); ++i)
        if (act.args[i].sort() != spec.arg_sorts[i])
          throw SortError("action " + act.kind + ": ill-sorted requirement argument");
      if (spec.has_payload != static_cast<bool>(act.payload))
        throw SortError("action " + act.kind + ": requirement payload mismatch");
      if (act.payload) validate_policy(*act.payload, sigs, reg, allow_holes);
      validate_policy(*p.as_oblig().body, sigs, reg, allow_holes);
      return;
    }
    case Policy::Kind::Forall:
      validate_policy(*p.as_forall().body, sigs, reg, allow_holes);
      return;
    case Policy::Kind::PayloadHole:
      if (!allow_holes) throw SortError("policy placeholder outside an action template");
      return;
  }
}

}  // namespace auditlog
