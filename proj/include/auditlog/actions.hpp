#ifndef AUDITLOG_ACTIONS_HPP_
#define AUDITLOG_ACTIONS_HPP_

// Action-kind registry: who observes an action, which policy its actor must
// justify, and which policy an observer may conclude from it. The built-in
// kinds `creates` and `comm` are always present; scenarios add their own.

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "auditlog/model.hpp"

namespace auditlog {

// Observer selection is a closed enumeration so scenarios stay declarative:
//   actor     -> the first agent-sorted argument
//   endpoints -> the first two agent-sorted arguments
//   all       -> every agent in the roster
//   args(...) -> the agents at the listed argument positions
enum class ObsForm { ActorOnly, BothEndpoints, AllAgents, ExplicitArgs };

struct ObsRule {
  ObsForm form = ObsForm::ActorOnly;
  std::vector<std::size_t> positions;  // ExplicitArgs only
};

// A po/concl template, instantiated by replacing each formal parameter with
// the instance argument and each payload hole with the payload policy. It
// applies either to the agent at one argument position or to every agent.
struct DerivedPolicyRule {
  bool for_all_agents = false;
  std::size_t agent_arg = 0;
  PolicyRef templ;
};

struct ActionKindSpec {
  std::string name;
  std::vector<std::string> formals;
  std::vector<Sort> arg_sorts;  // one per term argument, payload excluded
  bool has_payload = false;
  std::string payload_formal;
  ObsRule obs;
  std::optional<DerivedPolicyRule> po_rule;
  std::optional<DerivedPolicyRule> concl_rule;
  bool builtin = false;
};

class ActionRegistry {
 public:
  ActionRegistry();  // installs creates(agent, data) and comm(agent, agent, policy)

  // Throws RegistryError on duplicate names or templates that reference
  // undeclared placeholders.
  void register_kind(ActionKindSpec spec);

  const ActionKindSpec* find(const std::string& name) const;
  const ActionKindSpec& require(const std::string& name) const;
  const std::map<std::string, ActionKindSpec>& all() const { return kinds_; }

 private:
  std::map<std::string, ActionKindSpec> kinds_;
};

std::set<AgentId> obs(const ActionInstance& act, const ActionRegistry& reg,
                      const std::vector<AgentId>& roster);

// Null result is "no policy required" / "nothing can be concluded".
PolicyRef po(const ActionTemplate& act, const AgentId& agent, const ActionRegistry& reg);
PolicyRef po(const ActionInstance& act, const AgentId& agent, const ActionRegistry& reg);
PolicyRef concl(const ActionTemplate& act, const AgentId& agent, const ActionRegistry& reg);

// Validates argument count, sorts, payload presence and groundness of the
// payload-free arguments happens at the call sites that need it.
void validate_action(const ActionTemplate& act, const ActionRegistry& reg, const SignatureTable& sigs);

// Well-sortedness of a policy against declared predicates and action kinds.
// Rejects payload holes unless allow_holes is set (registry templates only).
void validate_policy(const Policy& p, const SignatureTable& sigs, const ActionRegistry& reg,
                     bool allow_holes = false);

}  // namespace auditlog

#endif  // AUDITLOG_ACTIONS_HPP_
