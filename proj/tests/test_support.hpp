#ifndef AUDITLOG_TESTS_TEST_SUPPORT_HPP_
#define AUDITLOG_TESTS_TEST_SUPPORT_HPP_

#include <string>

#include "auditlog/parser.hpp"
#include "auditlog/scenario.hpp"

namespace testsup {

using namespace auditlog;

// Standard declarations shared by most tests.
inline const ScenarioScript& ctx() {
  static ScenarioScript script = parse_scenario_text(R"(
[agents]
a, b, c, tender
[data]
d, dd, beer
[predicates]
predicate rel(data, data)
predicate print(agent, data*)
predicate drink(agent, data)
predicate age21(agent)
predicate alc(data)
predicate read(agent, data)
[actions]
action drunk(x: agent, y: data) { obs = actor; po(x) = drink(x, y); }
action paid(x: agent, m: money) { obs = actor; }
action print_act(x: agent, y: data) { obs = actor; po(x) = print(x, y); }
)",
                                                     "<test-ctx>");
  return script;
}

inline PolicyRef pol(const std::string& text) { return parse_policy_text(text, ctx()); }
inline ActionTemplate act(const std::string& text) { return parse_action_text(text, ctx()); }

inline Term agent(const std::string& n) { return Term::agent_const(n); }
inline Term data(const std::string& n) { return Term::data_const(n); }
inline Term var(const std::string& n, Sort s) { return Term::var(n, s); }

inline Sequent sequent(const std::string& reasoner, std::vector<NonLinItem> gamma,
                       std::vector<LinItem> delta, PolicyRef goal) {
  Sequent s;
  s.reasoner = AgentId{reasoner};
  s.gamma = std::move(gamma);
  s.delta = std::move(delta);
  s.goal = std::move(goal);
  return s;
}

inline std::string scenario_path(const std::string& name) {
  return std::string(AUDITLOG_SCENARIO_DIR) + "/" + name;
}

}  // namespace testsup

#endif  // AUDITLOG_TESTS_TEST_SUPPORT_HPP_
