#ifndef AUDITLOG_PARSER_HPP_
#define AUDITLOG_PARSER_HPP_

// Front-end for the sectioned scenario / proof-script format:
//
//   [agents] [data] [predicates] [actions] [policies] [env] [proofs]
//   [steps] [audits]
//
// Sections appear in declaration-before-use order; a proof script is simply a
// scenario without steps. Comments run from '#' to end of line. Policy
// syntax: owns(a, d), says(a, PHI, b), PHI and PSI, PHI -> PSI (right
// associative), ![act] -> PHI, ?[act] -> PHI, forall x: data . PHI; forall
// binds weakest, then ->, then and. Variables carry their sort at free
// occurrences (x: data); bound occurrences are bare. Money literals look
// like 10$.

#include <string>
#include <string_view>

#include "auditlog/scenario.hpp"

namespace auditlog {

ScenarioScript parse_scenario_file(const std::string& path);
ScenarioScript parse_scenario_text(std::string_view text, std::string source_name = "<memory>");

// Parses one policy against a script's declarations (tests, tooling).
PolicyRef parse_policy_text(std::string_view text, const ScenarioScript& context);

// Parses one ground action template against a script's declarations.
ActionTemplate parse_action_text(std::string_view text, const ScenarioScript& context);

}  // namespace auditlog

#endif  // AUDITLOG_PARSER_HPP_
