#ifndef AUDITLOG_SCENARIO_HPP_
#define AUDITLOG_SCENARIO_HPP_

// Deterministic execution of scripted multi-agent scenarios: state
// transitions, trace construction, evidence assembly and the honest agent
// strategy. Replaying a script yields bit-identical traces, logs and audit
// inputs; one action executes per tick and the tick doubles as the global
// order of the trace.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "auditlog/audit.hpp"
#include "auditlog/logging.hpp"

namespace auditlog {

struct UnknownInstanceError : Error {
  explicit UnknownInstanceError(const std::string& msg) : Error(msg) {}
};

struct SystemState {
  std::map<AgentId, AgentLog> logs;
  Tick clock = 0;
  std::vector<EnvFact> env;
};

struct LogChoice {
  AgentId logger;
  std::set<GroundAtom> conds;
  std::set<ObligationEntry> obligs;
  // `within N` obligations: the deadline is the entry tick plus the declared
  // duration, so it is resolved when the step executes.
  std::vector<std::pair<ObligationEntry, Tick>> relative_obligs;
  std::optional<std::string> proof;  // name of the justification to pre-commit
};

struct ScenarioStep {
  ActionTemplate action;
  std::vector<LogChoice> logs;
  std::vector<std::string> bare_proofs;  // pre-committed without logging
  bool honest = false;
  std::optional<std::string> honest_proof;
  SourcePos pos;
};

struct ProofDecl {
  std::string name;
  Sequent sequent;
  std::optional<ProofTerm> term;
  std::optional<int> search_depth;  // discharge by bounded search instead
  std::map<std::string, ActionId> witnesses;
  SourcePos pos;
};

struct EvidenceSpec {
  enum class Kind { SuspectLogs, All, Ids, Sample };
  Kind kind = Kind::SuspectLogs;
  std::vector<ActionId> ids;
};

struct AuditDirective {
  std::string name;
  std::vector<AgentId> suspects;
  EvidenceSpec evidence;
  std::optional<bool> expect_pass;
};

struct ScenarioScript {
  std::string source = "<memory>";
  std::vector<AgentId> agents;
  std::vector<DataId> data;
  SignatureTable sigs;
  ActionRegistry registry;
  std::vector<EnvFact> env;
  std::map<std::string, PolicyRef> policies;
  std::vector<ProofDecl> proofs;
  std::vector<ScenarioStep> steps;
  std::vector<AuditDirective> audits;

  const ProofDecl* find_proof(const std::string& name) const;
};

struct RunResult {
  SystemState state;
  ExecutionTrace trace;
  ProofStore store;
};

// Executes one ground action: assigns the next id, appends to each chosen
// observer's log and advances the clock. Unchosen observers simply skip
// logging. Throws LogError / UnknownInstanceError.
std::pair<SystemState, ActionInstance> step(SystemState state, const ActionTemplate& act,
                                            const std::vector<LogChoice>& choices,
                                            ExecutionTrace& trace, const ActionRegistry& reg,
                                            const SignatureTable& sigs,
                                            const std::vector<AgentId>& roster);

// Deterministic replay of a whole script. The first failing step aborts with
// a ScenarioError naming the step. search_depth bounds `term: search` proof
// declarations.
RunResult run(const ScenarioScript& script, int search_depth = 6);

bool subtrace(const std::vector<ActionInstance>& t1, const std::vector<ActionInstance>& t2);

// Ordered merge of the agent's own log projection with extra instances; the
// extras must occur in the trace.
EvidenceTrace assemble_evidence(const SystemState& state, const AgentId& agent,
                                const std::vector<ActionInstance>& extra,
                                const ExecutionTrace& trace);

// The honest strategy: refuse when the obligation cannot be justified,
// otherwise schedule every obligation action ahead of the main action and log
// the main action exactly when conditions or obligations support it.
struct HonestPlan {
  ActionTemplate main;
  bool log_main = false;
  bool needs_proof = false;
  std::set<GroundAtom> conds;
  std::vector<std::pair<ObligMode, ActionTemplate>> oblig_actions;
};

std::optional<HonestPlan> honest_step(const AgentId& agent, const ActionTemplate& intended,
                                      const SystemState& state, const Justification* candidate,
                                      const ActionRegistry& reg);

// The agent a step is executed on behalf of: the subject of its proof
// obligation when the kind declares one, the first agent argument otherwise.
AgentId acting_agent(const ActionTemplate& act, const ActionRegistry& reg);

AuditSnapshot make_snapshot(const ScenarioScript& script, const RunResult& result);

// Evidence selection for audit directives; `seed` drives Kind::Sample.
EvidenceTrace resolve_evidence(const EvidenceSpec& spec, const std::vector<AgentId>& suspects,
                               const AuditSnapshot& snap, std::uint64_t seed = 0);

}  // namespace auditlog

#endif  // AUDITLOG_SCENARIO_HPP_
