#ifndef AUDITLOG_AUDIT_HPP_
#define AUDITLOG_AUDIT_HPP_

// Accountability engine. An Auditor is built from an immutable snapshot of
// the system (logs, trace, pre-committed proof store); nothing in the audit
// API can mutate the snapshot, so agents cannot adapt proofs mid-audit and
// audit outcomes are independent of the order in which suspects are popped.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "auditlog/kernel.hpp"
#include "auditlog/logging.hpp"

namespace auditlog {

// A pre-committed proof for one logged (or unlogged) action, keyed by the
// acting agent and the action id. Witnesses map cited action templates
// (canonical text) to the instance ids the agent vouches for.
struct StoreEntry {
  std::string name;
  ProofTerm proof;
  Sequent sequent;
  std::map<std::string, ActionId> witnesses;
};

class ProofStore {
 public:
  void bind(const AgentId& agent, ActionId id, StoreEntry entry);
  const StoreEntry* find(const AgentId& agent, ActionId id) const;
  std::size_t size() const { return entries_.size(); }
  const std::map<std::pair<AgentId, ActionId>, StoreEntry>& all() const { return entries_; }

 private:
  std::map<std::pair<AgentId, ActionId>, StoreEntry> entries_;
};

struct Justification {
  std::string name;
  ProofTerm proof;
  Sequent sequent;
  AssumptionSummary summary;
  std::map<std::string, ActionId> witnesses;
};

// Checks the stored proof and extracts its assumption summary. Returns
// nothing (and fills *error) when the proof does not check.
std::optional<Justification> make_justification(const StoreEntry& entry, const ActionRegistry& reg,
                                                const SignatureTable& sigs,
                                                std::string* error = nullptr);

// A proof justifies a logged action when it proves exactly the action's
// proof obligation, its initial assumptions are basic predicates, actions and
// obligations, every use-once obligation it consumes maps to a distinct
// !entry of the logged action (multiset injection), use-many obligations are
// covered as a set, and every condition it consumes was logged.
bool is_justification(const Justification& j, const AgentId& agent, const LoggedAction& lac,
                      const ActionRegistry& reg, std::string* why = nullptr);

// Ordered action evidence; ids strictly increase.
struct EvidenceTrace {
  std::vector<ActionInstance> actions;
  static EvidenceTrace of(std::vector<ActionInstance> actions);  // sorts and deduplicates
};

EvidenceTrace merge_evidence(const EvidenceTrace& e, const std::vector<ActionInstance>& newacts);

enum class FailReason {
  None,
  MissingJustification,
  UnfulfilledExpiredObligation,
  UnwitnessedActionAssumption,
};

const char* fail_reason_name(FailReason r);

struct LaaOutcome {
  bool pass = true;
  FailReason reason = FailReason::None;
  std::string detail;
  std::vector<ActionInstance> cited;  // id-witnessed action assumptions
  const StoreEntry* used = nullptr;
};

struct AaOutcome {
  LaaOutcome outcome;
  bool was_logged = false;
  std::vector<ActionInstance> newacts;  // cited instances, before evidence filtering
};

struct ActionCheck {
  AgentId agent;
  ActionId id = 0;
  bool pass = true;
  FailReason reason = FailReason::None;
  std::string detail;
};

struct AuditResult {
  bool verdict = true;
  std::vector<ActionCheck> failures;
  std::set<std::pair<AgentId, ActionId>> visited;
  std::vector<ActionCheck> checks;            // per-action outcomes, in audit order
  std::vector<ActionInstance> discovered;     // new evidence contributed by proofs
  std::uint64_t aa_calls = 0;
  std::uint64_t iterations = 0;
  EvidenceTrace final_evidence;
};

struct AuditRound {
  AgentId agent;
  AuditResult result;
};

struct RecursiveAuditResult {
  bool verdict = true;
  std::vector<AuditRound> rounds;
  std::set<std::pair<AgentId, ActionId>> visited;
  EvidenceTrace final_evidence;
  std::uint64_t iterations = 0;
  std::uint64_t aa_calls = 0;
};

struct AuditSnapshot {
  const ActionRegistry* reg = nullptr;
  const SignatureTable* sigs = nullptr;
  std::vector<AgentId> roster;
  std::map<AgentId, AgentLog> logs;
  ExecutionTrace trace;
  ProofStore store;
  Tick now = 0;
};

class Auditor {
 public:
  explicit Auditor(AuditSnapshot snap) : snap_(std::move(snap)) {}

  // Accountability of one logged action: justification present when the
  // action carries a proof obligation, expired obligations fulfilled in the
  // agent's own log, every cited action witnessed in the trace and observed
  // by the agent.
  LaaOutcome laa(const AgentId& agent, const LoggedAction& lac) const;

  // Accountability of an arbitrary action: audits the agent's log entry when
  // one exists, otherwise the bare triple with no conditions or obligations.
  AaOutcome aa(const AgentId& agent, const ActionInstance& act) const;

  // Audits a whole evidence trace, newest action first, merging the new
  // actions cited by accepted justifications back into the evidence.
  AuditResult acc(const AgentId& agent, const EvidenceTrace& evidence) const;

  // Pops suspects in the given priority order; auditing one agent may
  // implicate others through the actions its proofs cite.
  RecursiveAuditResult recursive_audit(const std::vector<AgentId>& suspects,
                                       const EvidenceTrace& evidence0) const;

  const AuditSnapshot& snapshot() const { return snap_; }

 private:
  AuditSnapshot snap_;
};

}  // namespace auditlog

#endif  // AUDITLOG_AUDIT_HPP_
