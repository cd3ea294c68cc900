#ifndef AUDITLOG_LOGGING_HPP_
#define AUDITLOG_LOGGING_HPP_

// Agent logs. A logged action bundles the executed action with the
// environment-certified conditions and the promised obligations that held at
// logging time; audits later rely on that snapshot, not on the current
// environment.

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "auditlog/actions.hpp"
#include "auditlog/model.hpp"

namespace auditlog {

// An environment-certified atom, valid on the inclusive tick window.
struct EnvFact {
  GroundAtom atom;
  Tick valid_from = 0;
  Tick valid_to = kTickMax;
  static constexpr Tick kTickMax = ~Tick{0};
};

struct ObligationEntry {
  ObligMode mode = ObligMode::Once;
  ActionTemplate action;  // ground
  std::optional<ActionId> ref;  // instance id, when the action already ran
  std::optional<Tick> deadline;
  friend bool operator<(const ObligationEntry& a, const ObligationEntry& b) {
    auto ka = std::make_tuple(a.mode, to_text(a.action), a.ref, a.deadline);
    auto kb = std::make_tuple(b.mode, to_text(b.action), b.ref, b.deadline);
    return ka < kb;
  }
};

struct LoggedAction {
  ActionInstance act;
  std::set<GroundAtom> conds;
  std::set<ObligationEntry> obligs;
};

struct AgentLog {
  AgentId owner;
  struct Entry {
    LoggedAction lac;
    Tick at = 0;
  };
  std::vector<Entry> entries;
};

struct TraceEntry {
  ActionInstance inst;
  Tick tick = 0;
};

struct ExecutionTrace {
  std::vector<TraceEntry> entries;
  const TraceEntry* find(ActionId id) const;
  std::size_t size() const { return entries.size(); }
};

// Appends after checking that the owner observes the action, that every
// condition is certified by an environment fact valid now, and that the
// action does not fulfil an already-expired promise from this log.
// Throws LogError.
AgentLog append(AgentLog log, const LoggedAction& lac, const std::vector<EnvFact>& env, Tick now,
                const ActionRegistry& reg, const std::vector<AgentId>& roster);

enum class ViolationCode {
  DuplicateActionId,
  DuplicateBangObligation,
  LoggedAfterDeadline,
};

struct Violation {
  ViolationCode code;
  ActionId id = 0;
  std::string message;
};

// Pure over the log value; safe to run at any time, auditing included.
std::vector<Violation> check_consistency(const AgentLog& log);

// True when the deadline passed without any matching instance executed in
// time. An entry without a deadline never expires.
bool expired(const ObligationEntry& o, Tick now, const ExecutionTrace& trace);

std::vector<ActionInstance> project_trace(const AgentLog& log);

// One JSON object per logged action, line-delimited, fields in fixed order:
// {"id":..,"tick":..,"action":"..","conds":[..],"obligs":[..]}
std::string to_jsonl(const AgentLog& log);

bool certified(const GroundAtom& atom, const std::vector<EnvFact>& env, Tick now);

}  // namespace auditlog

#endif  // AUDITLOG_LOGGING_HPP_
