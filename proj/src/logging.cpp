#include "auditlog/logging.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <map>
#include <tuple>

namespace auditlog {

const TraceEntry* ExecutionTrace::find(ActionId id) const {
  for (const auto& e : entries)
    if (e.inst.id == id) return &e;
  return nullptr;
}

bool certified(const GroundAtom& atom, const std::vector<EnvFact>& env, Tick now) {
  for (const auto& f : env)
    if (f.atom == atom && f.valid_from <= now && now <= f.valid_to) return true;
  return false;
}

AgentLog append(AgentLog log, const LoggedAction& lac, const std::vector<EnvFact>& env, Tick now,
                const ActionRegistry& reg, const std::vector<AgentId>& roster) {
  std::set<AgentId> observers = obs(lac.act, reg, roster);
  if (!observers.count(log.owner))
    throw LogError(LogErrorCode::ObserverViolation,
                   log.owner.name + " cannot observe " + to_text(lac.act));
  for (const auto& c : lac.conds) {
    if (!certified(c, env, now))
      throw LogError(LogErrorCode::UncertifiedCondition,
                     "condition " + to_text(c) + " is not certified at tick " + std::to_string(now));
  }
  // A promise already recorded in this log makes the fulfilling action
  // unloggable once its deadline passed.
  for (const auto& entry : log.entries) {
    for (const auto& o : entry.lac.obligs) {
      if (!o.deadline || now <= *o.deadline) continue;
      bool matches = o.ref ? *o.ref == lac.act.id : alpha_eq(o.action, lac.act.action);
      if (matches)
        throw LogError(LogErrorCode::ExpiredAtLogging,
                       to_text(lac.act) + " fulfils an obligation that expired at tick " +
                           std::to_string(*o.deadline));
    }
  }
  if (!log.entries.empty() && log.entries.back().at > now)
    throw LogError(LogErrorCode::ObserverViolation, "log entries must be appended in tick order");
  log.entries.push_back(AgentLog::Entry{lac, now});
  return log;
}

std::vector<Violation> check_consistency(const AgentLog& log) {
  std::vector<Violation> out;
  // one log entry per action id
  std::map<ActionId, int> seen;
  for (const auto& e : log.entries) {
    if (++seen[e.lac.act.id] == 2)
      out.push_back(Violation{ViolationCode::DuplicateActionId, e.lac.act.id,
                              "action " + to_text(e.lac.act) + " is logged more than once"});
  }
  // each use-once obligation id at most once across the whole log
  std::map<ActionId, int> bang;
  for (const auto& e : log.entries) {
    for (const auto& o : e.lac.obligs) {
      if (o.mode != ObligMode::Once || !o.ref) continue;
      if (++bang[*o.ref] == 2)
        out.push_back(Violation{ViolationCode::DuplicateBangObligation, *o.ref,
                                "use-once obligation !" + to_text(o.action) + "_" +
                                    std::to_string(*o.ref) + " is claimed more than once"});
    }
  }
  // no entry may fulfil a promise after its deadline
  for (const auto& e : log.entries) {
    for (const auto& o : e.lac.obligs) {
      if (!o.deadline) continue;
      for (const auto& f : log.entries) {
        bool matches = o.ref ? *o.ref == f.lac.act.id : alpha_eq(o.action, f.lac.act.action);
        if (matches && f.at > *o.deadline)
          out.push_back(Violation{ViolationCode::LoggedAfterDeadline, f.lac.act.id,
                                  to_text(f.lac.act) + " logged at tick " + std::to_string(f.at) +
                                      " after deadline " + std::to_string(*o.deadline)});
      }
    }
  }
  return out;
}

bool expired(const ObligationEntry& o, Tick now, const ExecutionTrace& trace) {
  if (!o.deadline || now <= *o.deadline) return false;
  for (const auto& e : trace.entries) {
    if (e.tick > *o.deadline) continue;
    bool matches = o.ref ? *o.ref == e.inst.id : alpha_eq(o.action, e.inst.action);
    if (matches) return false;
  }
  return true;
}

std::vector<ActionInstance> project_trace(const AgentLog& log) {
  std::vector<ActionInstance> out;
  out.reserve(log.entries.size());
  for (const auto& e : log.entries) out.push_back(e.lac.act);
  return out;
}

std::string to_jsonl(const AgentLog& log) {
  std::string out;
  for (const auto& e : log.entries) {
    nlohmann::ordered_json j;
    j["id"] = e.lac.act.id;
    j["tick"] = e.at;
    j["action"] = to_text(e.lac.act.action);
    auto conds = nlohmann::ordered_json::array();
    for (const auto& c : e.lac.conds) conds.push_back(to_text(c));
    j["conds"] = std::move(conds);
    auto obligs = nlohmann::ordered_json::array();
    for (const auto& o : e.lac.obligs) {
      nlohmann::ordered_json jo;
      jo["mode"] = o.mode == ObligMode::Once ? "!" : "?";
      jo["action"] = to_text(o.action);
      if (o.ref) jo["ref"] = *o.ref;
      if (o.deadline) jo["deadline"] = *o.deadline;
      obligs.push_back(std::move(jo));
    }
    j["obligs"] = std::move(obligs);
    out += j.dump();
    out += "\n";
  }
  return out;
}

}  // namespace auditlog
