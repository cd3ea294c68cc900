#include "auditlog/report.hpp"

#include <nlohmann/json.hpp>

#include <sstream>

namespace auditlog {

namespace {

const char* kGreen = "\x1b[32m";
const char* kRed = "\x1b[31m";
const char* kReset = "\x1b[0m";

std::string verdict_word(bool pass, bool color) {
  std::string word = pass ? "PASS" : "FAIL";
  if (!color) return word;
  return std::string(pass ? kGreen : kRed) + word + kReset;
}

}  // namespace

AuditRun run_audit(const AuditDirective& directive, const AuditSnapshot& snap, std::uint64_t seed) {
  AuditRun run;
  run.directive = directive;
  run.evidence = resolve_evidence(directive.evidence, directive.suspects, snap, seed);
  Auditor auditor(snap);
  run.result = auditor.recursive_audit(directive.suspects, run.evidence);
  run.matched_expectation = run.result.verdict == directive.expect_pass.value_or(true);
  return run;
}

std::string render_trace(const ExecutionTrace& trace) {
  std::ostringstream os;
  os << "trace (" << trace.size() << " actions)\n";
  for (const auto& te : trace.entries)
    os << "  [" << te.tick << "] " << to_text(te.inst) << "\n";
  return os.str();
}

std::string render_logs(const SystemState& state) {
  std::ostringstream os;
  for (const auto& [agent, log] : state.logs) {
    os << "log of " << agent.name << " (" << log.entries.size() << " entries)\n";
    for (const auto& e : log.entries) {
      os << "  [" << e.at << "] " << to_text(e.lac.act);
      if (!e.lac.conds.empty()) {
        os << " conds {";
        bool first = true;
        for (const auto& c : e.lac.conds) {
          if (!first) os << "; ";
          first = false;
          os << to_text(c);
        }
        os << "}";
      }
      if (!e.lac.obligs.empty()) {
        os << " obligs {";
        bool first = true;
        for (const auto& o : e.lac.obligs) {
          if (!first) os << "; ";
          first = false;
          os << (o.mode == ObligMode::Once ? "!" : "?") << to_text(o.action);
          if (o.ref) os << " ref " << *o.ref;
          if (o.deadline) os << " until " << *o.deadline;
        }
        os << "}";
      }
      os << "\n";
    }
  }
  return os.str();
}

std::string render_consistency(const SystemState& state) {
  std::ostringstream os;
  for (const auto& [agent, log] : state.logs) {
    for (const auto& v : check_consistency(log))
      os << "log of " << agent.name << ": " << v.message << "\n";
  }
  return os.str();
}

std::string render_audit(const AuditRun& run, bool color) {
  std::ostringstream os;
  os << "audit " << run.directive.name << ": " << verdict_word(run.result.verdict, color) << "\n";
  os << "  suspects:";
  for (const auto& a : run.directive.suspects) os << " " << a.name;
  os << "\n  evidence:";
  for (const auto& inst : run.evidence.actions) os << " " << inst.id;
  os << "\n";
  for (const auto& round : run.result.rounds) {
    os << "  agent " << round.agent.name << ": "
       << (round.result.verdict ? "accountable" : "not accountable") << "\n";
    for (const auto& chk : round.result.checks) {
      os << "    action " << chk.id << ": " << (chk.pass ? "ok" : "FAIL");
      if (!chk.pass) os << " [" << fail_reason_name(chk.reason) << "] " << chk.detail;
      os << "\n";
    }
  }
  os << "  visited:";
  for (const auto& [agent, id] : run.result.visited) os << " " << agent.name << ":" << id;
  os << "\n  final evidence:";
  for (const auto& inst : run.result.final_evidence.actions) os << " " << inst.id;
  os << "\n";
  if (run.directive.expect_pass) {
    os << "  expected " << (*run.directive.expect_pass ? "pass" : "fail") << ": "
       << (run.matched_expectation ? "as expected" : "MISMATCH") << "\n";
  }
  return os.str();
}

std::string json_report(const ScenarioScript& script, const RunResult& result,
                        const std::vector<AuditRun>& audits) {
  nlohmann::ordered_json j;
  j["scenario"] = script.source;
  auto trace = nlohmann::ordered_json::array();
  for (const auto& te : result.trace.entries) {
    nlohmann::ordered_json t;
    t["id"] = te.inst.id;
    t["tick"] = te.tick;
    t["action"] = to_text(te.inst.action);
    trace.push_back(std::move(t));
  }
  j["trace"] = std::move(trace);
  auto logs = nlohmann::ordered_json::object();
  for (const auto& [agent, log] : result.state.logs) {
    auto entries = nlohmann::ordered_json::array();
    std::istringstream lines(to_jsonl(log));
    for (std::string line; std::getline(lines, line);)
      entries.push_back(nlohmann::ordered_json::parse(line));
    logs[agent.name] = std::move(entries);
  }
  j["logs"] = std::move(logs);
  auto runs = nlohmann::ordered_json::array();
  for (const auto& run : audits) {
    nlohmann::ordered_json a;
    a["name"] = run.directive.name;
    auto suspects = nlohmann::ordered_json::array();
    for (const auto& s : run.directive.suspects) suspects.push_back(s.name);
    a["suspects"] = std::move(suspects);
    auto evidence = nlohmann::ordered_json::array();
    for (const auto& inst : run.evidence.actions) evidence.push_back(inst.id);
    a["evidence"] = std::move(evidence);
    a["verdict"] = run.result.verdict ? "pass" : "fail";
    auto checks = nlohmann::ordered_json::array();
    for (const auto& round : run.result.rounds) {
      for (const auto& chk : round.result.checks) {
        nlohmann::ordered_json c;
        c["agent"] = chk.agent.name;
        c["action"] = chk.id;
        c["ok"] = chk.pass;
        if (!chk.pass) {
          c["reason"] = fail_reason_name(chk.reason);
          c["detail"] = chk.detail;
        }
        checks.push_back(std::move(c));
      }
    }
    a["checks"] = std::move(checks);
    auto visited = nlohmann::ordered_json::array();
    for (const auto& [agent, id] : run.result.visited) {
      visited.push_back(nlohmann::ordered_json::array({agent.name, id}));
    }
    a["visited"] = std::move(visited);
    auto final_evidence = nlohmann::ordered_json::array();
    for (const auto& inst : run.result.final_evidence.actions) final_evidence.push_back(inst.id);
    a["final_evidence"] = std::move(final_evidence);
    a["iterations"] = run.result.iterations;
    a["aa_calls"] = run.result.aa_calls;
    if (run.directive.expect_pass) {
      a["expected"] = *run.directive.expect_pass ? "pass" : "fail";
      a["as_expected"] = run.matched_expectation;
    }
    runs.push_back(std::move(a));
  }
  j["audits"] = std::move(runs);
  return j.dump(2) + "\n";
}

}  // namespace auditlog
