#ifndef AUDITLOG_REPORT_HPP_
#define AUDITLOG_REPORT_HPP_

// Report rendering for the CLI: execution traces, agent logs, audit verdicts.
// Output is deterministic: fixed field order, sorted sets, no timestamps.

#include <string>
#include <vector>

#include "auditlog/audit.hpp"
#include "auditlog/scenario.hpp"

namespace auditlog {

struct AuditRun {
  AuditDirective directive;
  EvidenceTrace evidence;
  RecursiveAuditResult result;
  bool matched_expectation = true;
};

AuditRun run_audit(const AuditDirective& directive, const AuditSnapshot& snap, std::uint64_t seed = 0);

std::string render_trace(const ExecutionTrace& trace);
std::string render_logs(const SystemState& state);
std::string render_consistency(const SystemState& state);
std::string render_audit(const AuditRun& run, bool color = false);

std::string json_report(const ScenarioScript& script, const RunResult& result,
                        const std::vector<AuditRun>& audits);

}  // namespace auditlog

#endif  // AUDITLOG_REPORT_HPP_
