// auditlog: check usage-policy proofs, replay scenarios, audit agents.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "auditlog/parser.hpp"
#include "auditlog/report.hpp"
#include "auditlog/search.hpp"

namespace {

using namespace auditlog;

bool color_enabled() {
  const char* v = std::getenv("AUDITLOG_COLOR");
  return v && *v && std::string(v) != "0";
}

int cmd_check_proof(const std::string& path, int max_depth, bool json) {
  ScenarioScript script = parse_scenario_file(path);
  if (script.proofs.empty()) {
    std::cerr << path << ": no proofs declared\n";
    return 2;
  }
  bool all_ok = true;
  nlohmann::ordered_json results = nlohmann::ordered_json::array();
  for (const auto& decl : script.proofs) {
    std::string status;
    std::string detail;
    bool ok = false;
    ProofTerm term;
    bool have_term = false;
    if (decl.term) {
      term = *decl.term;
      have_term = true;
    } else {
      int depth = decl.search_depth && *decl.search_depth > 0 ? *decl.search_depth : max_depth;
      auto found = search(decl.sequent, depth, script.registry, script.sigs);
      if (found) {
        term = *found;
        have_term = true;
        detail = "found by search at depth " + std::to_string(depth);
      } else {
        detail = "no proof found within depth " + std::to_string(depth);
      }
    }
    if (have_term) {
      if (auto err = check(term, decl.sequent, script.registry, script.sigs)) {
        detail = err->to_string();
        SourcePos pos = err->pos.known() ? err->pos : decl.pos;
        std::cerr << path << ":" << pos.line << ":" << pos.col << ": proof " << decl.name
                  << " failed: " << detail << "\n";
      } else {
        ok = true;
      }
    } else {
      std::cerr << path << ":" << decl.pos.line << ":" << decl.pos.col << ": proof " << decl.name
                << ": " << detail << "\n";
    }
    all_ok = all_ok && ok;
    status = ok ? "PASS" : "FAIL";
    if (json) {
      nlohmann::ordered_json r;
      r["proof"] = decl.name;
      r["ok"] = ok;
      if (!detail.empty()) r["detail"] = detail;
      results.push_back(std::move(r));
    } else {
      std::cout << status << " " << decl.name;
      if (!detail.empty() && ok) std::cout << " (" << detail << ")";
      std::cout << "\n";
    }
  }
  if (json) std::cout << results.dump(2) << "\n";
  return all_ok ? 0 : 1;
}

int cmd_run(const std::string& path, int max_depth, bool json, const std::string& logs_dir) {
  ScenarioScript script = parse_scenario_file(path);
  RunResult result = run(script, max_depth);
  if (!logs_dir.empty()) {
    std::filesystem::create_directories(logs_dir);
    for (const auto& [agent, log] : result.state.logs) {
      std::ofstream out(std::filesystem::path(logs_dir) / ("log_" + agent.name + ".jsonl"));
      out << to_jsonl(log);
    }
  }
  if (json) {
    std::cout << json_report(script, result, {});
  } else {
    std::cout << render_trace(result.trace);
    std::cout << render_logs(result.state);
    std::string issues = render_consistency(result.state);
    if (!issues.empty()) {
      std::cout << issues;
      return 1;
    }
  }
  return 0;
}

int cmd_audit(const std::string& path, int max_depth, bool json, std::uint64_t seed,
              const std::vector<std::string>& suspects, const std::string& evidence) {
  ScenarioScript script = parse_scenario_file(path);
  RunResult result = run(script, max_depth);
  AuditSnapshot snap = make_snapshot(script, result);

  std::vector<AuditDirective> directives;
  if (!suspects.empty()) {
    AuditDirective d;
    d.name = "cli";
    for (const auto& s : suspects) {
      bool known = false;
      for (const auto& a : script.agents) known = known || a.name == s;
      if (!known) {
        std::cerr << "unknown suspect: " << s << "\n";
        return 2;
      }
      d.suspects.push_back(AgentId{s});
    }
    if (evidence.empty() || evidence == "logs") {
      d.evidence.kind = EvidenceSpec::Kind::SuspectLogs;
    } else if (evidence == "all") {
      d.evidence.kind = EvidenceSpec::Kind::All;
    } else if (evidence == "sample") {
      d.evidence.kind = EvidenceSpec::Kind::Sample;
    } else {
      d.evidence.kind = EvidenceSpec::Kind::Ids;
      std::istringstream ss(evidence);
      for (std::string part; std::getline(ss, part, ',');) {
        if (!part.empty()) d.evidence.ids.push_back(std::stoull(part));
      }
    }
    directives.push_back(std::move(d));
  } else {
    directives = script.audits;
    if (directives.empty()) {
      std::cerr << path << ": no audits declared and no --suspect given\n";
      return 2;
    }
  }

  bool all_expected = true;
  std::vector<AuditRun> runs;
  for (const auto& d : directives) {
    runs.push_back(run_audit(d, snap, seed));
    all_expected = all_expected && runs.back().matched_expectation;
  }
  if (json) {
    std::cout << json_report(script, result, runs);
  } else {
    bool color = color_enabled();
    for (const auto& r : runs) std::cout << render_audit(r, color);
  }
  return all_expected ? 0 : 1;
}

int cmd_explain(const std::string& path, const std::string& proof_name, int max_depth) {
  ScenarioScript script = parse_scenario_file(path);
  const ProofDecl* decl = script.find_proof(proof_name);
  if (!decl) {
    std::cerr << path << ": no proof named " << proof_name << "\n";
    return 2;
  }
  ProofTerm term;
  if (decl->term) {
    term = *decl->term;
  } else {
    int depth = decl->search_depth && *decl->search_depth > 0 ? *decl->search_depth : max_depth;
    auto found = search(decl->sequent, depth, script.registry, script.sigs);
    if (!found) {
      std::cerr << "no proof of " << proof_name << " found within depth " << depth << "\n";
      return 1;
    }
    term = *found;
  }
  try {
    std::cout << explain(term, decl->sequent, script.registry, script.sigs);
  } catch (const Error& e) {
    std::cerr << path << ": proof " << proof_name << " does not check: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"usage-policy proof checking and accountability auditing"};
  app.require_subcommand(1);

  int max_depth = 6;
  bool json = false;
  std::uint64_t seed = 0;
  app.add_option("--max-depth", max_depth, "search oracle depth bound")->capture_default_str();
  app.add_flag("--json", json, "machine-readable report");
  app.add_option("--seed", seed, "seed for sampled evidence")->capture_default_str();

  std::string path;
  std::string proof_name;
  std::string logs_dir;
  std::vector<std::string> suspects;
  std::string evidence;

  CLI::App* check = app.add_subcommand("check-proof", "check the proofs declared in a script");
  check->add_option("file", path, "proof script")->required();

  CLI::App* runcmd = app.add_subcommand("run", "execute a scenario and print trace and logs");
  runcmd->add_option("file", path, "scenario file")->required();
  runcmd->add_option("--logs", logs_dir, "directory for per-agent JSONL logs");

  CLI::App* audit = app.add_subcommand("audit", "execute a scenario and audit agents");
  audit->add_option("file", path, "scenario file")->required();
  audit->add_option("--suspect", suspects, "suspect agent (repeatable; overrides [audits])");
  audit->add_option("--evidence", evidence, "logs | all | sample | comma-separated ids");

  CLI::App* explaincmd = app.add_subcommand("explain", "print a checked derivation tree");
  explaincmd->add_option("file", path, "proof script")->required();
  explaincmd->add_option("proof", proof_name, "proof name")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    if (check->parsed()) return cmd_check_proof(path, max_depth, json);
    if (runcmd->parsed()) return cmd_run(path, max_depth, json, logs_dir);
    if (audit->parsed()) return cmd_audit(path, max_depth, json, seed, suspects, evidence);
    if (explaincmd->parsed()) return cmd_explain(path, proof_name, max_depth);
  } catch (const ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const ScenarioError& e) {
    std::cerr << path << ": " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  return 2;
}
