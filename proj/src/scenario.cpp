#include "auditlog/scenario.hpp"

#include <algorithm>
#include <random>

#include "auditlog/search.hpp"

namespace auditlog {

const ProofDecl* ScenarioScript::find_proof(const std::string& name) const {
  for (const auto& p : proofs)
    if (p.name == name) return &p;
  return nullptr;
}

std::pair<SystemState, ActionInstance> step(SystemState state, const ActionTemplate& act,
                                            const std::vector<LogChoice>& choices,
                                            ExecutionTrace& trace, const ActionRegistry& reg,
                                            const SignatureTable& sigs,
                                            const std::vector<AgentId>& roster) {
  validate_action(act, reg, sigs);
  if (!is_ground(act)) throw SortError("cannot execute non-ground action " + to_text(act));
  ActionInstance inst{act, trace.size()};
  Tick now = state.clock;
  for (const auto& choice_in : choices) {
    LogChoice choice = choice_in;
    for (const auto& [entry, duration] : choice.relative_obligs) {
      ObligationEntry o = entry;
      o.deadline = now + duration;
      choice.obligs.insert(std::move(o));
    }
    for (const auto& o : choice.obligs) {
      if (!o.ref) continue;
      const TraceEntry* te = trace.find(*o.ref);
      bool self = *o.ref == inst.id && alpha_eq(o.action, act);
      if (!self && (!te || !alpha_eq(te->inst.action, o.action)))
        throw LogError(LogErrorCode::BadObligationRef,
                       "obligation " + to_text(o.action) + " references id " + std::to_string(*o.ref) +
                           " which names no such instance");
    }
    LoggedAction lac{inst, choice.conds, choice.obligs};
    auto it = state.logs.find(choice.logger);
    AgentLog log = it == state.logs.end() ? AgentLog{choice.logger, {}} : it->second;
    state.logs[choice.logger] = append(std::move(log), lac, state.env, now, reg, roster);
  }
  trace.entries.push_back(TraceEntry{inst, now});
  state.clock = now + 1;
  return {std::move(state), inst};
}

namespace {

StoreEntry resolve_store_entry(const ScenarioScript& script, const ProofDecl& decl, int search_depth,
                               std::size_t step_index) {
  StoreEntry entry;
  entry.name = decl.name;
  entry.sequent = decl.sequent;
  entry.witnesses = decl.witnesses;
  if (decl.term) {
    entry.proof = *decl.term;
  } else {
    int depth = decl.search_depth && *decl.search_depth > 0 ? *decl.search_depth : search_depth;
    auto found = search(decl.sequent, depth, script.registry, script.sigs);
    if (!found)
      throw ScenarioError(step_index, "no proof of " + decl.name + " found within depth " +
                                          std::to_string(depth));
    entry.proof = *found;
  }
  return entry;
}

// Fill in missing witness ids from the trace: the first instance of the cited
// template the reasoner could observe.
void autoresolve_witnesses(StoreEntry& entry, const ScenarioScript& script,
                           const ExecutionTrace& trace) {
  auto err = check(entry.proof, entry.sequent, script.registry, script.sigs);
  if (err) return;  // an invalid proof is stored as-is; the audit will reject it
  AssumptionSummary summary =
      extract_assumptions(entry.proof, entry.sequent, script.registry, script.sigs);
  for (const auto& tmpl : summary.acts) {
    std::string key = to_text(tmpl);
    if (entry.witnesses.count(key)) continue;
    for (const auto& te : trace.entries) {
      if (!alpha_eq(te.inst.action, tmpl)) continue;
      if (!obs(te.inst, script.registry, script.agents).count(entry.sequent.reasoner)) continue;
      entry.witnesses[key] = te.inst.id;
      break;
    }
  }
}

void bind_proof(RunResult& result, const ScenarioScript& script, const std::string& name,
                const AgentId& agent, ActionId id, int search_depth, std::size_t step_index) {
  const ProofDecl* decl = script.find_proof(name);
  if (!decl) throw ScenarioError(step_index, "unknown proof: " + name);
  StoreEntry entry = resolve_store_entry(script, *decl, search_depth, step_index);
  autoresolve_witnesses(entry, script, result.trace);
  result.store.bind(agent, id, std::move(entry));
}

}  // namespace

AgentId acting_agent(const ActionTemplate& act, const ActionRegistry& reg) {
  const ActionKindSpec& spec = reg.require(act.kind);
  std::size_t pos = 0;
  bool have = false;
  if (spec.po_rule && !spec.po_rule->for_all_agents) {
    pos = spec.po_rule->agent_arg;
    have = true;
  }
  if (!have) {
    for (std::size_t i = 0; i < spec.arg_sorts.size(); ++i) {
      if (spec.arg_sorts[i] == Sort::Agent) {
        pos = i;
        have = true;
        break;
      }
    }
  }
  if (!have) throw SortError("action " + act.kind + " has no agent argument");
  const Term& t = act.args.at(pos);
  if (t.kind() != Term::Kind::AgentConst)
    throw SortError("acting agent of " + to_text(act) + " is not ground");
  return AgentId{t.name()};
}

std::optional<HonestPlan> honest_step(const AgentId& agent, const ActionTemplate& intended,
                                      const SystemState& state, const Justification* candidate,
                                      const ActionRegistry& reg) {
  (void)state;
  HonestPlan plan;
  plan.main = intended;
  PolicyRef obligation = po(intended, agent, reg);
  if (!obligation) return plan;  // nothing to justify, nothing to log
  plan.needs_proof = true;
  if (!candidate) return std::nullopt;  // refuse: no justification available
  if (!(candidate->sequent.reasoner == agent)) return std::nullopt;
  if (!alpha_eq(candidate->sequent.goal, obligation)) return std::nullopt;
  plan.conds = candidate->summary.conds;
  for (const auto& tmpl : candidate->summary.obligs_once)
    plan.oblig_actions.emplace_back(ObligMode::Once, tmpl);
  for (const auto& tmpl : candidate->summary.obligs_many)
    plan.oblig_actions.emplace_back(ObligMode::Many, tmpl);
  plan.log_main = !plan.conds.empty() || !plan.oblig_actions.empty();
  return plan;
}

RunResult run(const ScenarioScript& script, int search_depth) {
  RunResult result;
  result.state.env = script.env;
  for (std::size_t i = 0; i < script.steps.size(); ++i) {
    const ScenarioStep& st = script.steps[i];
    try {
      if (st.honest) {
        AgentId agent = acting_agent(st.action, script.registry);
        std::optional<Justification> candidate;
        if (st.honest_proof) {
          const ProofDecl* decl = script.find_proof(*st.honest_proof);
          if (!decl) throw ScenarioError(i, "unknown proof: " + *st.honest_proof);
          StoreEntry entry = resolve_store_entry(script, *decl, search_depth, i);
          std::string why;
          candidate = make_justification(entry, script.registry, script.sigs, &why);
          if (!candidate) throw ScenarioError(i, "honest step proof " + decl->name + ": " + why);
        }
        auto plan = honest_step(agent, st.action, result.state,
                                candidate ? &*candidate : nullptr, script.registry);
        if (!plan)
          throw ScenarioError(i, agent.name + " refuses " + to_text(st.action) +
                                     ": no justification for its proof obligation");
        std::set<ObligationEntry> oblig_entries;
        for (const auto& [mode, tmpl] : plan->oblig_actions) {
          auto [next, inst] = step(std::move(result.state), tmpl, {LogChoice{agent, {}, {}, {}}},
                                   result.trace, script.registry, script.sigs, script.agents);
          result.state = std::move(next);
          oblig_entries.insert(ObligationEntry{mode, tmpl, inst.id, std::nullopt});
        }
        std::vector<LogChoice> choices;
        if (plan->log_main) choices.push_back(LogChoice{agent, plan->conds, oblig_entries, {}});
        auto [next, inst] = step(std::move(result.state), plan->main, choices, result.trace,
                                 script.registry, script.sigs, script.agents);
        result.state = std::move(next);
        if (plan->needs_proof && st.honest_proof)
          bind_proof(result, script, *st.honest_proof, agent, inst.id, search_depth, i);
      } else {
        auto [next, inst] = step(std::move(result.state), st.action, st.logs, result.trace,
                                 script.registry, script.sigs, script.agents);
        result.state = std::move(next);
        for (const auto& choice : st.logs) {
          if (choice.proof)
            bind_proof(result, script, *choice.proof, choice.logger, inst.id, search_depth, i);
        }
        for (const auto& name : st.bare_proofs) {
          const ProofDecl* decl = script.find_proof(name);
          if (!decl) throw ScenarioError(i, "unknown proof: " + name);
          bind_proof(result, script, name, decl->sequent.reasoner, inst.id, search_depth, i);
        }
      }
    } catch (const ScenarioError&) {
      throw;
    } catch (const Error& e) {
      throw ScenarioError(i, e.what());
    }
  }
  return result;
}

bool subtrace(const std::vector<ActionInstance>& t1, const std::vector<ActionInstance>& t2) {
  std::size_t j = 0;
  for (const auto& a : t1) {
    while (j < t2.size() && t2[j].id != a.id) ++j;
    if (j == t2.size()) return false;
    ++j;
  }
  return true;
}

EvidenceTrace assemble_evidence(const SystemState& state, const AgentId& agent,
                                const std::vector<ActionInstance>& extra,
                                const ExecutionTrace& trace) {
  std::vector<ActionInstance> all;
  auto it = state.logs.find(agent);
  if (it != state.logs.end()) all = project_trace(it->second);
  for (const auto& inst : extra) {
    const TraceEntry* te = trace.find(inst.id);
    if (!te || !alpha_eq(te->inst.action, inst.action))
      throw UnknownInstanceError("evidence instance " + to_text(inst) + " does not occur in the trace");
    all.push_back(inst);
  }
  return EvidenceTrace::of(std::move(all));
}

AuditSnapshot make_snapshot(const ScenarioScript& script, const RunResult& result) {
  AuditSnapshot snap;
  snap.reg = &script.registry;
  snap.sigs = &script.sigs;
  snap.roster = script.agents;
  snap.logs = result.state.logs;
  snap.trace = result.trace;
  snap.store = result.store;
  snap.now = result.state.clock;
  return snap;
}

EvidenceTrace resolve_evidence(const EvidenceSpec& spec, const std::vector<AgentId>& suspects,
                               const AuditSnapshot& snap, std::uint64_t seed) {
  std::vector<ActionInstance> picked;
  auto log_projection = [&](const AgentId& a) {
    auto it = snap.logs.find(a);
    if (it == snap.logs.end()) return std::vector<ActionInstance>{};
    return project_trace(it->second);
  };
  switch (spec.kind) {
    case EvidenceSpec::Kind::SuspectLogs:
      for (const auto& a : suspects) {
        auto proj = log_projection(a);
        picked.insert(picked.end(), proj.begin(), proj.end());
      }
      break;
    case EvidenceSpec::Kind::All:
      for (const auto& te : snap.trace.entries) picked.push_back(te.inst);
      break;
    case EvidenceSpec::Kind::Ids:
      for (ActionId id : spec.ids) {
        const TraceEntry* te = snap.trace.find(id);
        if (!te) throw UnknownInstanceError("evidence id " + std::to_string(id) + " not in the trace");
        picked.push_back(te->inst);
      }
      break;
    case EvidenceSpec::Kind::Sample: {
      // random subtrace extension of the suspects' own logs
      std::set<ActionId> have;
      for (const auto& a : suspects)
        for (const auto& inst : log_projection(a)) {
          if (have.insert(inst.id).second) picked.push_back(inst);
        }
      std::mt19937_64 rng(seed);
      for (const auto& te : snap.trace.entries) {
        if (have.count(te.inst.id)) continue;
        if (rng() % 2 == 0) picked.push_back(te.inst);
      }
      break;
    }
  }
  return EvidenceTrace::of(std::move(picked));
}

}  // namespace auditlog
