#include "auditlog/audit.hpp"

#include <algorithm>

namespace auditlog {

const char* fail_reason_name(FailReason r) {
  switch (r) {
    case FailReason::None: return "none";
    case FailReason::MissingJustification: return "MissingJustification";
    case FailReason::UnfulfilledExpiredObligation: return "UnfulfilledExpiredObligation";
    case FailReason::UnwitnessedActionAssumption: return "UnwitnessedActionAssumption";
  }
  return "?";
}

void ProofStore::bind(const AgentId& agent, ActionId id, StoreEntry entry) {
  entries_[{agent, id}] = std::move(entry);
}

const StoreEntry* ProofStore::find(const AgentId& agent, ActionId id) const {
  auto it = entries_.find({agent, id});
  return it == entries_.end() ? nullptr : &it->second;
}

std::optional<Justification> make_justification(const StoreEntry& entry, const ActionRegistry& reg,
                                                const SignatureTable& sigs, std::string* error) {
  if (auto e = check(entry.proof, entry.sequent, reg, sigs)) {
    if (error) *error = e->to_string();
    return std::nullopt;
  }
  Justification j;
  j.name = entry.name;
  j.proof = entry.proof;
  j.sequent = entry.sequent;
  j.summary = extract_assumptions(entry.proof, entry.sequent, reg, sigs);
  j.witnesses = entry.witnesses;
  return j;
}

bool is_justification(const Justification& j, const AgentId& agent, const LoggedAction& lac,
                      const ActionRegistry& reg, std::string* why) {
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  if (!(j.sequent.reasoner == agent)) return fail("proof is not from " + agent.name);
  PolicyRef obligation = po(lac.act, agent, reg);
  if (!obligation) return fail("the action carries no proof obligation");
  if (!alpha_eq(j.sequent.goal, obligation))
    return fail("proof concludes " + to_text(j.sequent.goal) + " instead of " + to_text(obligation));
  // Initial assumptions must be basic predicates, actions or obligations.
  for (const auto& item : j.sequent.gamma) {
    if (item.kind == NonLinItem::Kind::Pol && item.pol->kind() != Policy::Kind::Atom)
      return fail("assumption " + to_text(item.pol) + " is not a basic predicate");
  }
  for (const auto& c : j.summary.conds) {
    if (!lac.conds.count(c)) return fail("condition " + to_text(c) + " was not logged");
  }
  // Use-once obligations: multiset injection into the logged !entries.
  std::map<std::string, std::size_t> needed;
  for (const auto& a : j.summary.obligs_once) ++needed[to_text(a)];
  for (const auto& [text, count] : needed) {
    std::size_t have = 0;
    for (const auto& o : lac.obligs)
      if (o.mode == ObligMode::Once && to_text(o.action) == text) ++have;
    if (have < count)
      return fail("use-once obligation " + text + " needed " + std::to_string(count) +
                  " times, logged " + std::to_string(have));
  }
  // Use-many obligations: set inclusion.
  for (const auto& a : j.summary.obligs_many) {
    bool found = false;
    for (const auto& o : lac.obligs)
      if (o.mode == ObligMode::Many && alpha_eq(o.action, a)) found = true;
    if (!found) return fail("use-many obligation ?" + to_text(a) + " was not logged");
  }
  return true;
}

EvidenceTrace EvidenceTrace::of(std::vector<ActionInstance> actions) {
  std::sort(actions.begin(), actions.end(),
            [](const ActionInstance& a, const ActionInstance& b) { return a.id < b.id; });
  actions.erase(std::unique(actions.begin(), actions.end(),
                            [](const ActionInstance& a, const ActionInstance& b) { return a.id == b.id; }),
                actions.end());
  EvidenceTrace e;
  e.actions = std::move(actions);
  return e;
}

EvidenceTrace merge_evidence(const EvidenceTrace& e, const std::vector<ActionInstance>& newacts) {
  std::vector<ActionInstance> all = e.actions;
  all.insert(all.end(), newacts.begin(), newacts.end());
  return EvidenceTrace::of(std::move(all));
}

LaaOutcome Auditor::laa(const AgentId& agent, const LoggedAction& lac) const {
  LaaOutcome out;
  PolicyRef obligation = po(lac.act, agent, *snap_.reg);
  if (obligation) {
    const StoreEntry* entry = snap_.store.find(agent, lac.act.id);
    if (!entry) {
      out.pass = false;
      out.reason = FailReason::MissingJustification;
      out.detail = "no justification provided for " + to_text(lac.act);
      return out;
    }
    std::string detail;
    auto j = make_justification(*entry, *snap_.reg, *snap_.sigs, &detail);
    if (!j) {
      out.pass = false;
      out.reason = FailReason::MissingJustification;
      out.detail = "stored proof " + entry->name + " does not check: " + detail;
      return out;
    }
    if (!is_justification(*j, agent, lac, *snap_.reg, &detail)) {
      out.pass = false;
      out.reason = FailReason::MissingJustification;
      out.detail = "stored proof " + entry->name + " does not justify " + to_text(lac.act) + ": " + detail;
      return out;
    }
    // Every cited action needs an id occurring in the trace, observed by the
    // agent.
    for (const auto& tmpl : j->summary.acts) {
      auto it = j->witnesses.find(to_text(tmpl));
      if (it == j->witnesses.end()) {
        out.pass = false;
        out.reason = FailReason::UnwitnessedActionAssumption;
        out.detail = "no id provided for cited action " + to_text(tmpl);
        return out;
      }
      const TraceEntry* te = snap_.trace.find(it->second);
      if (!te || !alpha_eq(te->inst.action, tmpl)) {
        out.pass = false;
        out.reason = FailReason::UnwitnessedActionAssumption;
        out.detail = "cited action " + to_text(tmpl) + " with id " + std::to_string(it->second) +
                     " does not occur in the trace";
        return out;
      }
      if (!obs(te->inst, *snap_.reg, snap_.roster).count(agent)) {
        out.pass = false;
        out.reason = FailReason::UnwitnessedActionAssumption;
        out.detail = agent.name + " could not observe cited action " + to_text(te->inst);
        return out;
      }
      out.cited.push_back(te->inst);
    }
    out.used = entry;
  }
  // Expired obligations must have been executed and logged by the agent.
  for (const auto& o : lac.obligs) {
    if (!expired(o, snap_.now, snap_.trace)) continue;
    bool in_own_log = false;
    auto logit = snap_.logs.find(agent);
    if (logit != snap_.logs.end()) {
      for (const auto& inst : project_trace(logit->second)) {
        bool matches = o.ref ? *o.ref == inst.id : alpha_eq(o.action, inst.action);
        if (matches) in_own_log = true;
      }
    }
    if (!in_own_log) {
      out.pass = false;
      out.reason = FailReason::UnfulfilledExpiredObligation;
      out.detail = "obligation " + to_text(o.action) + " expired at tick " +
                   std::to_string(o.deadline.value_or(0)) + " without being executed and logged";
      return out;
    }
  }
  return out;
}

AaOutcome Auditor::aa(const AgentId& agent, const ActionInstance& act) const {
  AaOutcome out;
  const LoggedAction* logged = nullptr;
  auto logit = snap_.logs.find(agent);
  if (logit != snap_.logs.end()) {
    for (const auto& e : logit->second.entries)
      if (e.lac.act.id == act.id) logged = &e.lac;
  }
  if (logged) {
    out.was_logged = true;
    out.outcome = laa(agent, *logged);
  } else {
    out.outcome = laa(agent, LoggedAction{act, {}, {}});
  }
  out.newacts = out.outcome.cited;
  return out;
}

AuditResult Auditor::acc(const AgentId& agent, const EvidenceTrace& evidence) const {
  AuditResult res;
  std::vector<ActionInstance> pending = evidence.actions;
  std::set<ActionId> original;
  for (const auto& a : pending) original.insert(a.id);
  std::set<ActionId> visited;
  std::set<ActionId> discovered_ids;
  const std::uint64_t hard_bound = 2 * snap_.trace.size() + pending.size() + 2;

  while (!pending.empty()) {
    if (++res.iterations > hard_bound)
      throw Error("acc: iteration bound exceeded; evidence merging is broken");
    ActionInstance act = pending.back();
    pending.pop_back();
    if (visited.count(act.id)) continue;  // the frozen store makes re-audits redundant
    visited.insert(act.id);
    res.visited.insert({agent, act.id});

    AaOutcome ao = aa(agent, act);
    ++res.aa_calls;
    ActionCheck chk{agent, act.id, ao.outcome.pass, ao.outcome.reason, ao.outcome.detail};
    res.checks.push_back(chk);
    if (!ao.outcome.pass) {
      res.verdict = false;
      res.failures.push_back(chk);
      res.final_evidence = merge_evidence(evidence, res.discovered);
      return res;
    }
    std::vector<ActionInstance> fresh;
    for (const auto& inst : ao.newacts) {
      if (!original.count(inst.id) && !discovered_ids.count(inst.id)) {
        discovered_ids.insert(inst.id);
        res.discovered.push_back(inst);
      }
      bool in_pending = false;
      for (const auto& p : pending)
        if (p.id == inst.id) in_pending = true;
      if (!in_pending && !visited.count(inst.id)) fresh.push_back(inst);
    }
    if (!fresh.empty()) {
      EvidenceTrace merged = merge_evidence(EvidenceTrace::of(pending), fresh);
      pending = merged.actions;
    }
  }
  res.verdict = true;
  res.final_evidence = merge_evidence(evidence, res.discovered);
  return res;
}

RecursiveAuditResult Auditor::recursive_audit(const std::vector<AgentId>& suspects,
                                              const EvidenceTrace& evidence0) const {
  RecursiveAuditResult res;
  std::vector<AgentId> priority = suspects;  // pop order; implicated agents are appended
  std::set<AgentId> open(suspects.begin(), suspects.end());
  EvidenceTrace evidence = evidence0;
  const std::uint64_t hard_bound =
      (snap_.roster.size() + 1) * (snap_.trace.size() + 1) + suspects.size() + 1;

  while (!open.empty()) {
    if (++res.iterations > hard_bound)
      throw Error("recursive_audit: iteration bound exceeded");
    AgentId agent;
    for (const auto& a : priority) {
      if (open.count(a)) {
        agent = a;
        break;
      }
    }
    AuditResult round = acc(agent, evidence);
    res.aa_calls += round.aa_calls;
    res.visited.insert(round.visited.begin(), round.visited.end());
    res.rounds.push_back(AuditRound{agent, round});
    if (!round.verdict) {
      res.verdict = false;
      res.final_evidence = evidence;
      return res;
    }
    open.erase(agent);
    for (const auto& inst : round.discovered) {
      for (const auto& g : snap_.roster) {
        if (po(inst.action, g, *snap_.reg)) {
          if (!open.count(g)) {
            open.insert(g);
            if (std::find(priority.begin(), priority.end(), g) == priority.end())
              priority.push_back(g);
          }
        }
      }
    }
    evidence = merge_evidence(evidence, round.discovered);
  }
  res.verdict = true;
  res.final_evidence = evidence;
  return res;
}

}  // namespace auditlog
