#include "auditlog/kernel.hpp"

#include <algorithm>
#include <sstream>

namespace auditlog {

namespace {

struct RuleInfo {
  Rule rule;
  const char* name;
  std::size_t arity;
};

constexpr RuleInfo kRules[] = {
    {Rule::Init, "init", 0},
    {Rule::Cut, "cut", 2},
    {Rule::AndL1, "and_l1", 1},
    {Rule::AndL2, "and_l2", 1},
    {Rule::AndR, "and_r", 2},
    {Rule::ImpL, "imp_l", 2},
    {Rule::ImpR, "imp_r", 1},
    {Rule::BangImpL, "bang_imp_l", 1},
    {Rule::BangImpR, "bang_imp_r", 1},
    {Rule::QuestImpL, "quest_imp_l", 1},
    {Rule::QuestImpR, "quest_imp_r", 1},
    {Rule::ForallLAgent, "forall_l_agent", 1},
    {Rule::ForallLData, "forall_l_data", 1},
    {Rule::ForallRAgent, "forall_r_agent", 1},
    {Rule::ForallRData, "forall_r_data", 1},
    {Rule::WL, "w_l", 1},
    {Rule::WLAct, "w_l_act", 1},
    {Rule::ContrL, "contr_l", 1},
    {Rule::PermL, "perm_l", 1},
    {Rule::PermAct, "perm_act", 1},
    {Rule::Say, "say", 1},
    {Rule::ObsAct, "obs_act", 1},
    {Rule::Refine, "refine", 1},
    {Rule::DerPol, "der_pol", 0},
};

const RuleInfo& info(Rule r) {
  for (const auto& ri : kRules)
    if (ri.rule == r) return ri;
  throw Error("unknown rule");
}

}  // namespace

const char* rule_name(Rule r) { return info(r).name; }

std::optional<Rule> rule_from_name(const std::string& name) {
  for (const auto& ri : kRules)
    if (name == ri.name) return ri.rule;
  return std::nullopt;
}

const char* op_rule_name(OpDerivation::Rule r) {
  switch (r) {
    case OpDerivation::Rule::CondImp: return "op_cond_imp";
    case OpDerivation::Rule::ObligImp: return "op_oblig_imp";
    case OpDerivation::Rule::And: return "op_and";
    case OpDerivation::Rule::Forall: return "op_forall";
    case OpDerivation::Rule::Says: return "op_says";
    case OpDerivation::Rule::Owns: return "op_owns";
    case OpDerivation::Rule::Atom: return "op_atom";
  }
  return "?";
}

const char* check_code_name(CheckCode c) {
  switch (c) {
    case CheckCode::RuleArity: return "RuleArity";
    case CheckCode::GoalMismatch: return "GoalMismatch";
    case CheckCode::ItemMismatch: return "ItemMismatch";
    case CheckCode::SplitMismatch: return "SplitMismatch";
    case CheckCode::NonFreshEigenvariable: return "NonFreshEigenvariable";
    case CheckCode::RefineContextNotEmpty: return "RefineContextNotEmpty";
    case CheckCode::LinearContraction: return "LinearContraction";
    case CheckCode::NoConclusion: return "NoConclusion";
    case CheckCode::OpUnresolvedData: return "OpUnresolvedData";
    case CheckCode::OwnerMismatch: return "OwnerMismatch";
    case CheckCode::ContextUnderflow: return "ContextUnderflow";
    case CheckCode::PositionOutOfRange: return "PositionOutOfRange";
    case CheckCode::SortMismatch: return "SortMismatch";
    case CheckCode::NotGround: return "NotGround";
    case CheckCode::UnknownActionKind: return "UnknownActionKind";
    case CheckCode::IllFormedSequent: return "IllFormedSequent";
  }
  return "?";
}

std::string CheckError::to_string() const {
  std::string out = std::string("[") + check_code_name(code) + "] " + message;
  if (!path.empty()) out += " (at " + path + ")";
  return out;
}

std::string to_text(const NonLinItem& item) {
  switch (item.kind) {
    case NonLinItem::Kind::Pol: return to_text(item.pol);
    case NonLinItem::Kind::Act: return "act " + to_text(item.act);
    case NonLinItem::Kind::ManyOblig: return "?[" + to_text(item.act) + "]";
  }
  return "?";
}

std::string to_text(const LinItem& item) { return "![" + to_text(item.act) + "]"; }

std::string to_text(const Sequent& s) {
  std::ostringstream os;
  if (s.gamma.empty()) {
    os << ".";
  } else {
    for (std::size_t i = 0; i < s.gamma.size(); ++i) {
      if (i) os << ", ";
      os << to_text(s.gamma[i]);
    }
  }
  os << " ; ";
  if (s.delta.empty()) {
    os << ".";
  } else {
    for (std::size_t i = 0; i < s.delta.size(); ++i) {
      if (i) os << ", ";
      os << to_text(s.delta[i]);
    }
  }
  os << " |-" << s.reasoner.name << " " << to_text(s.goal);
  return os.str();
}

// ---------------------------------------------------------------------------
// Checker internals

namespace {

// Context items keep the index they had in the root sequent; items introduced
// by rule applications carry no index. Assumption extraction records only
// root-indexed consumptions.
struct TNonLin {
  NonLinItem item;
  std::optional<std::size_t> root;
};
struct TLin {
  LinItem item;
  std::optional<std::size_t> root;
};

struct TSeq {
  AgentId reasoner;
  std::vector<TNonLin> gamma;
  std::vector<TLin> delta;
  PolicyRef goal;
};

Sequent untag(const TSeq& s) {
  Sequent out;
  out.reasoner = s.reasoner;
  out.goal = s.goal;
  out.gamma.reserve(s.gamma.size());
  for (const auto& g : s.gamma) out.gamma.push_back(g.item);
  out.delta.reserve(s.delta.size());
  for (const auto& d : s.delta) out.delta.push_back(d.item);
  return out;
}

struct ExplainLine {
  int depth;
  std::string text;
};

struct Ctx {
  const ActionRegistry* reg = nullptr;
  const SignatureTable* sigs = nullptr;
  AssumptionSummary* extract = nullptr;
  std::vector<ExplainLine>* lines = nullptr;
  bool in_refine = false;
};

CheckError err(CheckCode code, std::string msg, const std::string& path, const ProofTerm& pt) {
  return CheckError{code, std::move(msg), path, pt.pos};
}

void collect_item_names(const NonLinItem& it, std::set<std::string>& out) {
  if (it.kind == NonLinItem::Kind::Pol)
    collect_names(*it.pol, out);
  else
    collect_names(it.act, out);
}

std::set<std::string> sequent_names(const TSeq& s) {
  std::set<std::string> out;
  out.insert(s.reasoner.name);
  for (const auto& g : s.gamma) collect_item_names(g.item, out);
  for (const auto& d : s.delta) collect_names(d.item.act, out);
  collect_names(*s.goal, out);
  return out;
}

std::optional<CheckError> check_rec(const ProofTerm& pt, const TSeq& s, Ctx& ctx, int depth,
                                    const std::string& path);

std::optional<CheckError> check_child(const ProofTerm& parent, std::size_t idx, const TSeq& premise,
                                      Ctx& ctx, int depth, const std::string& path) {
  std::string child_path = path;
  if (!child_path.empty()) child_path += "/";
  child_path += rule_name(parent.rule);
  if (parent.children.size() > 1) child_path += "." + std::to_string(idx);
  return check_rec(parent.children[idx], premise, ctx, depth + 1, child_path);
}

std::optional<CheckError> check_op_rec(const OpDerivation& od, const std::vector<TNonLin>& gamma,
                                       const PolicyRef& p, const AgentId& reasoner, const Ctx& ctx,
                                       const std::string& path) {
  auto fail = [&](CheckCode code, std::string msg) {
    return CheckError{code, std::move(msg), path + "/" + op_rule_name(od.rule), SourcePos{}};
  };
  auto need_children = [&](std::size_t n) -> std::optional<CheckError> {
    if (od.children.size() != n)
      return fail(CheckCode::RuleArity, std::string(op_rule_name(od.rule)) + " expects " +
                                            std::to_string(n) + " premises");
    return std::nullopt;
  };
  auto owns_at = [&](std::size_t idx, const Term& data) -> std::optional<CheckError> {
    if (idx >= gamma.size())
      return fail(CheckCode::PositionOutOfRange, "owns index " + std::to_string(idx) + " out of range");
    const NonLinItem& it = gamma[idx].item;
    if (it.kind != NonLinItem::Kind::Pol || it.pol->kind() != Policy::Kind::Owns)
      return fail(CheckCode::OpUnresolvedData,
                  "context item " + std::to_string(idx) + " is not an owns fact");
    const auto& o = it.pol->as_owns();
    if (!(o.data == data))
      return fail(CheckCode::OpUnresolvedData, "owns fact at " + std::to_string(idx) +
                                                   " covers " + to_text(o.data) + ", not " + to_text(data));
    if (!o.owner.is_agent(reasoner))
      return fail(CheckCode::OwnerMismatch,
                  to_text(data) + " is owned by " + to_text(o.owner) + ", not by the reasoner");
    return std::nullopt;
  };

  switch (od.rule) {
    case OpDerivation::Rule::CondImp: {
      if (auto e = need_children(1)) return e;
      if (p->kind() != Policy::Kind::CondImplies)
        return fail(CheckCode::GoalMismatch, "policy is not a conditional implication");
      return check_op_rec(od.children[0], gamma, p->as_cond().body, reasoner, ctx,
                          path + "/" + op_rule_name(od.rule));
    }
    case OpDerivation::Rule::ObligImp: {
      if (auto e = need_children(1)) return e;
      if (p->kind() != Policy::Kind::ObligImplies)
        return fail(CheckCode::GoalMismatch, "policy is not an obligation implication");
      return check_op_rec(od.children[0], gamma, p->as_oblig().body, reasoner, ctx,
                          path + "/" + op_rule_name(od.rule));
    }
    case OpDerivation::Rule::And: {
      if (auto e = need_children(2)) return e;
      if (p->kind() != Policy::Kind::And)
        return fail(CheckCode::GoalMismatch, "policy is not a conjunction");
      if (auto e = check_op_rec(od.children[0], gamma, p->as_and().lhs, reasoner, ctx,
                                path + "/" + op_rule_name(od.rule)))
        return e;
      return check_op_rec(od.children[1], gamma, p->as_and().rhs, reasoner, ctx,
                          path + "/" + op_rule_name(od.rule));
    }
    case OpDerivation::Rule::Says: {
      if (auto e = need_children(1)) return e;
      if (p->kind() != Policy::Kind::SaysTo)
        return fail(CheckCode::GoalMismatch, "policy is not a says statement");
      return check_op_rec(od.children[0], gamma, p->as_says().body, reasoner, ctx,
                          path + "/" + op_rule_name(od.rule));
    }
    case OpDerivation::Rule::Forall: {
      if (auto e = need_children(1)) return e;
      if (p->kind() != Policy::Kind::Forall)
        return fail(CheckCode::GoalMismatch, "policy is not universally quantified");
      if (od.eigen.empty()) return fail(CheckCode::RuleArity, "op_forall needs an eigenvariable");
      std::set<std::string> taken;
      for (const auto& g : gamma) collect_item_names(g.item, taken);
      collect_names(*p, taken);
      taken.insert(reasoner.name);
      if (taken.count(od.eigen))
        return fail(CheckCode::NonFreshEigenvariable, "eigenvariable " + od.eigen + " is not fresh");
      const auto& n = p->as_forall();
      Term eigen = n.binder.sort() == Sort::Agent ? Term::agent_const(od.eigen)
                                                  : Term::data_const(od.eigen);
      return check_op_rec(od.children[0], gamma, substitute(n.body, n.binder, eigen), reasoner, ctx,
                          path + "/" + op_rule_name(od.rule));
    }
    case OpDerivation::Rule::Owns: {
      if (auto e = need_children(0)) return e;
      if (p->kind() != Policy::Kind::Owns)
        return fail(CheckCode::GoalMismatch, "policy is not an owns statement");
      if (od.owns_indices.size() != 1)
        return fail(CheckCode::RuleArity, "op_owns carries exactly one context index");
      return owns_at(od.owns_indices[0], p->as_owns().data);
    }
    case OpDerivation::Rule::Atom: {
      if (auto e = need_children(0)) return e;
      if (p->kind() != Policy::Kind::Atom)
        return fail(CheckCode::GoalMismatch, "policy is not an atom");
      const auto& at = p->as_atom();
      const PredicateSignature* sig = ctx.sigs->find(at.pred);
      if (!sig) return fail(CheckCode::SortMismatch, "unknown predicate " + at.pred);
      if (od.owns_indices.size() != sig->affected_data.size())
        return fail(CheckCode::OpUnresolvedData,
                    at.pred + " affects " + std::to_string(sig->affected_data.size()) +
                        " data positions, " + std::to_string(od.owns_indices.size()) + " resolved");
      for (std::size_t k = 0; k < sig->affected_data.size(); ++k) {
        const Term& data = at.args.at(sig->affected_data[k]);
        if (auto e = owns_at(od.owns_indices[k], data)) return e;
      }
      return std::nullopt;
    }
  }
  return fail(CheckCode::RuleArity, "unknown op rule");
}

std::optional<CheckError> check_rec(const ProofTerm& pt, const TSeq& s, Ctx& ctx, int depth,
                                    const std::string& path) {
  if (ctx.lines)
    ctx.lines->push_back(ExplainLine{depth, std::string(rule_name(pt.rule)) + "  " + to_text(untag(s))});

  const RuleInfo& ri = info(pt.rule);
  if (pt.children.size() != ri.arity)
    return err(CheckCode::RuleArity,
               std::string(ri.name) + " expects " + std::to_string(ri.arity) + " premises, got " +
                   std::to_string(pt.children.size()),
               path, pt);

  const std::size_t n = s.gamma.size();
  const std::size_t m = s.delta.size();

  auto gamma_underflow = [&](const char* rule) {
    if (ctx.in_refine)
      return err(CheckCode::RefineContextNotEmpty,
                 std::string(rule) + " needs a context item, but the refine premise keeps only the "
                                     "refined policy",
                 path, pt);
    return err(CheckCode::ContextUnderflow, std::string(rule) + " needs a non-empty context", path, pt);
  };

  switch (pt.rule) {
    case Rule::Init: {
      if (n == 0) return gamma_underflow("init");
      const NonLinItem& last = s.gamma.back().item;
      if (last.kind != NonLinItem::Kind::Pol)
        return err(CheckCode::ItemMismatch, "init expects a policy as last context item", path, pt);
      if (!alpha_eq(last.pol, s.goal))
        return err(CheckCode::GoalMismatch,
                   "init: last item " + to_text(last.pol) + " does not match goal " + to_text(s.goal),
                   path, pt);
      if (ctx.extract && s.gamma.back().root) {
        if (auto atom = as_ground_atom(*last.pol)) ctx.extract->conds.insert(*atom);
      }
      return std::nullopt;
    }

    case Rule::Say: {
      if (n == 0) return gamma_underflow("say");
      const NonLinItem& last = s.gamma.back().item;
      if (last.kind != NonLinItem::Kind::Pol || last.pol->kind() != Policy::Kind::SaysTo)
        return err(CheckCode::ItemMismatch, "say expects a says statement as last context item", path, pt);
      const auto& says = last.pol->as_says();
      if (!says.target.is_agent(s.reasoner))
        return err(CheckCode::ItemMismatch,
                   "say applies only to statements addressed to the reasoner " + s.reasoner.name, path,
                   pt);
      TSeq premise = s;
      premise.gamma.back() = TNonLin{NonLinItem::policy(says.body), std::nullopt};
      return check_child(pt, 0, premise, ctx, depth, path);
    }

    case Rule::ObsAct: {
      if (n == 0) return gamma_underflow("obs_act");
      const NonLinItem& last = s.gamma.back().item;
      if (last.kind != NonLinItem::Kind::Act)
        return err(CheckCode::ItemMismatch, "obs_act expects an action as last context item", path, pt);
      PolicyRef c;
      try {
        c = concl(last.act, s.reasoner, *ctx.reg);
      } catch (const RegistryError& e) {
        return err(CheckCode::UnknownActionKind, e.what(), path, pt);
      }
      if (!c)
        return err(CheckCode::NoConclusion,
                   s.reasoner.name + " concludes nothing from " + to_text(last.act), path, pt);
      if (ctx.extract && s.gamma.back().root) ctx.extract->acts.insert(last.act);
      TSeq premise = s;
      premise.gamma.back() = TNonLin{NonLinItem::policy(c), std::nullopt};
      return check_child(pt, 0, premise, ctx, depth, path);
    }

    case Rule::Refine: {
      if (n == 0) return gamma_underflow("refine");
      const NonLinItem& last = s.gamma.back().item;
      if (last.kind != NonLinItem::Kind::Pol || last.pol->kind() != Policy::Kind::SaysTo)
        return err(CheckCode::ItemMismatch, "refine expects a says statement as last context item",
                   path, pt);
      if (s.goal->kind() != Policy::Kind::SaysTo)
        return err(CheckCode::GoalMismatch, "refine concludes a says statement", path, pt);
      const auto& have = last.pol->as_says();
      const auto& want = s.goal->as_says();
      if (!have.speaker.is_agent(s.reasoner))
        return err(CheckCode::ItemMismatch, "refine applies to the reasoner's own says statements",
                   path, pt);
      if (!(have.speaker == want.speaker) || !(have.target == want.target))
        return err(CheckCode::GoalMismatch, "refine must keep speaker and addressee", path, pt);
      TSeq premise;
      premise.reasoner = s.reasoner;
      premise.gamma.push_back(TNonLin{NonLinItem::policy(have.body), std::nullopt});
      premise.goal = want.body;
      bool saved = ctx.in_refine;
      ctx.in_refine = true;
      auto e = check_child(pt, 0, premise, ctx, depth, path);
      ctx.in_refine = saved;
      return e;
    }

    case Rule::DerPol: {
      if (!pt.op) return err(CheckCode::RuleArity, "der_pol carries an op derivation", path, pt);
      return check_op_rec(*pt.op, s.gamma, s.goal, s.reasoner, ctx, path + "/der_pol");
    }

    case Rule::Cut: {
      if (!pt.cut_formula) return err(CheckCode::RuleArity, "cut carries its cut formula", path, pt);
      if (pt.gamma_split > n || pt.delta_split > m)
        return err(CheckCode::SplitMismatch, "cut split exceeds context size", path, pt);
      TSeq left;
      left.reasoner = s.reasoner;
      left.gamma.assign(s.gamma.begin(), s.gamma.begin() + pt.gamma_split);
      left.delta.assign(s.delta.begin(), s.delta.begin() + pt.delta_split);
      left.goal = pt.cut_formula;
      if (auto e = check_child(pt, 0, left, ctx, depth, path)) return e;
      TSeq right;
      right.reasoner = s.reasoner;
      right.gamma.assign(s.gamma.begin() + pt.gamma_split, s.gamma.end());
      right.gamma.push_back(TNonLin{NonLinItem::policy(pt.cut_formula), std::nullopt});
      right.delta.assign(s.delta.begin() + pt.delta_split, s.delta.end());
      right.goal = s.goal;
      return check_child(pt, 1, right, ctx, depth, path);
    }

    case Rule::AndR: {
      if (s.goal->kind() != Policy::Kind::And)
        return err(CheckCode::GoalMismatch, "and_r concludes a conjunction", path, pt);
      if (pt.gamma_split > n || pt.delta_split > m)
        return err(CheckCode::SplitMismatch, "and_r split exceeds context size", path, pt);
      TSeq left;
      left.reasoner = s.reasoner;
      left.gamma.assign(s.gamma.begin(), s.gamma.begin() + pt.gamma_split);
      left.delta.assign(s.delta.begin(), s.delta.begin() + pt.delta_split);
      left.goal = s.goal->as_and().lhs;
      if (auto e = check_child(pt, 0, left, ctx, depth, path)) return e;
      TSeq right;
      right.reasoner = s.reasoner;
      right.gamma.assign(s.gamma.begin() + pt.gamma_split, s.gamma.end());
      right.delta.assign(s.delta.begin() + pt.delta_split, s.delta.end());
      right.goal = s.goal->as_and().rhs;
      return check_child(pt, 1, right, ctx, depth, path);
    }

    case Rule::ImpL: {
      if (n == 0) return gamma_underflow("imp_l");
      const NonLinItem& last = s.gamma.back().item;
      if (last.kind != NonLinItem::Kind::Pol || last.pol->kind() != Policy::Kind::CondImplies)
        return err(CheckCode::ItemMismatch, "imp_l expects an implication as last context item", path,
                   pt);
      if (pt.gamma_split > n - 1 || pt.delta_split > m)
        return err(CheckCode::SplitMismatch, "imp_l split exceeds context size", path, pt);
      const auto& imp = last.pol->as_cond();
      TSeq left;
      left.reasoner = s.reasoner;
      left.gamma.assign(s.gamma.begin(), s.gamma.begin() + pt.gamma_split);
      left.delta.assign(s.delta.begin(), s.delta.begin() + pt.delta_split);
      left.goal = imp.cond;
      if (auto e = check_child(pt, 0, left, ctx, depth, path)) return e;
      TSeq right;
      right.reasoner = s.reasoner;
      right.gamma.assign(s.gamma.begin() + pt.gamma_split, s.gamma.end() - 1);
      right.gamma.push_back(TNonLin{NonLinItem::policy(imp.body), std::nullopt});
      right.delta.assign(s.delta.begin() + pt.delta_split, s.delta.end());
      right.goal = s.goal;
      return check_child(pt, 1, right, ctx, depth, path);
    }

    case Rule::AndL1:
    case Rule::AndL2: {
      if (n == 0) return gamma_underflow("and_l");
      const NonLinItem& last = s.gamma.back().item;
      if (last.kind != NonLinItem::Kind::Pol || last.pol->kind() != Policy::Kind::And)
        return err(CheckCode::ItemMismatch, "and_l expects a conjunction as last context item", path,
                   pt);
      TSeq premise = s;
      premise.gamma.back() = TNonLin{
          NonLinItem::policy(pt.rule == Rule::AndL1 ? last.pol->as_and().lhs : last.pol->as_and().rhs),
          std::nullopt};
      return check_child(pt, 0, premise, ctx, depth, path);
    }

    case Rule::ImpR: {
      if (s.goal->kind() != Policy::Kind::CondImplies)
        return err(CheckCode::GoalMismatch, "imp_r concludes an implication", path, pt);
      TSeq premise = s;
      premise.gamma.push_back(TNonLin{NonLinItem::policy(s.goal->as_cond().cond), std::nullopt});
      premise.goal = s.goal->as_cond().body;
      return check_child(pt, 0, premise, ctx, depth, path);
    }

    case Rule::BangImpL: {
      if (m == 0)
        return err(CheckCode::LinearContraction,
                   "bang_imp_l needs a use-once obligation; the linear context is exhausted", path, pt);
      TSeq premise = s;
      TLin consumed = premise.delta.back();
      premise.delta.pop_back();
      premise.goal = Policy::oblig_implies(Requirement{ObligMode::Once, consumed.item.act}, s.goal);
      if (ctx.extract && consumed.root) ctx.extract->obligs_once.push_back(consumed.item.act);
      return check_child(pt, 0, premise, ctx, depth, path);
    }

    case Rule::BangImpR: {
      if (s.goal->kind() != Policy::Kind::ObligImplies ||
          s.goal->as_oblig().req.mode != ObligMode::Once)
        return err(CheckCode::GoalMismatch, "bang_imp_r concludes a use-once obligation implication",
                   path, pt);
      TSeq premise = s;
      premise.goal = s.goal->as_oblig().body;
      return check_child(pt, 0, premise, ctx, depth, path);
    }

    case Rule::QuestImpL: {
      if (n == 0) return gamma_underflow("quest_imp_l");
      const NonLinItem& last = s.gamma.back().item;
      if (last.kind != NonLinItem::Kind::ManyOblig)
        return err(CheckCode::ItemMismatch,
                   "quest_imp_l expects a use-many obligation as last context item", path, pt);
      if (ctx.extract && s.gamma.back().root) ctx.extract->obligs_many.insert(last.act);
      TSeq premise = s;
      premise.gamma.pop_back();
      premise.goal = Policy::oblig_implies(Requirement{ObligMode::Many, last.act}, s.goal);
      return check_child(pt, 0, premise, ctx, depth, path);
    }

    case Rule::QuestImpR: {
      if (s.goal->kind() != Policy::Kind::ObligImplies ||
          s.goal->as_oblig().req.mode != ObligMode::Many)
        return err(CheckCode::GoalMismatch, "quest_imp_r concludes a use-many obligation implication",
                   path, pt);
      TSeq premise = s;
      premise.goal = s.goal->as_oblig().body;
      return check_child(pt, 0, premise, ctx, depth, path);
    }

    case Rule::ForallLAgent:
    case Rule::ForallLData: {
      if (n == 0) return gamma_underflow("forall_l");
      const NonLinItem& last = s.gamma.back().item;
      if (last.kind != NonLinItem::Kind::Pol || last.pol->kind() != Policy::Kind::Forall)
        return err(CheckCode::ItemMismatch, "forall_l expects a quantified policy as last context item",
                   path, pt);
      Sort want = pt.rule == Rule::ForallLAgent ? Sort::Agent : Sort::Data;
      const auto& fa = last.pol->as_forall();
      if (fa.binder.sort() != want)
        return err(CheckCode::SortMismatch, "forall_l rule sort does not match the binder", path, pt);
      if (!pt.witness) return err(CheckCode::RuleArity, "forall_l carries a witness term", path, pt);
      if (pt.witness->sort() != want)
        return err(CheckCode::SortMismatch, "witness " + to_text(*pt.witness) + " has the wrong sort",
                   path, pt);
      TSeq premise = s;
      premise.gamma.back() =
          TNonLin{NonLinItem::policy(substitute(fa.body, fa.binder, *pt.witness)), std::nullopt};
      return check_child(pt, 0, premise, ctx, depth, path);
    }

    case Rule::ForallRAgent:
    case Rule::ForallRData: {
      if (s.goal->kind() != Policy::Kind::Forall)
        return err(CheckCode::GoalMismatch, "forall_r concludes a quantified policy", path, pt);
      Sort want = pt.rule == Rule::ForallRAgent ? Sort::Agent : Sort::Data;
      const auto& fa = s.goal->as_forall();
      if (fa.binder.sort() != want)
        return err(CheckCode::SortMismatch, "forall_r rule sort does not match the binder", path, pt);
      if (pt.eigen.empty()) return err(CheckCode::RuleArity, "forall_r carries an eigenvariable", path, pt);
      if (sequent_names(s).count(pt.eigen))
        return err(CheckCode::NonFreshEigenvariable,
                   "eigenvariable " + pt.eigen + " already occurs in the sequent", path, pt);
      Term eigen = want == Sort::Agent ? Term::agent_const(pt.eigen) : Term::data_const(pt.eigen);
      TSeq premise = s;
      premise.goal = substitute(fa.body, fa.binder, eigen);
      return check_child(pt, 0, premise, ctx, depth, path);
    }

    case Rule::WL: {
      if (n == 0) return gamma_underflow("w_l");
      TSeq premise = s;
      premise.gamma.pop_back();
      return check_child(pt, 0, premise, ctx, depth, path);
    }

    case Rule::WLAct: {
      if (m == 0)
        return err(CheckCode::LinearContraction, "w_l_act needs a linear item to discard", path, pt);
      TSeq premise = s;
      premise.delta.pop_back();
      return check_child(pt, 0, premise, ctx, depth, path);
    }

    case Rule::ContrL: {
      if (n == 0) return gamma_underflow("contr_l");
      TSeq premise = s;
      premise.gamma.push_back(premise.gamma.back());  // the copy keeps its root index
      return check_child(pt, 0, premise, ctx, depth, path);
    }

    case Rule::PermL: {
      if (pt.position + 1 >= n) {
        if (ctx.in_refine)
          return err(CheckCode::RefineContextNotEmpty,
                     "perm_l reaches outside the refine premise context", path, pt);
        return err(CheckCode::PositionOutOfRange, "perm_l position out of range", path, pt);
      }
      TSeq premise = s;
      std::swap(premise.gamma[pt.position], premise.gamma[pt.position + 1]);
      return check_child(pt, 0, premise, ctx, depth, path);
    }

    case Rule::PermAct: {
      if (pt.position + 1 >= m)
        return err(CheckCode::LinearContraction, "perm_act position out of range", path, pt);
      TSeq premise = s;
      std::swap(premise.delta[pt.position], premise.delta[pt.position + 1]);
      return check_child(pt, 0, premise, ctx, depth, path);
    }
  }
  return err(CheckCode::RuleArity, "unknown rule", path, pt);
}

std::optional<CheckError> validate_root(const Sequent& s, const ActionRegistry& reg,
                                        const SignatureTable& sigs) {
  auto ill = [&](const std::string& msg) {
    return CheckError{CheckCode::IllFormedSequent, msg, "", SourcePos{}};
  };
  if (!s.goal) return ill("sequent has no goal");
  if (s.reasoner.name.empty()) return ill("sequent has no reasoner");
  try {
    validate_policy(*s.goal, sigs, reg);
    for (const auto& g : s.gamma) {
      switch (g.kind) {
        case NonLinItem::Kind::Pol:
          if (!g.pol) return ill("empty policy item");
          validate_policy(*g.pol, sigs, reg);
          break;
        case NonLinItem::Kind::Act:
        case NonLinItem::Kind::ManyOblig:
          validate_action(g.act, reg, sigs);
          if (!is_ground(g.act))
            return CheckError{CheckCode::NotGround, "context action " + to_text(g.act) + " is not ground",
                              "", SourcePos{}};
          break;
      }
    }
    for (const auto& d : s.delta) {
      validate_action(d.act, reg, sigs);
      if (!is_ground(d.act))
        return CheckError{CheckCode::NotGround, "obligation " + to_text(d.act) + " is not ground", "",
                          SourcePos{}};
    }
  } catch (const Error& e) {
    return ill(e.what());
  }
  return std::nullopt;
}

TSeq tag_root(const Sequent& s) {
  TSeq t;
  t.reasoner = s.reasoner;
  t.goal = s.goal;
  for (std::size_t i = 0; i < s.gamma.size(); ++i) t.gamma.push_back(TNonLin{s.gamma[i], i});
  for (std::size_t i = 0; i < s.delta.size(); ++i) t.delta.push_back(TLin{s.delta[i], i});
  return t;
}

}  // namespace

std::optional<CheckError> check(const ProofTerm& pt, const Sequent& s, const ActionRegistry& reg,
                                const SignatureTable& sigs) {
  if (auto e = validate_root(s, reg, sigs)) return e;
  Ctx ctx;
  ctx.reg = &reg;
  ctx.sigs = &sigs;
  return check_rec(pt, tag_root(s), ctx, 0, "");
}

std::optional<CheckError> check_op(const OpDerivation& od, const std::vector<NonLinItem>& gamma,
                                   const PolicyRef& p, const AgentId& reasoner,
                                   const SignatureTable& sigs) {
  Ctx ctx;
  ctx.sigs = &sigs;
  std::vector<TNonLin> tagged;
  tagged.reserve(gamma.size());
  for (const auto& g : gamma) tagged.push_back(TNonLin{g, std::nullopt});
  return check_op_rec(od, tagged, p, reasoner, ctx, "");
}

AssumptionSummary extract_assumptions(const ProofTerm& pt, const Sequent& s, const ActionRegistry& reg,
                                      const SignatureTable& sigs) {
  AssumptionSummary summary;
  Ctx ctx;
  ctx.reg = &reg;
  ctx.sigs = &sigs;
  ctx.extract = &summary;
  if (auto e = check_rec(pt, tag_root(s), ctx, 0, ""))
    throw Error("extract_assumptions on an invalid proof: " + e->to_string());
  std::sort(summary.obligs_once.begin(), summary.obligs_once.end(),
            [](const ActionTemplate& a, const ActionTemplate& b) { return to_text(a) < to_text(b); });
  return summary;
}

std::string explain(const ProofTerm& pt, const Sequent& s, const ActionRegistry& reg,
                    const SignatureTable& sigs) {
  if (auto e = validate_root(s, reg, sigs)) throw Error(e->to_string());
  std::vector<ExplainLine> lines;
  Ctx ctx;
  ctx.reg = &reg;
  ctx.sigs = &sigs;
  ctx.lines = &lines;
  if (auto e = check_rec(pt, tag_root(s), ctx, 0, "")) throw Error(e->to_string());
  std::ostringstream os;
  for (const auto& line : lines) {
    for (int i = 0; i < line.depth; ++i) os << "  ";
    os << line.text << "\n";
  }
  return os.str();
}

}  // namespace auditlog
