#ifndef AUDITLOG_KERNEL_HPP_
#define AUDITLOG_KERNEL_HPP_

// The double-context sequent calculus checker.
//
// Sequents have the form  gamma ; delta |-A goal  where gamma is an
// unrestricted context of policies, observed actions and use-many
// obligations, and delta is a linear context of use-once obligations.
// delta admits weakening and exchange but no contraction.
//
// Rules always address the last item of a context; perm_l / perm_act move
// items into place. Multiplicative rules (cut, and_r, imp_l) carry declared
// split boundaries, cut carries its cut formula, forall-left rules carry the
// witness term and forall-right rules their eigenvariable, so checking is
// fully deterministic: no unification, no search.

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "auditlog/actions.hpp"
#include "auditlog/model.hpp"

namespace auditlog {

// Unrestricted context item.
struct NonLinItem {
  enum class Kind { Pol, Act, ManyOblig };
  Kind kind = Kind::Pol;
  PolicyRef pol;       // Kind::Pol
  ActionTemplate act;  // Kind::Act / Kind::ManyOblig, ground

  static NonLinItem policy(PolicyRef p) { return NonLinItem{Kind::Pol, std::move(p), {}}; }
  static NonLinItem action(ActionTemplate a) { return NonLinItem{Kind::Act, nullptr, std::move(a)}; }
  static NonLinItem many_oblig(ActionTemplate a) { return NonLinItem{Kind::ManyOblig, nullptr, std::move(a)}; }
};

// Linear context item: one use-once obligation.
struct LinItem {
  ActionTemplate act;  // ground
};

struct Sequent {
  AgentId reasoner;
  std::vector<NonLinItem> gamma;
  std::vector<LinItem> delta;
  PolicyRef goal;
};

enum class Rule {
  Init,
  Cut,
  AndL1,
  AndL2,
  AndR,
  ImpL,
  ImpR,
  BangImpL,
  BangImpR,
  QuestImpL,
  QuestImpR,
  ForallLAgent,
  ForallLData,
  ForallRAgent,
  ForallRData,
  WL,
  WLAct,
  ContrL,
  PermL,
  PermAct,
  Say,
  ObsAct,
  Refine,
  DerPol,
};

const char* rule_name(Rule r);
std::optional<Rule> rule_from_name(const std::string& name);

// Derivation of the active-dataset relation op[gamma; policy]: every data
// object actually affected by the policy must appear in an owns item of the
// reasoner in gamma. Leaves carry the gamma index of the owns item they use,
// one per affected data position.
struct OpDerivation {
  enum class Rule { CondImp, ObligImp, And, Forall, Says, Owns, Atom };
  Rule rule = Rule::Atom;
  std::vector<OpDerivation> children;
  std::string eigen;                      // Forall
  std::vector<std::size_t> owns_indices;  // Owns (one), Atom (one per affected position)
};

const char* op_rule_name(OpDerivation::Rule r);

struct ProofTerm {
  Rule rule = Rule::Init;
  std::vector<ProofTerm> children;
  PolicyRef cut_formula;        // Cut
  std::size_t gamma_split = 0;  // Cut, AndR, ImpL
  std::size_t delta_split = 0;  // Cut, AndR, ImpL
  std::optional<Term> witness;  // ForallL*
  std::string eigen;            // ForallR*
  std::size_t position = 0;     // PermL, PermAct
  std::optional<OpDerivation> op;  // DerPol
  SourcePos pos;                // set when parsed from a script
};

enum class CheckCode {
  RuleArity,
  GoalMismatch,
  ItemMismatch,
  SplitMismatch,
  NonFreshEigenvariable,
  RefineContextNotEmpty,
  LinearContraction,
  NoConclusion,
  OpUnresolvedData,
  OwnerMismatch,
  ContextUnderflow,
  PositionOutOfRange,
  SortMismatch,
  NotGround,
  UnknownActionKind,
  IllFormedSequent,
};

const char* check_code_name(CheckCode c);

struct CheckError {
  CheckCode code = CheckCode::GoalMismatch;
  std::string message;
  std::string path;  // rule names from the root, e.g. "obs_act/cut.1/refine"
  SourcePos pos;     // position of the offending proof node, when known
  std::string to_string() const;
};

// Which initial assumptions of the root sequent a proof actually consumes:
// conditions via init on atoms, actions via obs_act, use-many obligations via
// quest_imp_l (a set), use-once obligations via bang_imp_l (a multiset).
struct AssumptionSummary {
  std::set<GroundAtom> conds;
  std::set<ActionTemplate, ActionTemplateLess> acts;
  std::vector<ActionTemplate> obligs_once;  // multiset, sorted canonically
  std::set<ActionTemplate, ActionTemplateLess> obligs_many;
};

// Empty result means the proof is a valid derivation of the sequent.
std::optional<CheckError> check(const ProofTerm& pt, const Sequent& s, const ActionRegistry& reg,
                                const SignatureTable& sigs);

std::optional<CheckError> check_op(const OpDerivation& od, const std::vector<NonLinItem>& gamma,
                                   const PolicyRef& p, const AgentId& reasoner,
                                   const SignatureTable& sigs);

// Precondition: check(pt, s, ...) succeeded.
AssumptionSummary extract_assumptions(const ProofTerm& pt, const Sequent& s,
                                      const ActionRegistry& reg, const SignatureTable& sigs);

// Checks and renders the derivation with one line per rule application,
// children indented under their parent. Throws Error if the proof is invalid.
std::string explain(const ProofTerm& pt, const Sequent& s, const ActionRegistry& reg,
                    const SignatureTable& sigs);

std::string to_text(const Sequent& s);
std::string to_text(const NonLinItem& item);
std::string to_text(const LinItem& item);

}  // namespace auditlog

#endif  // AUDITLOG_KERNEL_HPP_
