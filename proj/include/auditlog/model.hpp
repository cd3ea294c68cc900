#ifndef AUDITLOG_MODEL_HPP_
#define AUDITLOG_MODEL_HPP_

// Core value types of the audit logic: two-sorted terms (agents, data, plus
// opaque money literals), usage policies, obligation requirements and action
// terms. Everything here is immutable after construction and safe to share
// across threads.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "auditlog/errors.hpp"

namespace auditlog {

enum class Sort { Agent, Data, Money };

std::string sort_name(Sort s);

struct AgentId {
  std::string name;
  auto operator<=>(const AgentId&) const = default;
};

struct DataId {
  std::string name;
  auto operator<=>(const DataId&) const = default;
};

// A term is an agent constant, a data constant, a sorted variable, or a money
// literal such as 10$. Quantifiers bind agent- and data-sorted variables only;
// money-sorted variables appear solely as formal parameters of action kinds.
class Term {
 public:
  enum class Kind { AgentConst, DataConst, Var, Money };

  static Term agent_const(std::string name) { return Term(Kind::AgentConst, Sort::Agent, std::move(name)); }
  static Term agent_const(const AgentId& a) { return agent_const(a.name); }
  static Term data_const(std::string name) { return Term(Kind::DataConst, Sort::Data, std::move(name)); }
  static Term data_const(const DataId& d) { return data_const(d.name); }
  static Term var(std::string name, Sort sort) { return Term(Kind::Var, sort, std::move(name)); }
  static Term money(std::string text) { return Term(Kind::Money, Sort::Money, std::move(text)); }

  Kind kind() const { return kind_; }
  Sort sort() const { return sort_; }
  const std::string& name() const { return name_; }
  bool is_var() const { return kind_ == Kind::Var; }
  bool is_ground() const { return kind_ != Kind::Var; }
  bool is_agent(const AgentId& a) const { return kind_ == Kind::AgentConst && name_ == a.name; }

  auto operator<=>(const Term&) const = default;

 private:
  Term(Kind k, Sort s, std::string n) : kind_(k), sort_(s), name_(std::move(n)) {}
  Kind kind_;
  Sort sort_;
  std::string name_;
};

class Policy;
using PolicyRef = std::shared_ptr<const Policy>;

enum class ObligMode { Once, Many };  // ! and ?

// An action term: registered kind, term arguments, and (for communication-like
// kinds) one policy payload. May contain variables until grounded.
struct ActionTemplate {
  std::string kind;
  std::vector<Term> args;
  PolicyRef payload;  // null when the kind takes no policy argument
};

struct Requirement {
  ObligMode mode;
  ActionTemplate action;
};

// Usage policy formulas:
//   atoms p(s1..sn) | owns | says-to | conjunction | condition-guarded
//   implication | obligation-guarded implication | universal quantification.
// PayloadHole is a placeholder for the policy argument of an action kind; it
// may appear only inside registry templates, never in a checked policy.
class Policy {
 public:
  enum class Kind { Atom, Owns, SaysTo, And, CondImplies, ObligImplies, Forall, PayloadHole };

  struct AtomNode {
    std::string pred;
    std::vector<Term> args;
  };
  struct OwnsNode {
    Term owner;
    Term data;
  };
  struct SaysNode {
    Term speaker;
    PolicyRef body;
    Term target;
  };
  struct AndNode {
    PolicyRef lhs;
    PolicyRef rhs;
  };
  struct CondNode {
    PolicyRef cond;
    PolicyRef body;
  };
  struct ObligNode {
    Requirement req;
    PolicyRef body;
  };
  struct ForallNode {
    Term binder;  // always Kind::Var, sort Agent or Data
    PolicyRef body;
  };
  struct HoleNode {
    std::string name;
  };

  static PolicyRef atom(std::string pred, std::vector<Term> args);
  static PolicyRef owns(Term owner, Term data);
  static PolicyRef says_to(Term speaker, PolicyRef body, Term target);
  static PolicyRef conj(PolicyRef lhs, PolicyRef rhs);
  static PolicyRef cond_implies(PolicyRef cond, PolicyRef body);
  static PolicyRef oblig_implies(Requirement req, PolicyRef body);
  static PolicyRef forall(Term binder, PolicyRef body);
  static PolicyRef payload_hole(std::string name);

  Kind kind() const;
  const AtomNode& as_atom() const { return std::get<AtomNode>(node_); }
  const OwnsNode& as_owns() const { return std::get<OwnsNode>(node_); }
  const SaysNode& as_says() const { return std::get<SaysNode>(node_); }
  const AndNode& as_and() const { return std::get<AndNode>(node_); }
  const CondNode& as_cond() const { return std::get<CondNode>(node_); }
  const ObligNode& as_oblig() const { return std::get<ObligNode>(node_); }
  const ForallNode& as_forall() const { return std::get<ForallNode>(node_); }
  const HoleNode& as_hole() const { return std::get<HoleNode>(node_); }

 private:
  using Node =
      std::variant<AtomNode, OwnsNode, SaysNode, AndNode, CondNode, ObligNode, ForallNode, HoleNode>;
  explicit Policy(Node n) : node_(std::move(n)) {}
  Node node_;
};

using ActionId = std::uint64_t;
using Tick = std::uint64_t;

// One executed occurrence of an action; ids are unique per execution.
struct ActionInstance {
  ActionTemplate action;
  ActionId id = 0;
};

// A ground atomic predicate, as certified by the environment or recorded as a
// logged condition.
struct GroundAtom {
  std::string pred;
  std::vector<Term> args;
  auto operator<=>(const GroundAtom&) const = default;
};

PolicyRef to_policy(const GroundAtom& a);
std::optional<GroundAtom> as_ground_atom(const Policy& p);

// ---------------------------------------------------------------------------
// Predicate signatures

// Declared per scenario. affected_data lists the argument positions whose
// data object must be owned by the reasoner before the predicate can be set
// by a freshly derived policy.
struct PredicateSignature {
  std::string name;
  std::vector<Sort> arg_sorts;
  std::vector<std::size_t> affected_data;
};

class SignatureTable {
 public:
  void add(PredicateSignature sig);  // throws RegistryError on duplicates or bad affected positions
  const PredicateSignature* find(const std::string& name) const;
  const std::map<std::string, PredicateSignature>& all() const { return sigs_; }

 private:
  std::map<std::string, PredicateSignature> sigs_;
};

// ---------------------------------------------------------------------------
// Operations on policies

// Capture-avoiding substitution of a variable by a term of the same sort.
// Throws SortError when the sorts differ.
PolicyRef substitute(const PolicyRef& p, const Term& var, const Term& replacement);
ActionTemplate substitute(const ActionTemplate& t, const Term& var, const Term& replacement);

std::set<Term> free_vars(const Policy& p);
std::set<Term> free_vars(const ActionTemplate& t);

// All data objects and data variables occurring in the policy.
std::set<Term> data_set(const Policy& p);

bool alpha_eq(const Policy& a, const Policy& b);
bool alpha_eq(const PolicyRef& a, const PolicyRef& b);
bool alpha_eq(const ActionTemplate& a, const ActionTemplate& b);

bool is_ground(const Policy& p);
bool is_ground(const ActionTemplate& t);

// Every identifier occurring in the value (constants, variables, binders);
// used for eigenvariable freshness checks.
void collect_names(const Policy& p, std::set<std::string>& out);
void collect_names(const ActionTemplate& t, std::set<std::string>& out);

std::string fresh_name(const std::string& base, const std::set<std::string>& taken);

// Canonical text rendering. Parsing the result yields an alpha-equal value;
// binders that would shadow other identifiers are renamed on the way out.
std::string to_text(const Term& t);
std::string to_text(const Policy& p);
std::string to_text(const PolicyRef& p);
std::string to_text(const ActionTemplate& t);
std::string to_text(const ActionInstance& a);
std::string to_text(const GroundAtom& a);
std::string to_text(const Requirement& r);

// Total order on templates via canonical text; used for set/map keys.
struct ActionTemplateLess {
  bool operator()(const ActionTemplate& a, const ActionTemplate& b) const {
    return to_text(a) < to_text(b);
  }
};

}  // namespace auditlog

#endif  // AUDITLOG_MODEL_HPP_
