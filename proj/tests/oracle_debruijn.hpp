#ifndef AUDITLOG_TESTS_ORACLE_DEBRUIJN_HPP_
#define AUDITLOG_TESTS_ORACLE_DEBRUIJN_HPP_

// Independent nameless (de Bruijn index) representation of policies, used as
// an oracle for capture-avoiding substitution and alpha equivalence. Bound
// variables become indices, so substitution here cannot capture by
// construction; agreement with the named implementation is the test.

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "auditlog/model.hpp"

namespace dboracle {

using auditlog::ActionTemplate;
using auditlog::ObligMode;
using auditlog::Policy;
using auditlog::PolicyRef;
using auditlog::Sort;
using auditlog::Term;

struct DbTerm {
  enum class Kind { Const, Money, Bound, Free };
  Kind kind;
  Sort sort = Sort::Agent;
  std::string name;  // Const/Money/Free
  int index = -1;    // Bound

  friend bool operator==(const DbTerm&, const DbTerm&) = default;
};

struct DbPolicy;
using DbRef = std::shared_ptr<const DbPolicy>;

struct DbAction {
  std::string kind;
  std::vector<DbTerm> args;
  DbRef payload;
  friend bool operator==(const DbAction& a, const DbAction& b);
};

struct DbPolicy {
  enum class Kind { Atom, Owns, Says, And, Cond, Oblig, Forall, Hole };
  Kind kind;
  std::string head;           // Atom predicate / Hole name
  std::vector<DbTerm> terms;  // Atom args, Owns [owner,data], Says [speaker,target]
  ObligMode mode = ObligMode::Once;
  DbAction action;  // Oblig requirement
  Sort binder_sort = Sort::Agent;
  DbRef a, b;

  friend bool operator==(const DbPolicy& x, const DbPolicy& y) {
    if (x.kind != y.kind || x.head != y.head || x.terms != y.terms) return false;
    if (x.kind == Kind::Oblig && (x.mode != y.mode || !(x.action == y.action))) return false;
    if (x.kind == Kind::Forall && x.binder_sort != y.binder_sort) return false;
    auto eq = [](const DbRef& p, const DbRef& q) {
      if (!p || !q) return !p && !q;
      return *p == *q;
    };
    return eq(x.a, y.a) && eq(x.b, y.b);
  }
};

inline bool operator==(const DbAction& a, const DbAction& b) {
  if (a.kind != b.kind || a.args != b.args) return false;
  if (!a.payload || !b.payload) return !a.payload && !b.payload;
  return *a.payload == *b.payload;
}

struct Binder {
  std::string name;
  Sort sort;
};

inline DbTerm to_db(const Term& t, const std::vector<Binder>& env) {
  if (t.kind() == Term::Kind::Money) return DbTerm{DbTerm::Kind::Money, Sort::Money, t.name(), -1};
  if (!t.is_var()) return DbTerm{DbTerm::Kind::Const, t.sort(), t.name(), -1};
  for (int i = static_cast<int>(env.size()) - 1; i >= 0; --i) {
    if (env[i].name == t.name() && env[i].sort == t.sort())
      return DbTerm{DbTerm::Kind::Bound, t.sort(), "", static_cast<int>(env.size()) - 1 - i};
  }
  return DbTerm{DbTerm::Kind::Free, t.sort(), t.name(), -1};
}

inline DbRef to_db(const PolicyRef& p, std::vector<Binder>& env);

inline DbAction to_db(const ActionTemplate& a, std::vector<Binder>& env) {
  DbAction out;
  out.kind = a.kind;
  for (const auto& t : a.args) out.args.push_back(to_db(t, env));
  if (a.payload) out.payload = to_db(a.payload, env);
  return out;
}

inline DbRef to_db(const PolicyRef& p, std::vector<Binder>& env) {
  auto node = std::make_shared<DbPolicy>();
  switch (p->kind()) {
    case Policy::Kind::Atom:
      node->kind = DbPolicy::Kind::Atom;
      node->head = p->as_atom().pred;
      for (const auto& t : p->as_atom().args) node->terms.push_back(to_db(t, env));
      break;
    case Policy::Kind::Owns:
      node->kind = DbPolicy::Kind::Owns;
      node->terms = {to_db(p->as_owns().owner, env), to_db(p->as_owns().data, env)};
      break;
    case Policy::Kind::SaysTo:
      node->kind = DbPolicy::Kind::Says;
      node->terms = {to_db(p->as_says().speaker, env), to_db(p->as_says().target, env)};
      node->a = to_db(p->as_says().body, env);
      break;
    case Policy::Kind::And:
      node->kind = DbPolicy::Kind::And;
      node->a = to_db(p->as_and().lhs, env);
      node->b = to_db(p->as_and().rhs, env);
      break;
    case Policy::Kind::CondImplies:
      node->kind = DbPolicy::Kind::Cond;
      node->a = to_db(p->as_cond().cond, env);
      node->b = to_db(p->as_cond().body, env);
      break;
    case Policy::Kind::ObligImplies:
      node->kind = DbPolicy::Kind::Oblig;
      node->mode = p->as_oblig().req.mode;
      node->action = to_db(p->as_oblig().req.action, env);
      node->a = to_db(p->as_oblig().body, env);
      break;
    case Policy::Kind::Forall: {
      node->kind = DbPolicy::Kind::Forall;
      node->binder_sort = p->as_forall().binder.sort();
      env.push_back(Binder{p->as_forall().binder.name(), p->as_forall().binder.sort()});
      node->a = to_db(p->as_forall().body, env);
      env.pop_back();
      break;
    }
    case Policy::Kind::PayloadHole:
      node->kind = DbPolicy::Kind::Hole;
      node->head = p->as_hole().name;
      break;
  }
  return node;
}

inline DbRef to_db(const PolicyRef& p) {
  std::vector<Binder> env;
  return to_db(p, env);
}

// Substitution of a free variable by a closed term in the nameless form.
inline DbTerm subst(const DbTerm& t, const std::string& name, Sort sort, const DbTerm& repl) {
  if (t.kind == DbTerm::Kind::Free && t.name == name && t.sort == sort) return repl;
  return t;
}

inline DbRef subst(const DbRef& p, const std::string& name, Sort sort, const DbTerm& repl) {
  auto node = std::make_shared<DbPolicy>(*p);
  for (auto& t : node->terms) t = subst(t, name, sort, repl);
  for (auto& t : node->action.args) t = subst(t, name, sort, repl);
  if (node->action.payload) node->action.payload = subst(node->action.payload, name, sort, repl);
  if (node->a) node->a = subst(node->a, name, sort, repl);
  if (node->b) node->b = subst(node->b, name, sort, repl);
  return node;
}

}  // namespace dboracle

#endif  // AUDITLOG_TESTS_ORACLE_DEBRUIJN_HPP_
