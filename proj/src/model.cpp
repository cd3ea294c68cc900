#include "auditlog/model.hpp"

#include <algorithm>
#include <sstream>

namespace auditlog {

std::string sort_name(Sort s) {
  switch (s) {
    case Sort::Agent: return "agent";
    case Sort::Data: return "data";
    case Sort::Money: return "money";
  }
  return "?";
}

PolicyRef Policy::atom(std::string pred, std::vector<Term> args) {
  return PolicyRef(new Policy(AtomNode{std::move(pred), std::move(args)}));
}
PolicyRef Policy::owns(Term owner, Term data) {
  if (owner.sort() != Sort::Agent || data.sort() != Sort::Data)
    throw SortError("owns expects an agent and a data term");
  return PolicyRef(new Policy(OwnsNode{std::move(owner), std::move(data)}));
}
PolicyRef Policy::says_to(Term speaker, PolicyRef body, Term target) {
  if (speaker.sort() != Sort::Agent || target.sort() != Sort::Agent)
    throw SortError("says expects agent terms for speaker and target");
  return PolicyRef(new Policy(SaysNode{std::move(speaker), std::move(body), std::move(target)}));
}
PolicyRef Policy::conj(PolicyRef lhs, PolicyRef rhs) {
  return PolicyRef(new Policy(AndNode{std::move(lhs), std::move(rhs)}));
}
PolicyRef Policy::cond_implies(PolicyRef cond, PolicyRef body) {
  return PolicyRef(new Policy(CondNode{std::move(cond), std::move(body)}));
}
PolicyRef Policy::oblig_implies(Requirement req, PolicyRef body) {
  return PolicyRef(new Policy(ObligNode{std::move(req), std::move(body)}));
}
PolicyRef Policy::forall(Term binder, PolicyRef body) {
  if (!binder.is_var()) throw SortError("forall binder must be a variable");
  if (binder.sort() == Sort::Money) throw SortError("quantification over money literals is not allowed");
  return PolicyRef(new Policy(ForallNode{std::move(binder), std::move(body)}));
}
PolicyRef Policy::payload_hole(std::string name) {
  return PolicyRef(new Policy(HoleNode{std::move(name)}));
}

Policy::Kind Policy::kind() const {
  switch (node_.index()) {
    case 0: return Kind::Atom;
    case 1: return Kind::Owns;
    case 2: return Kind::SaysTo;
    case 3: return Kind::And;
    case 4: return Kind::CondImplies;
    case 5: return Kind::ObligImplies;
    case 6: return Kind::Forall;
    default: return Kind::PayloadHole;
  }
}

PolicyRef to_policy(const GroundAtom& a) { return Policy::atom(a.pred, a.args); }

std::optional<GroundAtom> as_ground_atom(const Policy& p) {
  if (p.kind() != Policy::Kind::Atom) return std::nullopt;
  const auto& at = p.as_atom();
  for (const auto& t : at.args)
    if (t.is_var()) return std::nullopt;
  return GroundAtom{at.pred, at.args};
}

// ---------------------------------------------------------------------------
// SignatureTable

void SignatureTable::add(PredicateSignature sig) {
  if (sigs_.count(sig.name)) throw RegistryError("duplicate predicate: " + sig.name);
  for (std::size_t pos : sig.affected_data) {
    if (pos >= sig.arg_sorts.size() || sig.arg_sorts[pos] != Sort::Data)
      throw RegistryError("predicate " + sig.name + ": affected position " + std::to_string(pos) +
                          " is not a data argument");
  }
  sigs_.emplace(sig.name, std::move(sig));
}

const PredicateSignature* SignatureTable::find(const std::string& name) const {
  auto it = sigs_.find(name);
  return it == sigs_.end() ? nullptr : &it->second;
}

// ---------------------------------------------------------------------------
// Substitution

namespace {

Term subst_term(const Term& t, const Term& var, const Term& repl) {
  if (t.is_var() && t.name() == var.name() && t.sort() == var.sort()) return repl;
  return t;
}

bool mentions_name(const Term& t, const std::string& name) { return t.name() == name; }

PolicyRef subst_rec(const PolicyRef& p, const Term& var, const Term& repl);

ActionTemplate subst_action(const ActionTemplate& a, const Term& var, const Term& repl) {
  ActionTemplate out;
  out.kind = a.kind;
  out.args.reserve(a.args.size());
  for (const auto& t : a.args) out.args.push_back(subst_term(t, var, repl));
  if (a.payload) out.payload = subst_rec(a.payload, var, repl);
  return out;
}

PolicyRef subst_rec(const PolicyRef& p, const Term& var, const Term& repl) {
  switch (p->kind()) {
    case Policy::Kind::Atom: {
      const auto& n = p->as_atom();
      std::vector<Term> args;
      args.reserve(n.args.size());
      for (const auto& t : n.args) args.push_back(subst_term(t, var, repl));
      return Policy::atom(n.pred, std::move(args));
    }
    case Policy::Kind::Owns: {
      const auto& n = p->as_owns();
      return Policy::owns(subst_term(n.owner, var, repl), subst_term(n.data, var, repl));
    }
    case Policy::Kind::SaysTo: {
      const auto& n = p->as_says();
      return Policy::says_to(subst_term(n.speaker, var, repl), subst_rec(n.body, var, repl),
                             subst_term(n.target, var, repl));
    }
    case Policy::Kind::And: {
      const auto& n = p->as_and();
      return Policy::conj(subst_rec(n.lhs, var, repl), subst_rec(n.rhs, var, repl));
    }
    case Policy::Kind::CondImplies: {
      const auto& n = p->as_cond();
      return Policy::cond_implies(subst_rec(n.cond, var, repl), subst_rec(n.body, var, repl));
    }
    case Policy::Kind::ObligImplies: {
      const auto& n = p->as_oblig();
      Requirement r{n.req.mode, subst_action(n.req.action, var, repl)};
      return Policy::oblig_implies(std::move(r), subst_rec(n.body, var, repl));
    }
    case Policy::Kind::Forall: {
      const auto& n = p->as_forall();
      if (n.binder.name() == var.name() && n.binder.sort() == var.sort()) return p;  // shadowed
      if (repl.is_var() && mentions_name(repl, n.binder.name())) {
        // The binder would capture the incoming variable; rename it first.
        std::set<std::string> taken;
        collect_names(*n.body, taken);
        taken.insert(repl.name());
        taken.insert(var.name());
        Term renamed = Term::var(fresh_name(n.binder.name(), taken), n.binder.sort());
        PolicyRef body = subst_rec(n.body, n.binder, renamed);
        return Policy::forall(renamed, subst_rec(body, var, repl));
      }
      return Policy::forall(n.binder, subst_rec(n.body, var, repl));
    }
    case Policy::Kind::PayloadHole:
      return p;
  }
  throw Error("unreachable policy kind");
}

}  // namespace

PolicyRef substitute(const PolicyRef& p, const Term& var, const Term& replacement) {
  if (!var.is_var()) throw SortError("substitute: not a variable: " + var.name());
  if (replacement.sort() != var.sort())
    throw SortError("substitute: sort mismatch, " + sort_name(var.sort()) + " variable " + var.name() +
                    " vs " + sort_name(replacement.sort()) + " term " + replacement.name());
  return subst_rec(p, var, replacement);
}

ActionTemplate substitute(const ActionTemplate& t, const Term& var, const Term& replacement) {
  if (!var.is_var()) throw SortError("substitute: not a variable: " + var.name());
  if (replacement.sort() != var.sort()) throw SortError("substitute: sort mismatch on " + var.name());
  return subst_action(t, var, replacement);
}

// ---------------------------------------------------------------------------
// Free variables / data set / names

namespace {

void free_vars_rec(const Policy& p, std::vector<Term>& bound, std::set<Term>& out);

void free_vars_term(const Term& t, const std::vector<Term>& bound, std::set<Term>& out) {
  if (!t.is_var()) return;
  for (auto it = bound.rbegin(); it != bound.rend(); ++it)
    if (it->name() == t.name() && it->sort() == t.sort()) return;
  out.insert(t);
}

void free_vars_action(const ActionTemplate& a, std::vector<Term>& bound, std::set<Term>& out) {
  for (const auto& t : a.args) free_vars_term(t, bound, out);
  if (a.payload) free_vars_rec(*a.payload, bound, out);
}

void free_vars_rec(const Policy& p, std::vector<Term>& bound, std::set<Term>& out) {
  switch (p.kind()) {
    case Policy::Kind::Atom:
      for (const auto& t : p.as_atom().args) free_vars_term(t, bound, out);
      return;
    case Policy::Kind::Owns:
      free_vars_term(p.as_owns().owner, bound, out);
      free_vars_term(p.as_owns().data, bound, out);
      return;
    case Policy::Kind::SaysTo:
      free_vars_term(p.as_says().speaker, bound, out);
      free_vars_term(p.as_says().target, bound, out);
      free_vars_rec(*p.as_says().body, bound, out);
      return;
    case Policy::Kind::And:
      free_vars_rec(*p.as_and().lhs, bound, out);
      free_vars_rec(*p.as_and().rhs, bound, out);
      return;
    case Policy::Kind::CondImplies:
      free_vars_rec(*p.as_cond().cond, bound, out);
      free_vars_rec(*p.as_cond().body, bound, out);
      return;
    case Policy::Kind::ObligImplies:
      free_vars_action(p.as_oblig().req.action, bound, out);
      free_vars_rec(*p.as_oblig().body, bound, out);
      return;
    case Policy::Kind::Forall:
      bound.push_back(p.as_forall().binder);
      free_vars_rec(*p.as_forall().body, bound, out);
      bound.pop_back();
      return;
    case Policy::Kind::PayloadHole:
      return;
  }
}

void data_set_term(const Term& t, std::set<Term>& out) {
  if (t.sort() == Sort::Data) out.insert(t);
}

void data_set_rec(const Policy& p, std::set<Term>& out) {
  switch (p.kind()) {
    case Policy::Kind::Atom:
      for (const auto& t : p.as_atom().args) data_set_term(t, out);
      return;
    case Policy::Kind::Owns:
      data_set_term(p.as_owns().data, out);
      return;
    case Policy::Kind::SaysTo:
      data_set_rec(*p.as_says().body, out);
      return;
    case Policy::Kind::And:
      data_set_rec(*p.as_and().lhs, out);
      data_set_rec(*p.as_and().rhs, out);
      return;
    case Policy::Kind::CondImplies:
      data_set_rec(*p.as_cond().cond, out);
      data_set_rec(*p.as_cond().body, out);
      return;
    case Policy::Kind::ObligImplies: {
      const auto& a = p.as_oblig().req.action;
      for (const auto& t : a.args) data_set_term(t, out);
      if (a.payload) data_set_rec(*a.payload, out);
      data_set_rec(*p.as_oblig().body, out);
      return;
    }
    case Policy::Kind::Forall:
      data_set_rec(*p.as_forall().body, out);
      return;
    case Policy::Kind::PayloadHole:
      return;
  }
}

}  // namespace

std::set<Term> free_vars(const Policy& p) {
  std::set<Term> out;
  std::vector<Term> bound;
  free_vars_rec(p, bound, out);
  return out;
}

std::set<Term> free_vars(const ActionTemplate& t) {
  std::set<Term> out;
  std::vector<Term> bound;
  free_vars_action(t, bound, out);
  return out;
}

std::set<Term> data_set(const Policy& p) {
  std::set<Term> out;
  data_set_rec(p, out);
  return out;
}

bool is_ground(const Policy& p) { return free_vars(p).empty(); }
bool is_ground(const ActionTemplate& t) { return free_vars(t).empty(); }

void collect_names(const ActionTemplate& t, std::set<std::string>& out) {
  for (const auto& a : t.args) out.insert(a.name());
  if (t.payload) collect_names(*t.payload, out);
}

void collect_names(const Policy& p, std::set<std::string>& out) {
  switch (p.kind()) {
    case Policy::Kind::Atom:
      for (const auto& t : p.as_atom().args) out.insert(t.name());
      return;
    case Policy::Kind::Owns:
      out.insert(p.as_owns().owner.name());
      out.insert(p.as_owns().data.name());
      return;
    case Policy::Kind::SaysTo:
      out.insert(p.as_says().speaker.name());
      out.insert(p.as_says().target.name());
      collect_names(*p.as_says().body, out);
      return;
    case Policy::Kind::And:
      collect_names(*p.as_and().lhs, out);
      collect_names(*p.as_and().rhs, out);
      return;
    case Policy::Kind::CondImplies:
      collect_names(*p.as_cond().cond, out);
      collect_names(*p.as_cond().body, out);
      return;
    case Policy::Kind::ObligImplies:
      collect_names(p.as_oblig().req.action, out);
      collect_names(*p.as_oblig().body, out);
      return;
    case Policy::Kind::Forall:
      out.insert(p.as_forall().binder.name());
      collect_names(*p.as_forall().body, out);
      return;
    case Policy::Kind::PayloadHole:
      return;
  }
}

std::string fresh_name(const std::string& base, const std::set<std::string>& taken) {
  std::string cand = base + "'";
  while (taken.count(cand)) cand += "'";
  return cand;
}

// ---------------------------------------------------------------------------
// Alpha equivalence

namespace {

struct RenamePair {
  Term left, right;
};

bool term_alpha(const Term& a, const Term& b, const std::vector<RenamePair>& map) {
  if (a.is_var() != b.is_var()) return false;
  if (a.is_var()) {
    if (a.sort() != b.sort()) return false;
    for (auto it = map.rbegin(); it != map.rend(); ++it) {
      bool la = it->left.name() == a.name() && it->left.sort() == a.sort();
      bool rb = it->right.name() == b.name() && it->right.sort() == b.sort();
      if (la || rb) return la && rb;
    }
    return a.name() == b.name();  // both free
  }
  return a == b;
}

bool alpha_rec(const Policy& a, const Policy& b, std::vector<RenamePair>& map);

bool action_alpha(const ActionTemplate& a, const ActionTemplate& b, std::vector<RenamePair>& map) {
  if (a.kind != b.kind || a.args.size() != b.args.size()) return false;
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (!term_alpha(a.args[i], b.args[i], map)) return false;
  if (!a.payload != !b.payload) return false;
  if (a.payload && !alpha_rec(*a.payload, *b.payload, map)) return false;
  return true;
}

bool alpha_rec(const Policy& a, const Policy& b, std::vector<RenamePair>& map) {
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case Policy::Kind::Atom: {
      const auto &x = a.as_atom(), &y = b.as_atom();
      if (x.pred != y.pred || x.args.size() != y.args.size()) return false;
      for (std::size_t i = 0; i < x.args.size(); ++i)
        if (!term_alpha(x.args[i], y.args[i], map)) return false;
      return true;
    }
    case Policy::Kind::Owns:
      return term_alpha(a.as_owns().owner, b.as_owns().owner, map) &&
             term_alpha(a.as_owns().data, b.as_owns().data, map);
    case Policy::Kind::SaysTo:
      return term_alpha(a.as_says().speaker, b.as_says().speaker, map) &&
             term_alpha(a.as_says().target, b.as_says().target, map) &&
             alpha_rec(*a.as_says().body, *b.as_says().body, map);
    case Policy::Kind::And:
      return alpha_rec(*a.as_and().lhs, *b.as_and().lhs, map) &&
             alpha_rec(*a.as_and().rhs, *b.as_and().rhs, map);
    case Policy::Kind::CondImplies:
      return alpha_rec(*a.as_cond().cond, *b.as_cond().cond, map) &&
             alpha_rec(*a.as_cond().body, *b.as_cond().body, map);
    case Policy::Kind::ObligImplies:
      return a.as_oblig().req.mode == b.as_oblig().req.mode &&
             action_alpha(a.as_oblig().req.action, b.as_oblig().req.action, map) &&
             alpha_rec(*a.as_oblig().body, *b.as_oblig().body, map);
    case Policy::Kind::Forall: {
      const auto &x = a.as_forall(), &y = b.as_forall();
      if (x.binder.sort() != y.binder.sort()) return false;
      map.push_back(RenamePair{x.binder, y.binder});
      bool ok = alpha_rec(*x.body, *y.body, map);
      map.pop_back();
      return ok;
    }
    case Policy::Kind::PayloadHole:
      return a.as_hole().name == b.as_hole().name;
  }
  return false;
}

}  // namespace

bool alpha_eq(const Policy& a, const Policy& b) {
  std::vector<RenamePair> map;
  return alpha_rec(a, b, map);
}

bool alpha_eq(const PolicyRef& a, const PolicyRef& b) {
  if (!a || !b) return !a && !b;
  return alpha_eq(*a, *b);
}

bool alpha_eq(const ActionTemplate& a, const ActionTemplate& b) {
  std::vector<RenamePair> map;
  return action_alpha(a, b, map);
}

// ---------------------------------------------------------------------------
// Printing
//
// Precedence, loosest first: forall, ->, and. Implication is right
// associative. Free variables are printed with their sort annotation; bound
// occurrences are bare. Binders that would shadow another identifier in their
// body are renamed before printing so the output parses back unambiguously.

namespace {

bool contains_const_named(const Policy& p, const std::string& name);

bool contains_const_named(const ActionTemplate& a, const std::string& name) {
  for (const auto& t : a.args)
    if (!t.is_var() && t.name() == name) return true;
  return a.payload && contains_const_named(*a.payload, name);
}

bool contains_const_named(const Policy& p, const std::string& name) {
  switch (p.kind()) {
    case Policy::Kind::Atom:
      for (const auto& t : p.as_atom().args)
        if (!t.is_var() && t.name() == name) return true;
      return false;
    case Policy::Kind::Owns:
      return (!p.as_owns().owner.is_var() && p.as_owns().owner.name() == name) ||
             (!p.as_owns().data.is_var() && p.as_owns().data.name() == name);
    case Policy::Kind::SaysTo:
      return (!p.as_says().speaker.is_var() && p.as_says().speaker.name() == name) ||
             (!p.as_says().target.is_var() && p.as_says().target.name() == name) ||
             contains_const_named(*p.as_says().body, name);
    case Policy::Kind::And:
      return contains_const_named(*p.as_and().lhs, name) || contains_const_named(*p.as_and().rhs, name);
    case Policy::Kind::CondImplies:
      return contains_const_named(*p.as_cond().cond, name) || contains_const_named(*p.as_cond().body, name);
    case Policy::Kind::ObligImplies:
      return contains_const_named(p.as_oblig().req.action, name) ||
             contains_const_named(*p.as_oblig().body, name);
    case Policy::Kind::Forall:
      return contains_const_named(*p.as_forall().body, name);
    case Policy::Kind::PayloadHole:
      return p.as_hole().name == name;
  }
  return false;
}

struct Printer {
  std::ostringstream os;
  std::vector<Term> binders;

  bool is_bound(const Term& t) const {
    for (auto it = binders.rbegin(); it != binders.rend(); ++it)
      if (it->name() == t.name() && it->sort() == t.sort()) return true;
    return false;
  }

  void term(const Term& t) {
    if (t.is_var() && !is_bound(t)) {
      os << t.name() << ": " << sort_name(t.sort());
    } else {
      os << t.name();
    }
  }

  void action(const ActionTemplate& a) {
    os << a.kind << "(";
    bool first = true;
    for (const auto& t : a.args) {
      if (!first) os << ", ";
      first = false;
      term(t);
    }
    if (a.payload) {
      if (!first) os << ", ";
      policy(*a.payload, 0);
    }
    os << ")";
  }

  // levels: 0 = forall, 1 = implication, 2 = and, 3 = primary
  void policy(const Policy& p, int min_level) {
    switch (p.kind()) {
      case Policy::Kind::Forall: {
        const auto& n = p.as_forall();
        Term binder = n.binder;
        PolicyRef body = n.body;
        // Rename when the spelling would be ambiguous on reparse: a constant
        // of the same name in the body, an enclosing binder of the same name,
        // or a free variable of the same name but another sort.
        bool clash = contains_const_named(*n.body, binder.name());
        for (const auto& b : binders)
          if (b.name() == binder.name()) clash = true;
        for (const auto& v : free_vars(*n.body))
          if (v.name() == binder.name() && v != binder) clash = true;
        if (clash) {
          std::set<std::string> taken;
          collect_names(*n.body, taken);
          for (const auto& b : binders) taken.insert(b.name());
          binder = Term::var(fresh_name(binder.name(), taken), binder.sort());
          body = substitute(n.body, n.binder, binder);
        }
        bool paren = min_level > 0;
        if (paren) os << "(";
        os << "forall " << binder.name() << ": " << sort_name(binder.sort()) << " . ";
        binders.push_back(binder);
        policy(*body, 0);
        binders.pop_back();
        if (paren) os << ")";
        return;
      }
      case Policy::Kind::CondImplies: {
        bool paren = min_level > 1;
        if (paren) os << "(";
        policy(*p.as_cond().cond, 2);
        os << " -> ";
        policy(*p.as_cond().body, 1);
        if (paren) os << ")";
        return;
      }
      case Policy::Kind::ObligImplies: {
        bool paren = min_level > 1;
        if (paren) os << "(";
        os << (p.as_oblig().req.mode == ObligMode::Once ? "!" : "?") << "[";
        action(p.as_oblig().req.action);
        os << "] -> ";
        policy(*p.as_oblig().body, 1);
        if (paren) os << ")";
        return;
      }
      case Policy::Kind::And: {
        bool paren = min_level > 2;
        if (paren) os << "(";
        policy(*p.as_and().lhs, 2);
        os << " and ";
        policy(*p.as_and().rhs, 3);
        if (paren) os << ")";
        return;
      }
      case Policy::Kind::Atom: {
        os << p.as_atom().pred << "(";
        bool first = true;
        for (const auto& t : p.as_atom().args) {
          if (!first) os << ", ";
          first = false;
          term(t);
        }
        os << ")";
        return;
      }
      case Policy::Kind::Owns:
        os << "owns(";
        term(p.as_owns().owner);
        os << ", ";
        term(p.as_owns().data);
        os << ")";
        return;
      case Policy::Kind::SaysTo:
        os << "says(";
        term(p.as_says().speaker);
        os << ", ";
        policy(*p.as_says().body, 0);
        os << ", ";
        term(p.as_says().target);
        os << ")";
        return;
      case Policy::Kind::PayloadHole:
        os << p.as_hole().name;
        return;
    }
  }

};

}  // namespace

std::string to_text(const Term& t) {
  Printer pr;
  pr.term(t);
  return pr.os.str();
}

std::string to_text(const Policy& p) {
  Printer pr;
  pr.policy(p, 0);
  return pr.os.str();
}

std::string to_text(const PolicyRef& p) { return p ? to_text(*p) : std::string("<none>"); }

std::string to_text(const ActionTemplate& t) {
  Printer pr;
  pr.action(t);
  return pr.os.str();
}

std::string to_text(const ActionInstance& a) {
  Printer pr;
  pr.os << a.action.kind << "_" << a.id << "(";
  bool first = true;
  for (const auto& t : a.action.args) {
    if (!first) pr.os << ", ";
    first = false;
    pr.term(t);
  }
  if (a.action.payload) {
    if (!first) pr.os << ", ";
    pr.policy(*a.action.payload, 0);
  }
  pr.os << ")";
  return pr.os.str();
}

std::string to_text(const GroundAtom& a) {
  Printer pr;
  pr.os << a.pred << "(";
  bool first = true;
  for (const auto& t : a.args) {
    if (!first) pr.os << ", ";
    first = false;
    pr.term(t);
  }
  pr.os << ")";
  return pr.os.str();
}

std::string to_text(const Requirement& r) {
  Printer pr;
  pr.os << (r.mode == ObligMode::Once ? "!" : "?") << "[";
  pr.action(r.action);
  pr.os << "]";
  return pr.os.str();
}

}  // namespace auditlog
