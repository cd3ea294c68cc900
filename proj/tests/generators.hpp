#ifndef AUDITLOG_TESTS_GENERATORS_HPP_
#define AUDITLOG_TESTS_GENERATORS_HPP_

// Seeded random policy generator over the shared test declarations.

#include <random>
#include <vector>

#include "auditlog/model.hpp"

namespace gens {

using namespace auditlog;

class PolicyGen {
 public:
  explicit PolicyGen(std::uint64_t seed) : rng_(seed) {}

  Term term(Sort sort) {
    const std::vector<Term>* pool = nullptr;
    static const std::vector<Term> agents = {Term::agent_const("a"), Term::agent_const("b"),
                                             Term::agent_const("c")};
    static const std::vector<Term> data = {Term::data_const("d"), Term::data_const("dd"),
                                           Term::data_const("beer")};
    static const std::vector<Term> money = {Term::money("5$"), Term::money("10$")};
    switch (sort) {
      case Sort::Agent: pool = &agents; break;
      case Sort::Data: pool = &data; break;
      case Sort::Money: pool = &money; break;
    }
    // prefer a bound variable of the right sort when one is in scope
    std::vector<Term> bound;
    for (const auto& b : scope_)
      if (b.sort() == sort) bound.push_back(b);
    if (!bound.empty() && pick(100) < 50) return bound[pick(bound.size())];
    if (sort != Sort::Money && pick(100) < 15)
      return Term::var("f" + std::to_string(pick(2)), sort);  // free variable
    return (*pool)[pick(pool->size())];
  }

  PolicyRef atom() {
    switch (pick(6)) {
      case 0: return Policy::atom("rel", {term(Sort::Data), term(Sort::Data)});
      case 1: return Policy::atom("print", {term(Sort::Agent), term(Sort::Data)});
      case 2: return Policy::atom("drink", {term(Sort::Agent), term(Sort::Data)});
      case 3: return Policy::atom("age21", {term(Sort::Agent)});
      case 4: return Policy::atom("alc", {term(Sort::Data)});
      default: return Policy::atom("read", {term(Sort::Agent), term(Sort::Data)});
    }
  }

  ActionTemplate action() {
    if (pick(2) == 0) return ActionTemplate{"drunk", {term(Sort::Agent), term(Sort::Data)}, nullptr};
    return ActionTemplate{"paid", {term(Sort::Agent), term(Sort::Money)}, nullptr};
  }

  PolicyRef policy(int depth) {
    if (depth <= 0) return leaf();
    switch (pick(7)) {
      case 0: return leaf();
      case 1: return Policy::conj(policy(depth - 1), policy(depth - 1));
      case 2: return Policy::cond_implies(policy(depth - 1), policy(depth - 1));
      case 3: {
        ObligMode mode = pick(2) == 0 ? ObligMode::Once : ObligMode::Many;
        return Policy::oblig_implies(Requirement{mode, action()}, policy(depth - 1));
      }
      case 4: {
        Sort s = pick(2) == 0 ? Sort::Agent : Sort::Data;
        Term binder = Term::var("x" + std::to_string(pick(3)), s);
        scope_.push_back(binder);
        PolicyRef body = policy(depth - 1);
        scope_.pop_back();
        return Policy::forall(binder, body);
      }
      case 5:
        return Policy::says_to(term(Sort::Agent), policy(depth - 1), term(Sort::Agent));
      default:
        return leaf();
    }
  }

  std::uint64_t pick(std::uint64_t n) { return rng_() % n; }

 private:
  PolicyRef leaf() {
    if (pick(4) == 0) return Policy::owns(term(Sort::Agent), term(Sort::Data));
    return atom();
  }

  std::mt19937_64 rng_;
  std::vector<Term> scope_;
};

}  // namespace gens

#endif  // AUDITLOG_TESTS_GENERATORS_HPP_
