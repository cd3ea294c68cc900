#include <doctest.h>

#include "auditlog/model.hpp"
#include "auditlog/parser.hpp"
#include "generators.hpp"
#include "oracle_debruijn.hpp"
#include "test_support.hpp"

using namespace auditlog;
using testsup::act;
using testsup::ctx;
using testsup::pol;

TEST_SUITE_BEGIN("model");

TEST_CASE("substitute leaves policies without free occurrences unchanged") {
  PolicyRef p = pol("forall x: data . rel(d, x) -> print(b, d)");
  PolicyRef q = substitute(p, Term::var("y", Sort::Data), Term::data_const("dd"));
  CHECK(alpha_eq(p, q));
  // the binder shadows its own name
  PolicyRef r = substitute(p, Term::var("x", Sort::Data), Term::data_const("dd"));
  CHECK(alpha_eq(p, r));
}

TEST_CASE("substitute replaces free occurrences") {
  PolicyRef p = pol("rel(d, x: data)");
  PolicyRef q = substitute(p, Term::var("x", Sort::Data), Term::data_const("dd"));
  CHECK(alpha_eq(q, pol("rel(d, dd)")));
}

TEST_CASE("substitute is capture-avoiding") {
  // substituting y for x under a binder named y must rename the binder
  PolicyRef p = Policy::forall(Term::var("y", Sort::Data),
                               Policy::atom("rel", {Term::var("x", Sort::Data), Term::var("y", Sort::Data)}));
  PolicyRef got = substitute(p, Term::var("x", Sort::Data), Term::var("y", Sort::Data));
  PolicyRef expect = Policy::forall(
      Term::var("z", Sort::Data),
      Policy::atom("rel", {Term::var("y", Sort::Data), Term::var("z", Sort::Data)}));
  CHECK(alpha_eq(got, expect));
  // naive (capturing) result would be forall y. rel(y, y)
  PolicyRef captured = Policy::forall(
      Term::var("y", Sort::Data),
      Policy::atom("rel", {Term::var("y", Sort::Data), Term::var("y", Sort::Data)}));
  CHECK(!alpha_eq(got, captured));
}

TEST_CASE("substitute agrees with the nameless oracle") {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    gens::PolicyGen gen(seed);
    PolicyRef p = gen.policy(3);
    Sort sort = seed % 2 == 0 ? Sort::Data : Sort::Agent;
    Term var = Term::var("f" + std::to_string(seed % 2), sort);
    Term repl = seed % 3 == 0 ? Term::var("x1", sort) : gen.term(sort);
    if (repl.sort() != sort) continue;
    PolicyRef named = substitute(p, var, repl);
    dboracle::DbRef via_named = dboracle::to_db(named);
    std::vector<dboracle::Binder> empty;
    dboracle::DbRef via_oracle =
        dboracle::subst(dboracle::to_db(p), var.name(), sort, dboracle::to_db(repl, empty));
    CAPTURE(seed);
    CAPTURE(to_text(p));
    REQUIRE(*via_named == *via_oracle);
  }
}

TEST_CASE("substitute rejects sort mismatches") {
  PolicyRef p = pol("rel(d, x: data)");
  CHECK_THROWS_AS(substitute(p, Term::var("x", Sort::Data), Term::agent_const("a")), SortError);
}

TEST_CASE("free_vars") {
  CHECK(free_vars(*pol("read(b, d)")).empty());
  CHECK(free_vars(*pol("forall x: data . owns(a, x) -> read(b, x)")).empty());
  auto fv = free_vars(*pol("rel(d, x: data) -> print(b, d)"));
  REQUIRE(fv.size() == 1);
  CHECK(fv.begin()->name() == "x");
  CHECK(fv.begin()->sort() == Sort::Data);
}

TEST_CASE("data_set") {
  auto ds1 = data_set(*pol("read(b, d)"));
  REQUIRE(ds1.size() == 1);
  CHECK(ds1.count(Term::data_const("d")) == 1);

  CHECK(data_set(*pol("age21(a)")).empty());

  auto ds3 = data_set(*pol("forall x: data . rel(d, x) -> print(b, d)"));
  CHECK(ds3.size() == 2);
  CHECK(ds3.count(Term::data_const("d")) == 1);
  CHECK(ds3.count(Term::var("x", Sort::Data)) == 1);
}

namespace {

// independent structural recursion collecting data-sorted terms
void data_set_oracle(const Policy& p, std::set<Term>& out) {
  auto term = [&](const Term& t) {
    if (t.sort() == Sort::Data) out.insert(t);
  };
  switch (p.kind()) {
    case Policy::Kind::Atom:
      for (const auto& t : p.as_atom().args) term(t);
      break;
    case Policy::Kind::Owns:
      term(p.as_owns().data);
      break;
    case Policy::Kind::SaysTo:
      data_set_oracle(*p.as_says().body, out);
      break;
    case Policy::Kind::And:
      data_set_oracle(*p.as_and().lhs, out);
      data_set_oracle(*p.as_and().rhs, out);
      break;
    case Policy::Kind::CondImplies:
      data_set_oracle(*p.as_cond().cond, out);
      data_set_oracle(*p.as_cond().body, out);
      break;
    case Policy::Kind::ObligImplies:
      for (const auto& t : p.as_oblig().req.action.args) term(t);
      if (p.as_oblig().req.action.payload) data_set_oracle(*p.as_oblig().req.action.payload, out);
      data_set_oracle(*p.as_oblig().body, out);
      break;
    case Policy::Kind::Forall:
      data_set_oracle(*p.as_forall().body, out);
      break;
    case Policy::Kind::PayloadHole:
      break;
  }
}

}  // namespace

TEST_CASE("data_set agrees with a structural recursion oracle") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    gens::PolicyGen gen(seed + 1000);
    PolicyRef p = gen.policy(3);
    std::set<Term> expect;
    data_set_oracle(*p, expect);
    CHECK(data_set(*p) == expect);
  }
}

TEST_CASE("alpha_eq basics") {
  CHECK(alpha_eq(pol("forall x: data . alc(x)"), pol("forall y: data . alc(y)")));
  CHECK(alpha_eq(pol("read(b, d)"), pol("read(b, d)")));
  CHECK(!alpha_eq(pol("forall x: data . alc(x)"), pol("forall x: data . rel(x, x)")));
  CHECK(!alpha_eq(pol("forall x: data . alc(x)"), pol("forall x: agent . age21(x)")));
  // free variables are not interchangeable
  CHECK(!alpha_eq(pol("alc(x: data)"), pol("alc(y: data)")));
}

TEST_CASE("alpha_eq is an equivalence relation") {
  std::vector<PolicyRef> pool;
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    gens::PolicyGen gen(seed + 2000);
    pool.push_back(gen.policy(3));
  }
  for (const auto& p : pool) CHECK(alpha_eq(p, p));  // reflexive
  for (std::size_t i = 0; i < pool.size(); ++i) {
    for (std::size_t j = i; j < pool.size(); ++j) {
      bool ij = alpha_eq(pool[i], pool[j]);
      bool ji = alpha_eq(pool[j], pool[i]);
      CHECK(ij == ji);  // symmetric
    }
  }
  // transitivity via renamed copies
  for (const auto& p : pool) {
    if (p->kind() != Policy::Kind::Forall) continue;
    const auto& fa = p->as_forall();
    std::set<std::string> taken;
    collect_names(*fa.body, taken);
    Term b1 = Term::var(fresh_name("r", taken), fa.binder.sort());
    PolicyRef q = Policy::forall(b1, substitute(fa.body, fa.binder, b1));
    Term b2 = Term::var(fresh_name("s", taken), fa.binder.sort());
    PolicyRef r = Policy::forall(b2, substitute(fa.body, fa.binder, b2));
    CHECK(alpha_eq(p, q));
    CHECK(alpha_eq(q, r));
    CHECK(alpha_eq(p, r));
  }
}

TEST_CASE("is_ground") {
  CHECK(is_ground(*pol("read(b, d)")));
  CHECK(!is_ground(*pol("rel(d, x: data)")));
  CHECK(is_ground(*pol("forall x: agent . ![paid(x, 10$)] -> forall y: data . "
                       "(age21(x) and alc(y)) -> drink(x, y)")));
}

TEST_CASE("substitution removes the variable from free_vars") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    gens::PolicyGen gen(seed + 3000);
    PolicyRef p = gen.policy(3);
    Term var = Term::var("f0", Sort::Data);
    PolicyRef q = substitute(p, var, Term::data_const("dd"));
    CHECK(free_vars(*q).count(var) == 0);
  }
}

TEST_CASE("data_set after substitution") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    gens::PolicyGen gen(seed + 4000);
    PolicyRef p = gen.policy(3);
    Term var = Term::var("f1", Sort::Data);
    if (!free_vars(*p).count(var)) continue;
    Term repl = Term::data_const("beer");
    std::set<Term> expect = data_set(*p);
    expect.erase(var);
    expect.insert(repl);
    CHECK(data_set(*substitute(p, var, repl)) == expect);
  }
}

TEST_CASE("printing round-trips modulo alpha") {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    gens::PolicyGen gen(seed + 5000);
    PolicyRef p = gen.policy(4);
    std::string text = to_text(p);
    CAPTURE(text);
    PolicyRef q = parse_policy_text(text, ctx());
    REQUIRE(alpha_eq(p, q));
  }
}

TEST_CASE("printer parenthesizes by precedence") {
  CHECK(to_text(pol("(age21(a) and alc(d)) -> drink(a, d)")) ==
        "age21(a) and alc(d) -> drink(a, d)");
  CHECK(to_text(pol("age21(a) and (alc(d) -> drink(a, d))")) ==
        "age21(a) and (alc(d) -> drink(a, d))");
  CHECK(to_text(pol("alc(d) -> alc(dd) -> alc(beer)")) == "alc(d) -> alc(dd) -> alc(beer)");
  CHECK(to_text(pol("(alc(d) -> alc(dd)) -> alc(beer)")) == "(alc(d) -> alc(dd)) -> alc(beer)");
}

TEST_SUITE_END();
