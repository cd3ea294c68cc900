#include <doctest.h>

#include "auditlog/actions.hpp"
#include "auditlog/parser.hpp"
#include "test_support.hpp"

using namespace auditlog;
using testsup::act;
using testsup::ctx;
using testsup::pol;

TEST_SUITE_BEGIN("actions");

namespace {

const std::vector<AgentId> kRoster = {AgentId{"a"}, AgentId{"b"}, AgentId{"c"}};

ActionInstance inst(const std::string& text, ActionId id) { return ActionInstance{act(text), id}; }

}  // namespace

TEST_CASE("built-in creates and comm behave per the registry table") {
  const ActionRegistry& reg = ctx().registry;
  ActionInstance creates = inst("creates(a, d)", 0);
  ActionInstance comm = inst("comm(a, b, read(b, d))", 1);

  // observability
  CHECK(obs(creates, reg, kRoster) == std::set<AgentId>{AgentId{"a"}});
  CHECK(obs(comm, reg, kRoster) == std::set<AgentId>{AgentId{"a"}, AgentId{"b"}});

  // proof obligations: creation and receiving need none, sending does
  CHECK(po(creates, AgentId{"a"}, reg) == nullptr);
  CHECK(po(comm, AgentId{"c"}, reg) == nullptr);
  CHECK(po(comm, AgentId{"b"}, reg) == nullptr);
  REQUIRE(po(comm, AgentId{"a"}, reg) != nullptr);
  CHECK(alpha_eq(po(comm, AgentId{"a"}, reg), pol("says(a, read(b, d), b)")));

  // conclusions: the creator owns, the receiver hears the says statement
  CHECK(alpha_eq(concl(creates.action, AgentId{"a"}, reg), pol("owns(a, d)")));
  CHECK(alpha_eq(concl(comm.action, AgentId{"b"}, reg), pol("says(a, read(b, d), b)")));
  CHECK(concl(creates.action, AgentId{"b"}, reg) == nullptr);
  CHECK(concl(comm.action, AgentId{"c"}, reg) == nullptr);
  CHECK(concl(comm.action, AgentId{"a"}, reg) == nullptr);
}

TEST_CASE("po ignores the instance id") {
  const ActionRegistry& reg = ctx().registry;
  ActionTemplate t = act("comm(a, b, read(b, d))");
  CHECK(alpha_eq(po(ActionInstance{t, 7}, AgentId{"a"}, reg),
                 po(ActionInstance{t, 99}, AgentId{"a"}, reg)));
}

TEST_CASE("broadcast kind: everyone observes, everyone concludes, the sender justifies") {
  ScenarioScript s = parse_scenario_text(R"(
[agents]
a, b, c, e, f
[data]
d
[predicates]
predicate read(agent, data)
[actions]
action bcast(x: agent, p: policy) {
  obs = all;
  po(x) = forall q: agent . says(x, p, q);
  concl(*) = forall q: agent . says(x, p, q);
}
)");
  ActionTemplate b = parse_action_text("bcast(a, read(b, d))", s);
  ActionInstance binst{b, 0};
  std::set<AgentId> everyone(s.agents.begin(), s.agents.end());
  REQUIRE(s.agents.size() == 5);
  CHECK(obs(binst, s.registry, s.agents) == everyone);

  PolicyRef expected = parse_policy_text("forall q: agent . says(a, read(b, d), q)", s);
  for (const auto& g : s.agents) {
    REQUIRE(concl(b, g, s.registry) != nullptr);
    CHECK(alpha_eq(concl(b, g, s.registry), expected));
    PolicyRef obligation = po(binst, g, s.registry);
    if (g == AgentId{"a"}) {
      REQUIRE(obligation != nullptr);
      CHECK(alpha_eq(obligation, expected));
    } else {
      CHECK(obligation == nullptr);
    }
  }
}

TEST_CASE("user-defined kinds from the shared context") {
  const ActionRegistry& reg = ctx().registry;
  // a drinking action requires the drink permission and concludes nothing
  ActionInstance drunk = inst("drunk(a, beer)", 1);
  REQUIRE(po(drunk, AgentId{"a"}, reg) != nullptr);
  CHECK(alpha_eq(po(drunk, AgentId{"a"}, reg), pol("drink(a, beer)")));
  CHECK(po(drunk, AgentId{"b"}, reg) == nullptr);
  CHECK(concl(drunk.action, AgentId{"a"}, reg) == nullptr);
  // payment needs no permission and teaches nothing
  ActionInstance paid = inst("paid(a, 10$)", 0);
  CHECK(po(paid, AgentId{"a"}, reg) == nullptr);
  CHECK(concl(paid.action, AgentId{"a"}, reg) == nullptr);
  CHECK(obs(paid, reg, kRoster) == std::set<AgentId>{AgentId{"a"}});
}

TEST_CASE("registration rejects duplicates and undeclared placeholders") {
  ActionRegistry reg;
  ActionKindSpec dup;
  dup.name = "creates";
  dup.formals = {"x"};
  dup.arg_sorts = {Sort::Agent};
  CHECK_THROWS_AS(reg.register_kind(dup), RegistryError);

  ActionKindSpec bad;
  bad.name = "shout";
  bad.formals = {"x"};
  bad.arg_sorts = {Sort::Agent};
  bad.po_rule = DerivedPolicyRule{false, 0, Policy::atom("p", {Term::var("z", Sort::Agent)})};
  CHECK_THROWS_AS(reg.register_kind(bad), RegistryError);

  ActionKindSpec ok;
  ok.name = "shout";
  ok.formals = {"x"};
  ok.arg_sorts = {Sort::Agent};
  ok.po_rule = DerivedPolicyRule{false, 0, Policy::atom("p", {Term::var("x", Sort::Agent)})};
  CHECK_NOTHROW(reg.register_kind(ok));
  CHECK(reg.find("shout") != nullptr);
  CHECK(reg.find("creates")->builtin);
}

TEST_CASE("po and concl are ground on ground instances") {
  ScenarioScript s = parse_scenario_text(R"(
[agents]
a, b
[data]
d
[predicates]
predicate read(agent, data)
[actions]
action bcast(x: agent, p: policy) {
  obs = all;
  po(x) = forall q: agent . says(x, p, q);
  concl(*) = forall q: agent . says(x, p, q);
}
)");
  ActionTemplate b = parse_action_text("bcast(a, forall y: data . read(b, y))", s);
  PolicyRef c = concl(b, AgentId{"b"}, s.registry);
  REQUIRE(c != nullptr);
  CHECK(is_ground(*c));
  CHECK_NOTHROW(validate_policy(*c, s.sigs, s.registry));
}

TEST_SUITE_END();
