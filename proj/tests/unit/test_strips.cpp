#include <algorithm>
#include <random>
#include <sstream>

#include "../common/plan_oracle.hpp"
#include "doctest.h"
#include "goalrec/error.hpp"
#include "goalrec/instrumentation.hpp"
#include "goalrec/strips.hpp"
#include "util.hpp"

using namespace goalrec;
using namespace goalrec::strips;

namespace {

std::string text(const std::string& name) { return read_text_file(testutil::data("pddl/" + name)); }

const std::string kTwoBlocks = R"(
(define (problem bw-2) (:domain blocksworld)
  (:objects a b)
  (:init (clear a) (clear b) (ontable a) (ontable b) (handempty))
  (:goal (on a b)))
)";

GroundState facts(const GroundProblem& p, std::initializer_list<const char*> names) {
  GroundState s;
  for (const char* n : names) {
    const int id = p.fact_id(n);
    REQUIRE_MESSAGE(id >= 0, n);
    s.push_back(id);
  }
  std::sort(s.begin(), s.end());
  return s;
}

std::string domain_with(const std::string& pre, const std::string& eff = "(p ?x)") {
  return "(define (domain d) (:predicates (p ?x) (q ?x))"
         " (:action act :parameters (?x) :precondition " + pre + " :effect " + eff + "))";
}

}  // namespace

TEST_CASE("grounding of 2-block blocksworld") {
  const auto dom = parse_domain(text("blocksworld-domain.pddl"));
  const auto p = parse_problem(kTwoBlocks, dom);
  // on: 4, ontable: 2, clear: 2, holding: 2, handempty: 1.
  CHECK(p.facts.size() == 11);
  const int stack = p.action_id("(stack a b)");
  REQUIRE(stack >= 0);
  CHECK(p.actions[stack].pre == facts(p, {"(holding a)", "(clear b)"}));
  CHECK(std::is_sorted(p.facts.begin(), p.facts.end()));
  const auto again = parse_problem(kTwoBlocks, dom);
  CHECK(again.facts == p.facts);
}

TEST_CASE("empty init and undeclared objects") {
  const auto dom = parse_domain(text("blocksworld-domain.pddl"));
  const auto p = parse_problem("(define (problem e) (:domain blocksworld) (:objects a) (:init) (:goal (clear a)))", dom);
  CHECK(p.init.empty());
  CHECK_THROWS_AS(
      parse_problem("(define (problem e) (:domain blocksworld) (:objects a) (:init) (:goal (clear z)))", dom),
      TypeError);
}

TEST_CASE("type checking") {
  const auto dom = parse_domain(text("grid-domain.pddl"));
  CHECK(dom.is_subtype("robot", "agent"));
  CHECK_THROWS_AS(parse_problem("(define (problem g) (:domain grid) (:objects p - place r - robot)"
                                " (:init (at p r)) (:goal (at r p)))",
                                dom),
                  TypeError);
  CHECK_THROWS_AS(parse_problem("(define (problem g) (:domain grid) (:objects p - place r - robot)"
                                " (:init (at r)) (:goal (at r p)))",
                                dom),
                  TypeError);
}

TEST_CASE("unsupported features name the construct") {
  const char* cases[] = {"(or (p ?x) (q ?x))", "(forall (?y) (p ?y))", "(exists (?y) (p ?y))",
                         "(not (p ?x))", "(= ?x ?x)"};
  for (const char* pre : cases) {
    CHECK_THROWS_AS(parse_domain(domain_with(pre)), UnsupportedFeature);
  }
  CHECK_THROWS_AS(parse_domain(domain_with("(p ?x)", "(when (p ?x) (q ?x))")), UnsupportedFeature);
  CHECK_THROWS_AS(parse_domain(domain_with("(p ?x)", "(increase (total-cost) 1)")), UnsupportedFeature);
  try {
    parse_domain(domain_with("(or (p ?x) (q ?x))"));
  } catch (const UnsupportedFeature& e) {
    CHECK(std::string(e.what()).find("or") != std::string::npos);
  }
}

TEST_CASE("apply and rollout") {
  const auto dom = parse_domain(text("blocksworld-domain.pddl"));
  const auto p = parse_problem(text("blocksworld-problem.pddl"), dom);
  const auto& pick = p.actions[p.action_id("(pick-up a)")];
  const auto s = strips::apply(p.init, pick);
  CHECK(std::binary_search(s.begin(), s.end(), p.fact_id("(holding a)")));
  CHECK_FALSE(std::binary_search(s.begin(), s.end(), p.fact_id("(handempty)")));
  CHECK_FALSE(std::binary_search(s.begin(), s.end(), p.fact_id("(ontable a)")));
  CHECK(std::binary_search(s.begin(), s.end(), p.fact_id("(ontable b)")));
  CHECK_THROWS_AS(strips::apply(s, pick), InapplicableAction);

  GroundAction noop{"(noop)", {}, {}, {}};
  CHECK(strips::apply(p.init, noop) == p.init);

  CHECK(rollout(p, Plan{}).size() == 1);
  const Plan good{{p.action_id("(pick-up b)"), p.action_id("(stack b c)"), p.action_id("(pick-up a)"),
                   p.action_id("(stack a b)")}};
  const auto tr = rollout(p, good);
  CHECK(tr.size() == 5);
  CHECK(satisfies(tr.back(), p.goal));
  const Plan bad{{p.action_id("(pick-up b)"), p.action_id("(pick-up a)")}};
  try {
    rollout(p, bad);
    FAIL("expected InapplicableAction");
  } catch (const InapplicableAction& e) {
    CHECK(e.step() == 2);
  }
}

TEST_CASE("apply matches the set identity") {
  const auto dom = parse_domain(text("blocksworld-domain.pddl"));
  const auto p = parse_problem(text("blocksworld-problem.pddl"), dom);
  std::mt19937_64 rng(3);
  GroundState s = p.init;
  for (int i = 0; i < 200; ++i) {
    const auto app = applicable_actions(p, s);
    REQUIRE_FALSE(app.empty());
    const auto& a = p.actions[app[rng() % app.size()]];
    const auto n = strips::apply(s, a);
    GroundState del_in_s, s_minus_del, adds_new;
    std::set_intersection(a.del.begin(), a.del.end(), s.begin(), s.end(), std::back_inserter(del_in_s));
    std::set_difference(s.begin(), s.end(), a.del.begin(), a.del.end(), std::back_inserter(s_minus_del));
    std::set_difference(a.add.begin(), a.add.end(), s_minus_del.begin(), s_minus_del.end(), std::back_inserter(adds_new));
    CHECK(n.size() == s.size() - del_in_s.size() + adds_new.size());
    s = n;
  }
}

TEST_CASE("top-k on 2-block blocksworld") {
  const auto dom = parse_domain(text("blocksworld-domain.pddl"));
  const auto p = parse_problem(kTwoBlocks, dom);
  const auto before = PlannerCalls::count();
  const auto plans = topk_plans(p, p.goal, 2);
  CHECK(PlannerCalls::count() == before + 1);
  // Every longer plan revisits a state, so the loop-free rule leaves one.
  REQUIRE(plans.size() == 1);
  CHECK(plans[0].actions == std::vector<int>{p.action_id("(pick-up a)"), p.action_id("(stack a b)")});
  CHECK(oracle::cheapest_costs(p, p.goal, 2, 12) == std::vector<std::size_t>{2});

  const auto trivial = topk_plans(p, p.init, 3);
  CHECK(trivial[0].cost() == 0);
}

TEST_CASE("top-k unsolvable goal") {
  const auto dom = parse_domain(text("blocksworld-domain.pddl"));
  const auto p = parse_problem(kTwoBlocks, dom);
  CHECK_THROWS_AS(topk_plans(p, facts(p, {"(on a b)", "(on b a)"}), 1), Unsolvable);
}

TEST_CASE("top-k equals exhaustive enumeration") {
  for (const std::string name : {"blocksworld", "grid", "gripper"}) {
    const auto dom = parse_domain(text(name + "-domain.pddl"));
    const auto p = parse_problem(text(name + "-problem.pddl"), dom);
    const auto goals = parse_hypotheses(text(name + "-hyps.txt"), p);
    for (const auto& goal : goals) {
      for (int k : {1, 2, 5}) {
        const auto plans = topk_plans(p, goal, k);
        std::vector<std::size_t> costs;
        for (const auto& pl : plans) {
          costs.push_back(pl.cost());
          CHECK(satisfies(rollout(p, pl).back(), goal));
        }
        CHECK_MESSAGE(costs == oracle::cheapest_costs(p, goal, k), name);
        for (std::size_t i = 0; i + 1 < plans.size(); ++i) CHECK(plans[i].actions != plans[i + 1].actions);
      }
    }
  }
}

TEST_CASE("symmetric routes on the grid domain") {
  const auto dom = parse_domain(text("grid-domain.pddl"));
  const auto p = parse_problem(text("grid-problem.pddl"), dom);
  const auto plans = topk_plans(p, p.goal, 4);
  REQUIRE(plans.size() == 4);
  CHECK(plans[0].cost() == 4);
  CHECK(plans[1].cost() == plans[0].cost());
  TopkOptions opts;
  opts.optimal_only = true;
  for (const auto& pl : topk_plans(p, p.goal, 10, opts)) CHECK(pl.cost() == 4);
}

TEST_CASE("observed states follow the rollout") {
  const auto dom = parse_domain(text("blocksworld-domain.pddl"));
  const auto p = parse_problem(text("blocksworld-problem.pddl"), dom);
  const auto obs = parse_observations(text("blocksworld-obs.txt"), p);
  REQUIRE(obs.size() == 4);
  CHECK(observed_states(p, std::vector<int>{}).empty());
  const auto tr = rollout(p, Plan{obs});
  const auto all = observed_states(p, obs);
  REQUIRE(all.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(all[i] == tr[i + 1]);
  const std::vector<int> half(obs.begin(), obs.begin() + 2);
  CHECK(observed_states(p, half).size() == 2);
}

TEST_CASE("hypothesis and observation text") {
  const auto dom = parse_domain(text("gripper-domain.pddl"));
  const auto p = parse_problem(text("gripper-problem.pddl"), dom);
  const auto hyps = parse_hypotheses(text("gripper-hyps.txt"), p);
  CHECK(hyps.size() == 4);
  CHECK(hyps[3].size() == 1);
  CHECK(parse_hypotheses("(at ball1 roomb) (at ball2 roomb)\n", p)[0] == hyps[0]);
  CHECK_THROWS_AS(parse_observations("(fly ball1)\n", p), Error);
}

TEST_CASE("plan text") {
  const auto dom = parse_domain(text("blocksworld-domain.pddl"));
  const auto p = parse_problem(kTwoBlocks, dom);
  std::ostringstream os;
  write_plan(os, p, topk_plans(p, p.goal, 1)[0]);
  CHECK(os.str() == "(pick-up a)\n(stack a b)\n; cost = 2\n");
}
