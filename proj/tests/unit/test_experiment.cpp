#include <cmath>
#include <sstream>

#include "doctest.h"
#include "goalrec/error.hpp"
#include "goalrec/experiment.hpp"
#include "goalrec/instrumentation.hpp"
#include "util.hpp"

using namespace goalrec;
using namespace goalrec::experiment;
using recognizer::make_posterior;
using recognizer::Posterior;

namespace {

Posterior onehot(std::size_t n, std::size_t hit) {
  std::vector<double> lik(n, 0.1);
  lik[hit] = 0.9;
  return make_posterior(lik, std::vector<double>(n, 1.0 / n));
}

}  // namespace

TEST_CASE("metrics: perfect recognition") {
  const auto row = compute_metrics(std::vector<Posterior>(6, onehot(7, 2)), 2);
  CHECK(row.ppv == 100.0);
  CHECK(row.acc == 100.0);
  CHECK(row.spr == 1.0);
}

TEST_CASE("metrics: always wrong") {
  const auto row = compute_metrics(std::vector<Posterior>(6, onehot(7, 4)), 2);
  CHECK(row.ppv == 0.0);
  CHECK(row.acc == doctest::Approx(100.0 * 5.0 / 7.0));
  CHECK(row.spr == 1.0);
}

TEST_CASE("metrics: two-way tie with the true goal") {
  std::vector<double> lik(7, 0.1);
  lik[2] = lik[5] = 0.9;
  const auto post = make_posterior(lik, std::vector<double>(7, 1.0 / 7));
  const auto row = compute_metrics(std::vector<Posterior>(6, post), 2);
  CHECK(row.ppv == doctest::Approx(50.0));
  CHECK(row.spr == 2.0);
  CHECK(row.acc == doctest::Approx(100.0 * 6.0 / 7.0));
}

TEST_CASE("aggregate skips failed rows") {
  MetricsRow a{"a", 100, 100, 1, 7, 1e-3, 1.0, 0};
  MetricsRow b{"b", 50, 80, 2, 7, 3e-3, 3.0, 0};
  MetricsRow c{"c", 0, 0, 0, 0, 0, 0, 1};
  const auto m = aggregate({a, b, c});
  CHECK(m.ppv == 75.0);
  CHECK(m.pc == 7);
  CHECK(m.failed == 1);
}

TEST_CASE("rows CSV round trip") {
  std::vector<MetricsRow> rows{{"s0-g1", 100, 100, 1, 7, 1.5e-5, 0.25, 0}, {"s0-g2", 0, 0, 0, 0, 0, 0, 1}};
  std::stringstream ss;
  write_rows_csv(ss, rows);
  CHECK(ss.str().rfind("problem,ppv,acc,spr,pc,online_s,offline_s,failed\n", 0) == 0);
  const auto back = read_rows_csv(ss);
  REQUIRE(back.size() == 2);
  CHECK(back[0].problem == "s0-g1");
  CHECK(back[0].pc == 7);
  CHECK(back[1].failed == 1);
  std::ostringstream js;
  write_rows_json(js, rows, {{"mode", "continuous"}});
  CHECK(js.str().find("\"metadata\"") != std::string::npos);
}

TEST_CASE("continuous problem: planner calls and degenerate scenarios") {
  const auto g = gridmap::load_map(testutil::data("two_corridor.map"));
  const auto pts = gridmap::load_scenario(testutil::data("two_corridor.scen"));
  ContinuousConfig cfg;
  cfg.seed = 3;
  ContinuousProblem detail;
  const auto row = run_continuous_problem(g, pts, 0, 1, cfg, &detail);
  CHECK(row.failed == 0);
  CHECK(row.pc == static_cast<long>(pts.size() - 1));
  CHECK(row.online_pc == 0);
  CHECK(detail.posteriors.size() == 6);
  CHECK(row.problem == "s0-g1");

  const std::vector<gridmap::ScenarioPoint> two(pts.begin(), pts.begin() + 2);
  const auto rows = run_continuous_experiment(g, two, cfg);
  REQUIRE(rows.size() == 2);
  for (const auto& r : rows) {
    CHECK(r.failed == 0);
    CHECK(r.ppv == 100.0);
  }
}

TEST_CASE("continuous bank CSV round trip") {
  const auto g = gridmap::load_map(testutil::data("two_corridor.map"));
  const auto pts = gridmap::load_scenario(testutil::data("two_corridor.scen"));
  ContinuousConfig cfg;
  cfg.k = 2;
  const auto entry = build_goal_entry(g, pts[0].position(), pts[1].position(), cfg, 4);
  REQUIRE(entry.size() == 2);
  recognizer::ContinuousBank bank({"g1"}, {entry});
  std::stringstream ss;
  write_bank_csv(ss, bank, 0.1);
  const auto back = read_bank_csv(ss, 0.1);
  REQUIRE(back.size() == 1);
  REQUIRE(back.trajectories(0).size() == 2);
  CHECK(back.trajectories(0)[1].size() == entry[1].size());
  CHECK(back.trajectories(0)[1].back().x == doctest::Approx(entry[1].back().x).epsilon(1e-9));
}

TEST_CASE("discrete experiment") {
  DiscreteProblemFiles f;
  f.id = "bw";
  f.domain_text = strips::read_text_file(testutil::data("pddl/blocksworld-domain.pddl"));
  f.problem_text = strips::read_text_file(testutil::data("pddl/blocksworld-problem.pddl"));
  f.hypotheses_text = strips::read_text_file(testutil::data("pddl/blocksworld-hyps.txt"));
  f.observations_text = strips::read_text_file(testutil::data("pddl/blocksworld-obs.txt"));
  DiscreteConfig cfg;
  cfg.k = 2;
  const auto rows = run_discrete_experiment(f, cfg);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].problem == "bw@0.30");
  for (const auto& r : rows) {
    CHECK(r.failed == 0);
    CHECK(r.pc == 4);
  }
  // Full noiseless optimal plan: the true goal is in the argmax set.
  CHECK(rows[3].ppv > 0.0);

  auto empty = f;
  empty.hypotheses_text = "";
  cfg.fractions = {1.0};
  CHECK_THROWS_AS(run_discrete_experiment(empty, cfg), ConfigError);
}

TEST_CASE("discrete observation prefixes") {
  const auto dom = strips::parse_domain(strips::read_text_file(testutil::data("pddl/blocksworld-domain.pddl")));
  const auto p = strips::parse_problem(strips::read_text_file(testutil::data("pddl/blocksworld-problem.pddl")), dom);
  const auto acts = strips::parse_observations(strips::read_text_file(testutil::data("pddl/blocksworld-obs.txt")), p);
  CHECK(discrete_observations(p, acts, 0.3).size() == 2);
  CHECK(discrete_observations(p, acts, 0.5).size() == 2);
  CHECK(discrete_observations(p, acts, 0.7).size() == 3);
  CHECK(discrete_observations(p, acts, 1.0).size() == 4);
  const auto obs = discrete_observations(p, acts, 1.0);
  CHECK(obs[0].t == 1);
}
