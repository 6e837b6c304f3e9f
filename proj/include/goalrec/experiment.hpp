#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "goalrec/geoplanner.hpp"
#include "goalrec/gridmap.hpp"
#include "goalrec/recognizer.hpp"
#include "goalrec/sim.hpp"
#include "goalrec/strips.hpp"
#include "goalrec/viaopt.hpp"

namespace goalrec::experiment {

struct MetricsRow {
  std::string problem;
  double ppv = 0.0;  // percent
  double acc = 0.0;  // percent
  double spr = 0.0;  // mean tie-set size
  long pc = 0;       // planner invocations while building the bank
  double online_s = 0.0;
  double offline_s = 0.0;
  int failed = 0;  // 0/1 per problem, a count in aggregates
  long online_pc = 0;  // planner invocations during recognition (always 0)
  std::string error;
};

/// Scores one problem from its posteriors at each observation point.
///   PPV: the true goal earns 1/|tie set| at points where it is in the tie
///        set, averaged over points, in percent.
///   ACC: each point makes |G| binary decisions (goal in tie set or not);
///        the percentage that agree with the truth, averaged over points.
///   SPR: mean tie-set size.
/// pc and timings are left for the caller.
MetricsRow compute_metrics(const std::vector<recognizer::Posterior>& posteriors,
                           std::size_t true_goal);

/// Mean of the non-failed rows; `failed` counts the failed ones.
MetricsRow aggregate(const std::vector<MetricsRow>& rows, const std::string& label = "mean");

struct ContinuousConfig {
  int k = 1;
  std::uint64_t seed = 0;
  double v_max = 1.0;
  bool simplify = true;
  /// Longest gap between bank via points after simplification (0 keeps the
  /// path's own vertices). Extra via points let the optimizer hold cruise
  /// speed instead of stopping-and-starting at every vertex.
  double via_spacing = 1.0;
  int timing_repetitions = 5;
  /// Bank paths: RRT* with a fixed iteration budget so runs are repeatable.
  geoplanner::PlannerConfig planner = [] {
    geoplanner::PlannerConfig c;
    c.iteration_budget = 1500;
    return c;
  }();
  /// Ground-truth path, planned with a separate seed. Clearance is measured
  /// to obstacle-cell centers, so it must exceed half a cell diagonal for
  /// the path to stay out of obstacle cells; scenario points guarantee
  /// kMinWallClearance. The finer step keeps segment checks tight.
  geoplanner::PlannerConfig truth_planner = [] {
    geoplanner::PlannerConfig c;
    c.iteration_budget = 1500;
    c.clearance = gridmap::kMinWallClearance;
    c.step_size = 0.25;
    return c;
  }();
  viaopt::OptConfig optimizer;
  sim::ControllerConfig controller;
};

/// Per-problem detail kept for posterior-history output and tests.
struct ContinuousProblem {
  std::size_t start = 0;
  std::size_t goal = 0;           // index into the scenario
  std::vector<std::size_t> goal_ids;  // scenario index of each hypothesis
  std::size_t true_goal = 0;      // index into goal_ids
  sim::ObservationStream stream;
  std::vector<recognizer::Posterior> posteriors;  // one per test point
  recognizer::ContinuousBank bank;
};

/// Bank trajectories from start to one goal: k RRT* paths, each simplified,
/// time-optimized and sampled at the controller's dt.
std::vector<std::vector<quintic::TimedState>> build_goal_entry(
    const gridmap::OccupancyGrid& grid, gridmap::Point2 start, gridmap::Point2 goal,
    const ContinuousConfig& cfg, std::uint64_t seed);

/// Ground-truth stream from start to goal.
sim::ObservationStream simulate_agent(const gridmap::OccupancyGrid& grid,
                                      const gridmap::ScenarioPoint& start,
                                      gridmap::Point2 goal, const ContinuousConfig& cfg,
                                      std::uint64_t seed);

/// Every ordered (start, goal) pair of distinct scenario points is one
/// problem whose hypotheses are all points except the start. Rows come in
/// (start, goal) order; failures are flagged and the run continues.
std::vector<MetricsRow> run_continuous_experiment(
    const gridmap::OccupancyGrid& grid, const std::vector<gridmap::ScenarioPoint>& points,
    const ContinuousConfig& cfg, std::vector<ContinuousProblem>* details = nullptr);

/// Runs a single ordered pair (used by the experiment loop and by tests).
MetricsRow run_continuous_problem(const gridmap::OccupancyGrid& grid,
                                  const std::vector<gridmap::ScenarioPoint>& points,
                                  std::size_t start, std::size_t goal,
                                  const ContinuousConfig& cfg,
                                  ContinuousProblem* detail = nullptr);

struct DiscreteConfig {
  int k = 1;
  std::vector<double> fractions{0.3, 0.5, 0.7, 1.0};
  bool optimal_only = false;
  int timing_repetitions = 5;
  strips::TopkOptions topk;
};

struct DiscreteProblemFiles {
  std::string id;
  std::string domain_text;
  std::string problem_text;
  std::string hypotheses_text;
  std::string observations_text;
};

/// One row per observation fraction, labelled `<id>@<fraction>`. The true
/// goal is the hypothesis equal to the problem's :goal, or failing that the
/// single hypothesis satisfied after the full observation sequence.
std::vector<MetricsRow> run_discrete_experiment(const DiscreteProblemFiles& files,
                                                const DiscreteConfig& cfg);

/// Discrete bank: k top plans per hypothesis, rolled out from the initial
/// state. Planner calls = number of hypotheses.
recognizer::DiscreteBank build_discrete_bank(const strips::GroundProblem& problem,
                                             const std::vector<strips::GroundState>& goals,
                                             const DiscreteConfig& cfg);

/// Observation stream for the first ceil(fraction * L) observed actions.
std::vector<recognizer::Observation<strips::GroundState>> discrete_observations(
    const strips::GroundProblem& problem, const std::vector<int>& actions, double fraction);

/// Bank CSV `goal,traj,t,x,y,vx,vy` (t in seconds, dt from the first gap).
void write_bank_csv(std::ostream& os, const recognizer::ContinuousBank& bank, double dt);
recognizer::ContinuousBank read_bank_csv(std::istream& is, double dt);

/// `problem,ppv,acc,spr,pc,online_s,offline_s,failed`
void write_rows_csv(std::ostream& os, const std::vector<MetricsRow>& rows);
/// JSON object with `metadata` (string pairs) and `rows`.
void write_rows_json(std::ostream& os, const std::vector<MetricsRow>& rows,
                     const std::vector<std::pair<std::string, std::string>>& metadata);
std::vector<MetricsRow> read_rows_csv(std::istream& is);

}  // namespace goalrec::experiment
