#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "goalrec/error.hpp"
#include "goalrec/gridmap.hpp"

namespace goalrec::geoplanner {

using gridmap::Point2;

struct PositionPath {
  std::vector<Point2> waypoints;
  double cost = 0.0;  // sum of segment lengths, meters
};

double path_length(const std::vector<Point2>& waypoints);

struct PlannerConfig {
  double time_limit = 5.0;  // seconds, used when iteration_budget is unset
  double clearance = 0.01;  // meters
  double step_size = 0.5;   // meters
  double goal_bias = 0.05;
  double rewire_radius_factor = 1.5;
  std::uint64_t rng_seed = 0;
  /// Fixed iteration count replacing the wall-clock limit (deterministic).
  std::optional<int> iteration_budget;
};

struct PlanOutcome {
  PositionPath path;
  /// Best solution cost after every iteration (infinity until one exists).
  std::vector<double> best_cost_trace;
  int iterations = 0;
  int tree_size = 0;
};

/// RRT* from start to goal. Throws PreconditionError when an endpoint lacks
/// clearance and PlanningTimeout when no solution is found within budget.
/// Each call counts as one planner invocation.
PositionPath plan(const gridmap::OccupancyGrid& grid, Point2 start, Point2 goal,
                  const PlannerConfig& cfg);
PlanOutcome plan_detailed(const gridmap::OccupancyGrid& grid, Point2 start,
                          Point2 goal, const PlannerConfig& cfg);

/// Thrown by plan_k when fewer than k paths were found after retries.
class PartialResult : public Error {
 public:
  PartialResult(std::vector<PositionPath> paths, int requested)
      : Error("found " + std::to_string(paths.size()) + " of " +
              std::to_string(requested) + " paths"),
        paths_(std::move(paths)),
        requested_(requested) {}
  const std::vector<PositionPath>& paths() const { return paths_; }
  int requested() const { return requested_; }

 private:
  std::vector<PositionPath> paths_;
  int requested_;
};

inline constexpr int kPlanRetries = 3;

/// Seed used for path `index`, retry `attempt` of plan_k.
std::uint64_t path_seed(std::uint64_t base, int index, int attempt = 0);

/// k independent RRT* searches with seeds derived from cfg.rng_seed and the
/// path index. Results are ordered by index.
std::vector<PositionPath> plan_k(const gridmap::OccupancyGrid& grid, Point2 start,
                                 Point2 goal, const PlannerConfig& cfg, int k);

/// Greedy shortcutting: from each kept waypoint jump to the farthest later
/// waypoint reachable by a collision-free straight segment.
PositionPath simplify(const PositionPath& path, const gridmap::OccupancyGrid& grid,
                      double clearance, double step_size = 0.5);

/// Inserts evenly spaced points so no segment is longer than max_spacing.
/// Geometry and cost are unchanged.
PositionPath densify(const PositionPath& path, double max_spacing);

/// Straight segment check, sampling every step_size / 4.
bool segment_free(const gridmap::OccupancyGrid& grid, Point2 a, Point2 b,
                  double clearance, double step_size);

/// CSV `idx,x,y` plus a `# cost=<meters>` trailer.
void write_csv(std::ostream& os, const PositionPath& path);

}  // namespace goalrec::geoplanner
