#include "goalrec/geoplanner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "goalrec/instrumentation.hpp"
#include "goalrec/rng.hpp"

namespace goalrec::geoplanner {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double dist(Point2 a, Point2 b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

struct Node {
  Point2 p;
  int parent = -1;
  double cost = 0.0;
  std::vector<int> children;
};

void check_endpoint(const gridmap::OccupancyGrid& grid, Point2 p, double clearance,
                    const char* which) {
  if (!grid.in_bounds(p.x, p.y) || !grid.is_free(p.x, p.y) ||
      grid.wall_distance(p) < clearance) {
    throw PreconditionError(std::string(which) + " (" + std::to_string(p.x) + ", " +
                            std::to_string(p.y) +
                            ") is not in free space with the required clearance");
  }
}

class Rrtstar {
 public:
  Rrtstar(const gridmap::OccupancyGrid& grid, Point2 start, Point2 goal,
          const PlannerConfig& cfg)
      : grid_(grid), goal_(goal), cfg_(cfg), rng_(cfg.rng_seed) {
    nodes_.push_back({start, -1, 0.0, {}});
    extent_ = std::max(grid.world_width(), grid.world_height());
  }

  PlanOutcome run() {
    PlanOutcome out;
    const auto t0 = std::chrono::steady_clock::now();
    int it = 0;
    while (true) {
      if (cfg_.iteration_budget) {
        if (it >= *cfg_.iteration_budget) break;
      } else {
        const std::chrono::duration<double> el = std::chrono::steady_clock::now() - t0;
        if (el.count() >= cfg_.time_limit) break;
      }
      ++it;
      iterate();
      out.best_cost_trace.push_back(best_cost());
    }
    out.iterations = it;
    out.tree_size = static_cast<int>(nodes_.size());
    const int best = best_goal_node();
    if (best < 0) {
      throw PlanningTimeout("no path found after " + std::to_string(it) + " iterations");
    }
    out.path = extract(best);
    return out;
  }

 private:
  Point2 sample() {
    if (rng_.uniform() < cfg_.goal_bias) return goal_;
    return {rng_.uniform(0.0, grid_.world_width()), rng_.uniform(0.0, grid_.world_height())};
  }

  bool point_ok(Point2 p) const {
    return grid_.in_bounds(p.x, p.y) && grid_.wall_distance(p) >= cfg_.clearance;
  }

  bool edge_ok(Point2 a, Point2 b) const {
    return segment_free(grid_, a, b, cfg_.clearance, cfg_.step_size);
  }

  double radius() const {
    const double n = static_cast<double>(nodes_.size() + 1);
    const double r = cfg_.rewire_radius_factor * extent_ * std::sqrt(std::log(n) / n);
    return std::clamp(r, cfg_.step_size, 4.0 * cfg_.step_size);
  }

  void iterate() {
    const Point2 target = sample();
    int nearest = 0;
    double nd = kInf;
    for (int i = 0; i < static_cast<int>(nodes_.size()); ++i) {
      const double d = dist(nodes_[i].p, target);
      if (d < nd) {
        nd = d;
        nearest = i;
      }
    }
    if (nd < 1e-12) return;
    Point2 fresh = target;
    if (nd > cfg_.step_size) {
      const double s = cfg_.step_size / nd;
      const Point2 from = nodes_[nearest].p;
      fresh = {from.x + (target.x - from.x) * s, from.y + (target.y - from.y) * s};
    }
    if (!point_ok(fresh)) return;
    if (!edge_ok(nodes_[nearest].p, fresh)) return;

    const double r = radius();
    near_.clear();
    for (int i = 0; i < static_cast<int>(nodes_.size()); ++i) {
      if (dist(nodes_[i].p, fresh) <= r) near_.push_back(i);
    }

    int parent = nearest;
    double cost = nodes_[nearest].cost + dist(nodes_[nearest].p, fresh);
    for (int i : near_) {
      if (i == nearest) continue;
      const double c = nodes_[i].cost + dist(nodes_[i].p, fresh);
      if (c < cost && edge_ok(nodes_[i].p, fresh)) {
        cost = c;
        parent = i;
      }
    }
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back({fresh, parent, cost, {}});
    nodes_[parent].children.push_back(id);

    for (int i : near_) {
      if (i == parent) continue;
      const double c = cost + dist(fresh, nodes_[i].p);
      if (c + 1e-12 < nodes_[i].cost && edge_ok(fresh, nodes_[i].p)) reparent(i, id, c);
    }

    if (dist(fresh, goal_) <= cfg_.step_size && edge_ok(fresh, goal_)) {
      goal_nodes_.push_back(id);
    }
  }

  void reparent(int node, int new_parent, double new_cost) {
    auto& siblings = nodes_[nodes_[node].parent].children;
    siblings.erase(std::find(siblings.begin(), siblings.end(), node));
    nodes_[node].parent = new_parent;
    nodes_[new_parent].children.push_back(node);
    const double delta = new_cost - nodes_[node].cost;
    std::vector<int> stack{node};
    while (!stack.empty()) {
      const int n = stack.back();
      stack.pop_back();
      nodes_[n].cost += delta;
      for (int c : nodes_[n].children) stack.push_back(c);
    }
  }

  int best_goal_node() const {
    int best = -1;
    double bc = kInf;
    for (int i : goal_nodes_) {
      const double c = nodes_[i].cost + dist(nodes_[i].p, goal_);
      if (c < bc) {
        bc = c;
        best = i;
      }
    }
    return best;
  }

  double best_cost() const {
    const int b = best_goal_node();
    return b < 0 ? kInf : nodes_[b].cost + dist(nodes_[b].p, goal_);
  }

  PositionPath extract(int node) const {
    std::vector<Point2> rev;
    for (int n = node; n >= 0; n = nodes_[n].parent) rev.push_back(nodes_[n].p);
    PositionPath path;
    path.waypoints.assign(rev.rbegin(), rev.rend());
    if (dist(path.waypoints.back(), goal_) > 0.0) path.waypoints.push_back(goal_);
    path.cost = path_length(path.waypoints);
    return path;
  }

  const gridmap::OccupancyGrid& grid_;
  Point2 goal_;
  PlannerConfig cfg_;
  Rng rng_;
  double extent_ = 0.0;
  std::vector<Node> nodes_;
  std::vector<int> near_;
  std::vector<int> goal_nodes_;
};

}  // namespace

double path_length(const std::vector<Point2>& waypoints) {
  double total = 0.0;
  for (std::size_t i = 1; i < waypoints.size(); ++i) {
    total += dist(waypoints[i - 1], waypoints[i]);
  }
  return total;
}

bool segment_free(const gridmap::OccupancyGrid& grid, Point2 a, Point2 b,
                  double clearance, double step_size) {
  const double len = dist(a, b);
  const double spacing = step_size / 4.0;
  const int n = std::max(1, static_cast<int>(std::ceil(len / spacing)));
  for (int i = 0; i <= n; ++i) {
    const double s = static_cast<double>(i) / n;
    const double x = a.x + (b.x - a.x) * s;
    const double y = a.y + (b.y - a.y) * s;
    if (!grid.in_bounds(x, y) || grid.wall_distance(x, y) < clearance) return false;
  }
  return true;
}

PlanOutcome plan_detailed(const gridmap::OccupancyGrid& grid, Point2 start,
                          Point2 goal, const PlannerConfig& cfg) {
  PlannerCalls::record();
  if (!(cfg.time_limit > 0.0) || cfg.goal_bias < 0.0 || cfg.goal_bias > 1.0 ||
      cfg.clearance < 0.0 || !(cfg.step_size > 0.0)) {
    throw PreconditionError("invalid planner configuration");
  }
  check_endpoint(grid, start, cfg.clearance, "start");
  check_endpoint(grid, goal, cfg.clearance, "goal");
  if (dist(start, goal) == 0.0) {
    PlanOutcome out;
    out.path.waypoints = {start};
    out.path.cost = 0.0;
    out.tree_size = 1;
    return out;
  }
  return Rrtstar(grid, start, goal, cfg).run();
}

PositionPath plan(const gridmap::OccupancyGrid& grid, Point2 start, Point2 goal,
                  const PlannerConfig& cfg) {
  return plan_detailed(grid, start, goal, cfg).path;
}

std::uint64_t path_seed(std::uint64_t base, int index, int attempt) {
  return derive_seed(base, static_cast<std::uint64_t>(index),
                     static_cast<std::uint64_t>(attempt));
}

std::vector<PositionPath> plan_k(const gridmap::OccupancyGrid& grid, Point2 start,
                                 Point2 goal, const PlannerConfig& cfg, int k) {
  if (k < 1) throw PreconditionError("k must be positive");
  std::vector<PositionPath> paths;
  paths.reserve(static_cast<std::size_t>(k));
  for (int idx = 0; idx < k; ++idx) {
    for (int attempt = 0; attempt < kPlanRetries; ++attempt) {
      PlannerConfig c = cfg;
      c.rng_seed = path_seed(cfg.rng_seed, idx, attempt);
      try {
        paths.push_back(plan(grid, start, goal, c));
        break;
      } catch (const PlanningTimeout&) {
      }
    }
  }
  if (static_cast<int>(paths.size()) < k) throw PartialResult(std::move(paths), k);
  return paths;
}

PositionPath simplify(const PositionPath& path, const gridmap::OccupancyGrid& grid,
                      double clearance, double step_size) {
  const auto& w = path.waypoints;
  if (w.size() <= 2) return path;
  PositionPath out;
  out.waypoints.push_back(w.front());
  std::size_t i = 0;
  const std::size_t last = w.size() - 1;
  while (i < last) {
    std::size_t j = last;
    while (j > i + 1 && !segment_free(grid, w[i], w[j], clearance, step_size)) --j;
    out.waypoints.push_back(w[j]);
    i = j;
  }
  out.cost = path_length(out.waypoints);
  return out;
}

void write_csv(std::ostream& os, const PositionPath& path) {
  os << "idx,x,y\n";
  char buf[96];
  for (std::size_t i = 0; i < path.waypoints.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", i, path.waypoints[i].x,
                  path.waypoints[i].y);
    os << buf;
  }
  std::snprintf(buf, sizeof buf, "# cost=%.17g\n", path.cost);
  os << buf;
}

PositionPath densify(const PositionPath& path, double max_spacing) {
  if (!(max_spacing > 0.0)) throw PreconditionError("max_spacing must be positive");
  PositionPath out;
  out.cost = path.cost;
  if (path.waypoints.empty()) return out;
  out.waypoints.push_back(path.waypoints.front());
  for (std::size_t i = 1; i < path.waypoints.size(); ++i) {
    const Point2 a = path.waypoints[i - 1];
    const Point2 b = path.waypoints[i];
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    const int pieces = std::max(1, static_cast<int>(std::ceil(len / max_spacing - 1e-9)));
    for (int j = 1; j <= pieces; ++j) {
      const double u = static_cast<double>(j) / pieces;
      out.waypoints.push_back(j == pieces ? b : Point2{a.x + u * (b.x - a.x), a.y + u * (b.y - a.y)});
    }
  }
  return out;
}

}  // namespace goalrec::geoplanner
