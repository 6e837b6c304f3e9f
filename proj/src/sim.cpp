#include "goalrec/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace goalrec::sim {

double normalize_angle(double a) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  a = std::fmod(a, kTwoPi);
  if (a <= -std::numbers::pi) a += kTwoPi;
  if (a > std::numbers::pi) a -= kTwoPi;
  return a;
}

UnicycleState step(const UnicycleState& s, const ControlInput& u, double dt) {
  if (!(dt > 0.0)) throw PreconditionError("dt must be positive");
  UnicycleState n;
  n.x = s.x + u.alpha * std::cos(s.theta) * dt;
  n.y = s.y + u.alpha * std::sin(s.theta) * dt;
  n.theta = normalize_angle(s.theta + u.omega * dt);
  n.t = s.t + dt;
  return n;
}

std::vector<std::size_t> test_point_indices(std::size_t last_index) {
  std::vector<std::size_t> out;
  for (int i = 1; i <= kTestPoints; ++i) {
    out.push_back(static_cast<std::size_t>(
        std::llround(static_cast<double>(i) * static_cast<double>(last_index) / 7.0)));
  }
  return out;
}

std::vector<recognizer::Observation<quintic::TimedState>> ObservationStream::test_points() const {
  std::vector<recognizer::Observation<quintic::TimedState>> out;
  for (std::size_t idx : test_indices) {
    out.push_back({full.samples[idx], static_cast<long>(idx)});
  }
  return out;
}

namespace {

// Arc-length parametrized polyline.
class Polyline {
 public:
  explicit Polyline(const std::vector<gridmap::Point2>& pts) : pts_(pts) {
    arc_.push_back(0.0);
    for (std::size_t i = 1; i < pts_.size(); ++i) {
      arc_.push_back(arc_.back() + std::hypot(pts_[i].x - pts_[i - 1].x, pts_[i].y - pts_[i - 1].y));
    }
  }

  double length() const { return arc_.back(); }

  gridmap::Point2 at(double s) const {
    if (s <= 0.0) return pts_.front();
    if (s >= length()) return pts_.back();
    const auto it = std::upper_bound(arc_.begin(), arc_.end(), s);
    const std::size_t i = static_cast<std::size_t>(it - arc_.begin()) - 1;
    const double seg = arc_[i + 1] - arc_[i];
    const double u = seg > 0.0 ? (s - arc_[i]) / seg : 0.0;
    return {pts_[i].x + u * (pts_[i + 1].x - pts_[i].x), pts_[i].y + u * (pts_[i + 1].y - pts_[i].y)};
  }

  // Arc length of the closest point among those with arc in [lo, hi].
  double project(gridmap::Point2 p, double lo, double hi) const {
    double best_s = lo;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < pts_.size(); ++i) {
      if (arc_[i + 1] < lo || arc_[i] > hi) continue;
      const double dx = pts_[i + 1].x - pts_[i].x;
      const double dy = pts_[i + 1].y - pts_[i].y;
      const double len2 = dx * dx + dy * dy;
      double u = len2 > 0.0 ? ((p.x - pts_[i].x) * dx + (p.y - pts_[i].y) * dy) / len2 : 0.0;
      const double seg = arc_[i + 1] - arc_[i];
      double s = arc_[i] + std::clamp(u, 0.0, 1.0) * seg;
      s = std::clamp(s, lo, hi);
      const gridmap::Point2 q = at(s);
      const double d = std::hypot(p.x - q.x, p.y - q.y);
      if (d < best_d) {
        best_d = d;
        best_s = s;
      }
    }
    return best_s;
  }

 private:
  std::vector<gridmap::Point2> pts_;
  std::vector<double> arc_;
};

}  // namespace

ObservationStream follow_path(const gridmap::OccupancyGrid& grid,
                              const geoplanner::PositionPath& path, double theta0,
                              const ControllerConfig& cfg) {
  if (path.waypoints.empty()) throw PreconditionError("empty path");
  if (!(cfg.dt > 0.0) || !(cfg.v_max > 0.0) || !(cfg.omega_lim > 0.0)) {
    throw PreconditionError("controller limits must be positive");
  }
  const Polyline line(path.waypoints);
  const gridmap::Point2 goal = path.waypoints.back();
  const double budget =
      cfg.budget_factor * line.length() / cfg.v_max + 2.0 * std::numbers::pi / cfg.omega_lim;
  const long max_steps = static_cast<long>(std::ceil(budget / cfg.dt));

  ObservationStream stream;
  stream.full.dt = cfg.dt;
  UnicycleState s{path.waypoints.front().x, path.waypoints.front().y, normalize_angle(theta0), 0.0};
  double progress = 0.0;
  long n = 0;

  while (true) {
    const double to_goal = std::hypot(goal.x - s.x, goal.y - s.y);
    if (to_goal <= cfg.goal_tolerance) {
      stream.full.samples.push_back({s.x, s.y, 0.0, 0.0, n});
      break;
    }
    if (n >= max_steps) {
      throw ControllerTimeout("goal not reached within " + std::to_string(budget) + " s");
    }

    progress = std::max(progress, line.project({s.x, s.y}, progress, progress + 3.0 * cfg.lookahead));
    // Halve the lookahead until the straight line to the target is clear,
    // so corners are not cut through walls.
    gridmap::Point2 target = line.at(progress);
    for (double la = cfg.lookahead; la > 1e-3; la *= 0.5) {
      const gridmap::Point2 cand = to_goal < la ? goal : line.at(progress + la);
      if (geoplanner::segment_free(grid, {s.x, s.y}, cand, cfg.wall_lim, 0.2)) {
        target = cand;
        break;
      }
    }
    const double tx = target.x - s.x;
    const double ty = target.y - s.y;
    const double err = (tx * tx + ty * ty) > 1e-24 ? normalize_angle(std::atan2(ty, tx) - s.theta) : 0.0;

    ControlInput u;
    u.omega = std::clamp(err / cfg.dt, -cfg.omega_lim, cfg.omega_lim);
    u.alpha = std::min(cfg.v_max * std::max(0.0, std::cos(err)), to_goal / cfg.dt);

    // Shorten the stride until it keeps clearance; pivot if nothing fits.
    UnicycleState next = step(s, u, cfg.dt);
    for (int tries = 0; u.alpha > 0.0; ++tries) {
      if (grid.in_bounds(next.x, next.y) && grid.wall_distance(next.x, next.y) >= cfg.wall_lim) break;
      u.alpha = tries < 4 ? 0.5 * u.alpha : 0.0;
      next = step(s, u, cfg.dt);
    }

    stream.full.samples.push_back(
        {s.x, s.y, u.alpha * std::cos(s.theta), u.alpha * std::sin(s.theta), n});
    s = next;
    ++n;
  }

  stream.test_indices = test_point_indices(static_cast<std::size_t>(n));
  return stream;
}

void write_stream_csv(std::ostream& os, const ObservationStream& stream) {
  quintic::write_csv(os, stream.full);
  os << "# test_points=";
  for (std::size_t i = 0; i < stream.test_indices.size(); ++i) {
    if (i) os << ',';
    os << stream.test_indices[i];
  }
  os << '\n';
}

ObservationStream read_stream_csv(std::istream& is) {
  ObservationStream stream;
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line.rfind("# test_points=", 0) == 0) {
      std::stringstream ss(line.substr(14));
      std::string cell;
      while (std::getline(ss, cell, ',')) {
        try {
          stream.test_indices.push_back(std::stoul(cell));
        } catch (const std::logic_error&) {
          throw ParseError("bad test point index", line_no);
        }
      }
      continue;
    }
    if (line[0] == '#') continue;
    if (!header) {
      if (line != "t,x,y,vx,vy") throw ParseError("expected header t,x,y,vx,vy", line_no);
      header = true;
      continue;
    }
    double v[5];
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf", &v[0], &v[1], &v[2], &v[3], &v[4]) != 5) {
      throw ParseError("expected 5 numeric columns", line_no);
    }
    stream.full.samples.push_back(
        {v[1], v[2], v[3], v[4], static_cast<long>(stream.full.samples.size())});
    if (stream.full.samples.size() == 2) stream.full.dt = v[0] - stream.full.dt;
    if (stream.full.samples.size() == 1) stream.full.dt = v[0];
  }
  if (stream.full.samples.empty()) throw ParseError("stream has no samples", line_no);
  if (stream.full.samples.size() < 2) stream.full.dt = quintic::kStandardDt;
  if (stream.test_indices.empty()) {
    stream.test_indices = test_point_indices(stream.full.samples.size() - 1);
  }
  for (std::size_t idx : stream.test_indices) {
    if (idx >= stream.full.samples.size()) throw ParseError("test point index past the end", line_no);
  }
  return stream;
}

}  // namespace goalrec::sim
