#include "goalrec/viaopt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>

#include "goalrec/rng.hpp"

namespace goalrec::viaopt {

using quintic::ViaPoint;
using quintic::ViaSequence;

namespace {

constexpr double kFeasibleSlack = 5e-4;  // relative to v_max
constexpr double kMaxWeight = 1e12;

// Peak speed of the segment via -> next, sampled every td/divisor plus the
// endpoint. Same sample set as quintic::max_speed.
double segment_peak(const ViaPoint& a, const ViaPoint& b, double divisor = 1000.0) {
  const auto seg = quintic::segment_coeffs(a, b);
  const auto& cx = seg.cx;
  const auto& cy = seg.cy;
  const double dx[5] = {cx[1], 2 * cx[2], 3 * cx[3], 4 * cx[4], 5 * cx[5]};
  const double dy[5] = {cy[1], 2 * cy[2], 3 * cy[3], 4 * cy[4], 5 * cy[5]};
  auto speed2 = [&](double t) {
    const double vx = (((dx[4] * t + dx[3]) * t + dx[2]) * t + dx[1]) * t + dx[0];
    const double vy = (((dy[4] * t + dy[3]) * t + dy[2]) * t + dy[1]) * t + dy[0];
    return vx * vx + vy * vy;
  };
  const double res = seg.duration / divisor;
  const long n = static_cast<long>(std::floor(seg.duration / res));
  double best = speed2(seg.duration);
  for (long i = 0; i <= n; ++i) best = std::max(best, speed2(std::min(i * res, seg.duration)));
  return std::sqrt(best);
}

double segment_penalty(const ViaPoint& a, const ViaPoint& b, double v_max) {
  const double over = std::max(0.0, segment_peak(a, b) - v_max);
  return over * over;
}

std::size_t segment_count(std::span<const ViaPoint> via) {
  return via.size() < 2 ? 0 : via.size() - 1;
}

// Coordinate layout: [td_0 .. td_{S-1}, vx_1, vy_1, .., vx_{q-2}, vy_{q-2}].
double& coord_ref(ViaSequence& via, std::size_t coord) {
  const std::size_t s = segment_count(via);
  if (coord < s) return via[coord].td;
  const std::size_t k = coord - s;
  ViaPoint& p = via[1 + k / 2];
  return (k % 2 == 0) ? p.vx : p.vy;
}

double coord_value(std::span<const ViaPoint> via, std::size_t coord) {
  const std::size_t s = segment_count(via);
  if (coord < s) return via[coord].td;
  const std::size_t k = coord - s;
  const ViaPoint& p = via[1 + k / 2];
  return (k % 2 == 0) ? p.vx : p.vy;
}

// Segments whose shape depends on a coordinate.
std::pair<std::size_t, std::size_t> affected(std::size_t segs, std::size_t coord) {
  if (coord < segs) return {coord, coord};
  const std::size_t point = 1 + (coord - segs) / 2;
  return {point - 1, point};
}

double apply_move(double value, double delta, bool is_duration) {
  const double v = value + delta;
  return is_duration ? std::max(kMinDuration, v) : v;
}

// Optimizer state with cached per-segment penalties.
class Search {
 public:
  Search(ViaSequence via, double v_max, double weight)
      : via_(std::move(via)), v_max_(v_max), weight_(weight) {
    segs_ = segment_count(via_);
    pen_.resize(segs_);
    refresh();
  }

  void set_weight(double w) { weight_ = w; }
  double weight() const { return weight_; }
  const ViaSequence& via() const { return via_; }
  std::size_t segments() const { return segs_; }
  std::size_t coords() const { return segs_ + 2 * (via_.size() - 2); }

  double cost() const {
    double td = 0.0;
    for (std::size_t j = 0; j < segs_; ++j) td += via_[j].td;
    double pen = 0.0;
    for (double p : pen_) pen += p;
    return td + weight_ * pen;
  }

  double violation() const {
    double v = 0.0;
    for (double p : pen_) v = std::max(v, std::sqrt(p));
    return v;
  }

  // Sets a coordinate, keeps it when the cost strictly drops.
  bool try_set(std::size_t coord, double value, double current_cost,
               double* new_cost) {
    double& ref = coord_ref(via_, coord);
    if (value == ref) return false;
    const double old = ref;
    const auto [lo, hi] = affected(segs_, coord);
    const double old_lo = pen_[lo];
    const double old_hi = pen_[hi];
    ref = value;
    pen_[lo] = segment_penalty(via_[lo], via_[lo + 1], v_max_);
    if (hi != lo) pen_[hi] = segment_penalty(via_[hi], via_[hi + 1], v_max_);
    const double c = cost();
    if (c < current_cost) {
      *new_cost = c;
      return true;
    }
    ref = old;
    pen_[lo] = old_lo;
    pen_[hi] = old_hi;
    return false;
  }

  // Uniform time scaling; velocities scale inversely so every speed
  // profile scales by 1 / lambda (accelerations are zero at via points).
  void time_scale(double lambda) {
    for (std::size_t j = 0; j < segs_; ++j) via_[j].td = std::max(kMinDuration, via_[j].td * lambda);
    for (std::size_t i = 1; i + 1 < via_.size(); ++i) {
      via_[i].vx /= lambda;
      via_[i].vy /= lambda;
    }
    refresh();
  }

  double peak() const {
    double p = 0.0;
    for (std::size_t j = 0; j < segs_; ++j) p = std::max(p, segment_peak(via_[j], via_[j + 1]));
    return p;
  }

  void replace(ViaSequence via) {
    via_ = std::move(via);
    refresh();
  }

 private:
  void refresh() {
    for (std::size_t j = 0; j < segs_; ++j) pen_[j] = segment_penalty(via_[j], via_[j + 1], v_max_);
  }

  ViaSequence via_;
  double v_max_;
  double weight_;
  std::size_t segs_ = 0;
  std::vector<double> pen_;
};

struct RunOutcome {
  ViaSequence via;
  double cost = 0.0;
  double weight = 0.0;
  double violation = 0.0;
  int iterations = 0;
  std::vector<TraceRow> trace;
};

RunOutcome run_search(ViaSequence start, const OptConfig& cfg) {
  Search s(std::move(start), cfg.v_max, cfg.penalty_weight);
  const std::size_t n = s.coords();
  const std::size_t segs = s.segments();
  RunOutcome out;
  int iter = 0;

  while (true) {
    // One penalty phase: adaptive coordinate descent, then an exact
    // tolerance-scale verification sweep.
    std::vector<double> step(n);
    for (std::size_t c = 0; c < n; ++c) step[c] = c < segs ? 0.1 : 0.1 * cfg.v_max;
    auto floor_step = [&](std::size_t c) {
      return perturbation_step(s.via(), c, cfg);
    };
    double cost = s.cost();
    out.trace.clear();
    out.trace.push_back({iter, cost, s.violation()});

    bool converged = false;
    while (iter < cfg.max_iters) {
      ++iter;
      bool all_small = true;
      for (std::size_t c = 0; c < n; ++c) {
        const bool is_td = c < segs;
        const double cur = coord_value(s.via(), c);
        const double delta = is_td ? step[c] * cur : step[c];
        double nc;
        if (s.try_set(c, apply_move(cur, -delta, is_td), cost, &nc) ||
            s.try_set(c, apply_move(cur, delta, is_td), cost, &nc)) {
          cost = nc;
          step[c] = std::min(step[c] * 2.0, is_td ? 0.5 : cfg.v_max);
        } else {
          step[c] *= 0.5;
        }
        const double absolute = is_td ? step[c] * coord_value(s.via(), c) : step[c];
        if (absolute >= floor_step(c)) all_small = false;
      }

      // Snap onto the speed bound by uniform time scaling.
      const double peak = s.peak();
      if (peak > 0.0) {
        const ViaSequence saved = s.via();
        s.time_scale(peak / cfg.v_max);
        const double nc = s.cost();
        if (nc < cost) {
          cost = nc;
        } else {
          s.replace(saved);
        }
      }
      out.trace.push_back({iter, cost, s.violation()});

      if (!all_small) continue;
      bool improved = false;
      for (std::size_t c = 0; c < n; ++c) {
        const bool is_td = c < segs;
        const double cur = coord_value(s.via(), c);
        const double delta = floor_step(c);
        double nc;
        if (s.try_set(c, apply_move(cur, -delta, is_td), cost, &nc) ||
            s.try_set(c, apply_move(cur, delta, is_td), cost, &nc)) {
          cost = nc;
          step[c] = 2.0 * (is_td ? cfg.tolerance : cfg.tolerance * cfg.v_max);
          improved = true;
        }
      }
      if (!improved) {
        converged = true;
        break;
      }
    }

    const double viol = s.violation();
    if (converged && viol > kFeasibleSlack * cfg.v_max && s.weight() * 100.0 <= kMaxWeight) {
      s.set_weight(s.weight() * 100.0);
      continue;
    }
    out.via = s.via();
    out.cost = cost;
    out.weight = s.weight();
    out.violation = viol;
    out.iterations = iter;
    return out;
  }
}

// Peak speed from a coarse grid refined by golden-section search around the
// best sample. Cheaper than segment_peak and never below it by more than
// the refinement error.
double refined_peak(const ViaPoint& a, const ViaPoint& b) {
  const auto seg = quintic::segment_coeffs(a, b);
  const auto& cx = seg.cx;
  const auto& cy = seg.cy;
  auto speed2 = [&](double t) {
    const double vx = (((5 * cx[5] * t + 4 * cx[4]) * t + 3 * cx[3]) * t + 2 * cx[2]) * t + cx[1];
    const double vy = (((5 * cy[5] * t + 4 * cy[4]) * t + 3 * cy[3]) * t + 2 * cy[2]) * t + cy[1];
    return vx * vx + vy * vy;
  };
  constexpr int kGrid = 48;
  const double h = seg.duration / kGrid;
  int arg = 0;
  double best = speed2(0.0);
  for (int i = 1; i <= kGrid; ++i) {
    const double v = speed2(i * h);
    if (v > best) {
      best = v;
      arg = i;
    }
  }
  double lo = std::max(0.0, (arg - 1) * h);
  double hi = std::min(seg.duration, (arg + 1) * h);
  constexpr double kInvPhi = 0.6180339887498949;
  double m1 = hi - kInvPhi * (hi - lo);
  double m2 = lo + kInvPhi * (hi - lo);
  double f1 = speed2(m1);
  double f2 = speed2(m2);
  for (int it = 0; it < 30; ++it) {
    if (f1 < f2) {
      lo = m1;
      m1 = m2;
      f1 = f2;
      m2 = lo + kInvPhi * (hi - lo);
      f2 = speed2(m2);
    } else {
      hi = m2;
      m2 = m1;
      f2 = f1;
      m1 = hi - kInvPhi * (hi - lo);
      f1 = speed2(m1);
    }
  }
  return std::sqrt(std::max({best, f1, f2}));
}

// Shortest duration for which the segment a -> b (velocities fixed) keeps
// its peak speed under v_max. Infinity when no duration found works.
double min_duration(ViaPoint a, const ViaPoint& b, double v_max) {
  if (std::hypot(a.vx, a.vy) > v_max || std::hypot(b.vx, b.vy) > v_max) {
    return std::numeric_limits<double>::infinity();
  }
  const double len = std::hypot(b.x - a.x, b.y - a.y);
  auto feasible = [&](double td) {
    a.td = td;
    return refined_peak(a, b) <= v_max;
  };
  double lo = std::max(kMinDuration, len / v_max);
  if (feasible(lo)) return lo;
  double hi = lo;
  for (int i = 0;; ++i) {
    if (i == 80) return std::numeric_limits<double>::infinity();
    lo = hi;
    hi *= 1.25;
    if (feasible(hi)) break;
  }
  for (int it = 0; it < 40 && hi - lo > 1e-10 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (feasible(mid) ? hi : lo) = mid;
  }
  return hi;
}

// Velocity-only descent: every segment takes its shortest feasible
// duration, so the search never leaves the feasible set.
ViaSequence velocity_search(ViaSequence via, const OptConfig& cfg) {
  const std::size_t segs = segment_count(via);
  std::vector<double> td(segs);
  for (std::size_t j = 0; j < segs; ++j) td[j] = min_duration(via[j], via[j + 1], cfg.v_max);
  auto total = [&] {
    double t = 0.0;
    for (double d : td) t += d;
    return t;
  };
  // Velocities that admit no duration: fall back to rest.
  if (!std::isfinite(total())) {
    for (std::size_t i = 1; i + 1 < via.size(); ++i) via[i].vx = via[i].vy = 0.0;
    for (std::size_t j = 0; j < segs; ++j) td[j] = min_duration(via[j], via[j + 1], cfg.v_max);
  }
  double cost = total();

  // Moves per interior point: vx, vy, and speed scaling.
  const std::size_t interior = via.size() - 2;
  std::vector<double> step(3 * interior, 0.2);
  auto try_move = [&](std::size_t i, int kind, double delta) {
    ViaPoint& p = via[i];
    const double ox = p.vx;
    const double oy = p.vy;
    if (kind == 0) p.vx += delta * cfg.v_max;
    if (kind == 1) p.vy += delta * cfg.v_max;
    if (kind == 2) {
      p.vx *= 1.0 + delta;
      p.vy *= 1.0 + delta;
    }
    const double a = min_duration(via[i - 1], via[i], cfg.v_max);
    const double b = min_duration(via[i], via[i + 1], cfg.v_max);
    const double nc = cost - td[i - 1] - td[i] + a + b;
    if (nc < cost - 1e-12) {
      td[i - 1] = a;
      td[i] = b;
      cost = nc;
      return true;
    }
    p.vx = ox;
    p.vy = oy;
    return false;
  };
  for (int sweep = 0; sweep < cfg.max_iters && interior > 0; ++sweep) {
    bool active = false;
    for (std::size_t i = 1; i + 1 < via.size(); ++i) {
      for (int kind = 0; kind < 3; ++kind) {
        double& st = step[3 * (i - 1) + static_cast<std::size_t>(kind)];
        if (st < cfg.tolerance) continue;
        active = true;
        if (try_move(i, kind, st) || try_move(i, kind, -st)) {
          st = std::min(2.0 * st, 0.5);
        } else {
          st *= 0.5;
        }
      }
    }
    if (!active) break;
  }
  for (std::size_t j = 0; j < segs; ++j) via[j].td = td[j];
  return via;
}

ViaSequence skeleton(const geoplanner::PositionPath& positions) {
  ViaSequence via(positions.waypoints.size());
  for (std::size_t i = 0; i < via.size(); ++i) {
    via[i].x = positions.waypoints[i].x;
    via[i].y = positions.waypoints[i].y;
  }
  return via;
}

double seg_len(const ViaSequence& via, std::size_t j) {
  return std::hypot(via[j + 1].x - via[j].x, via[j + 1].y - via[j].y);
}

void make_feasible(ViaSequence& via, double v_max) {
  Search s(via, v_max, 1.0);
  const double peak = s.peak();
  if (peak > v_max) {
    s.time_scale(peak / v_max * (1.0 + 1e-9));
    via = s.via();
  }
}

ViaSequence heuristic_seed(const ViaSequence& base, double v_max) {
  ViaSequence via = base;
  for (std::size_t j = 0; j + 1 < via.size(); ++j) {
    via[j].td = std::max(kMinDuration, seg_len(via, j) / (0.5 * v_max));
  }
  for (std::size_t i = 1; i + 1 < via.size(); ++i) {
    const double tx = via[i + 1].x - via[i - 1].x;
    const double ty = via[i + 1].y - via[i - 1].y;
    const double n = std::hypot(tx, ty);
    if (n > 0.0) {
      via[i].vx = 0.5 * v_max * tx / n;
      via[i].vy = 0.5 * v_max * ty / n;
    }
  }
  make_feasible(via, v_max);
  return via;
}

ViaSequence random_seed(const ViaSequence& base, double v_max, Rng& rng) {
  ViaSequence via = base;
  for (std::size_t j = 0; j + 1 < via.size(); ++j) {
    via[j].td = std::max(kMinDuration, seg_len(via, j) / v_max * rng.uniform(1.0, 4.0));
  }
  for (std::size_t i = 1; i + 1 < via.size(); ++i) {
    const double r = v_max * rng.uniform();
    const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
    via[i].vx = r * std::cos(phi);
    via[i].vy = r * std::sin(phi);
  }
  make_feasible(via, v_max);
  return via;
}

}  // namespace

double penalized_cost(std::span<const ViaPoint> via, double v_max,
                      double penalty_weight) {
  const std::size_t segs = segment_count(via);
  double td = 0.0;
  for (std::size_t j = 0; j < segs; ++j) td += via[j].td;
  double pen = 0.0;
  for (std::size_t j = 0; j < segs; ++j) pen += segment_penalty(via[j], via[j + 1], v_max);
  return td + penalty_weight * pen;
}

double speed_violation(std::span<const ViaPoint> via, double v_max,
                       double resolution_divisor) {
  double v = 0.0;
  for (std::size_t j = 0; j + 1 < via.size(); ++j) {
    v = std::max(v, segment_peak(via[j], via[j + 1], resolution_divisor) - v_max);
  }
  return v;
}

std::vector<double> decision_vector(std::span<const ViaPoint> via) {
  const std::size_t segs = segment_count(via);
  const std::size_t n = segs + (via.size() >= 2 ? 2 * (via.size() - 2) : 0);
  std::vector<double> x(n);
  for (std::size_t c = 0; c < n; ++c) x[c] = coord_value(via, c);
  return x;
}

void apply_decision_vector(ViaSequence& via, std::span<const double> x) {
  for (std::size_t c = 0; c < x.size(); ++c) coord_ref(via, c) = x[c];
}

double perturbation_step(std::span<const ViaPoint> via, std::size_t coord,
                         const OptConfig& cfg) {
  if (coord < segment_count(via)) return cfg.tolerance * via[coord].td;
  return cfg.tolerance * cfg.v_max;
}

OptResult optimize_detailed(const geoplanner::PositionPath& positions,
                            const OptConfig& cfg) {
  if (positions.waypoints.size() < 2) {
    throw PreconditionError("need at least two via point positions");
  }
  if (!(cfg.v_max > 0.0) || !(cfg.penalty_weight > 0.0)) {
    throw PreconditionError("v_max and penalty_weight must be positive");
  }
  const ViaSequence base = skeleton(positions);
  Rng rng(cfg.rng_seed);

  std::vector<ViaSequence> starts{heuristic_seed(base, cfg.v_max)};
  // With no interior points the only decision is the duration; random
  // restarts add nothing.
  if (base.size() > 2) {
    for (int r = 0; r < cfg.random_restarts; ++r) starts.push_back(random_seed(base, cfg.v_max, rng));
  }

  RunOutcome best;
  bool have = false;
  int total_iters = 0;
  for (auto& start : starts) {
    ViaSequence seeded = velocity_search(std::move(start), cfg);
    make_feasible(seeded, cfg.v_max);
    RunOutcome run = run_search(std::move(seeded), cfg);
    total_iters += run.iterations;
    const bool feasible = run.violation <= kFeasibleSlack * cfg.v_max;
    const bool best_feasible = have && best.violation <= kFeasibleSlack * cfg.v_max;
    bool take = !have;
    if (have) {
      if (feasible != best_feasible) {
        take = feasible;
      } else if (feasible) {
        take = run.cost < best.cost;
      } else {
        take = run.violation < best.violation;
      }
    }
    if (take) {
      best = std::move(run);
      have = true;
    }
  }

  if (best.violation > kFeasibleSlack * cfg.v_max) {
    throw InfeasibleDynamics(best.via, best.violation);
  }
  OptResult out;
  out.via = std::move(best.via);
  for (std::size_t j = 0; j + 1 < out.via.size(); ++j) out.duration += out.via[j].td;
  out.penalized_cost = best.cost;
  out.penalty_weight = best.weight;
  out.violation = best.violation;
  out.iterations = total_iters;
  out.trace = std::move(best.trace);
  return out;
}

ViaSequence optimize(const geoplanner::PositionPath& positions, const OptConfig& cfg) {
  return optimize_detailed(positions, cfg).via;
}

void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& trace) {
  os << "iter,cost,violation\n";
  char buf[96];
  for (const auto& r : trace) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", r.iter, r.cost, r.violation);
    os << buf;
  }
}

}  // namespace goalrec::viaopt
