#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "goalrec/error.hpp"
#include "goalrec/geoplanner.hpp"
#include "goalrec/quintic.hpp"

namespace goalrec::viaopt {

/// Velocity/acceleration carried by a via point.
struct OptState {
  double vx = 0.0, vy = 0.0, ax = 0.0, ay = 0.0;
};

/// Parameters chosen for one segment: the next point's state and the
/// segment duration.
struct OptAction {
  double vx_next = 0.0, vy_next = 0.0, ax_next = 0.0, ay_next = 0.0;
  double td = 0.0;
};

inline constexpr double kMinDuration = 1e-3;

struct OptConfig {
  double v_max = 1.0;
  double penalty_weight = 1e6;
  int max_iters = 5000;
  double tolerance = 1e-4;
  std::uint64_t rng_seed = 0;
  /// Random initial action sets tried besides the heuristic seed.
  int random_restarts = 2;
};

struct TraceRow {
  int iter = 0;
  double cost = 0.0;
  double violation = 0.0;
};

struct OptResult {
  quintic::ViaSequence via;
  double duration = 0.0;        // sum of td
  double penalized_cost = 0.0;  // under `penalty_weight`
  double penalty_weight = 0.0;  // weight of the final phase
  double violation = 0.0;       // max over segments of (peak speed - v_max)+
  int iterations = 0;
  std::vector<TraceRow> trace;  // final phase only; cost is non-increasing
};

/// Thrown when no candidate within the speed bound was found.
class InfeasibleDynamics : public Error {
 public:
  InfeasibleDynamics(quintic::ViaSequence best, double violation)
      : Error("no feasible via parameters; best violation " +
              std::to_string(violation) + " m/s"),
        best_(std::move(best)),
        violation_(violation) {}
  const quintic::ViaSequence& best() const { return best_; }
  double violation() const { return violation_; }

 private:
  quintic::ViaSequence best_;
  double violation_;
};

/// sum td + weight * sum over segments of max(0, peak_speed - v_max)^2.
double penalized_cost(std::span<const quintic::ViaPoint> via, double v_max,
                      double penalty_weight);
inline double penalized_cost(std::span<const quintic::ViaPoint> via,
                             const OptConfig& cfg) {
  return penalized_cost(via, cfg.v_max, cfg.penalty_weight);
}

/// Largest (peak_speed - v_max)+ over all segments.
double speed_violation(std::span<const quintic::ViaPoint> via, double v_max,
                       double resolution_divisor = 1000.0);

/// Fills velocities and durations for the given positions, minimizing total
/// duration under the speed bound. Boundary points are at rest and all
/// accelerations are zero.
quintic::ViaSequence optimize(const geoplanner::PositionPath& positions,
                              const OptConfig& cfg);
OptResult optimize_detailed(const geoplanner::PositionPath& positions,
                            const OptConfig& cfg);

/// Decision-vector view used by the optimizer: segment durations followed by
/// (vx, vy) for each interior point.
std::vector<double> decision_vector(std::span<const quintic::ViaPoint> via);
void apply_decision_vector(quintic::ViaSequence& via, std::span<const double> x);

/// Per-coordinate perturbation used for the final local-minimum check:
/// durations move by a relative `tolerance`, velocities by tolerance * v_max.
double perturbation_step(std::span<const quintic::ViaPoint> via, std::size_t coord,
                         const OptConfig& cfg);

void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& trace);

}  // namespace goalrec::viaopt
