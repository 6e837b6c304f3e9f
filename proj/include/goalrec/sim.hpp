#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "goalrec/error.hpp"
#include "goalrec/geoplanner.hpp"
#include "goalrec/gridmap.hpp"
#include "goalrec/quintic.hpp"
#include "goalrec/recognizer.hpp"

namespace goalrec::sim {

inline constexpr double kOmegaLimit = 3.0;     // rad/s
inline constexpr double kGoalTolerance = 0.05;  // m
inline constexpr int kTestPoints = 6;

struct UnicycleState {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;  // (-pi, pi]
  double t = 0.0;
};

struct ControlInput {
  double alpha = 0.0;  // forward speed, m/s
  double omega = 0.0;  // turn rate, rad/s
};

/// Wraps an angle into (-pi, pi].
double normalize_angle(double a);

/// Forward Euler over dt. Position advances along the pre-step heading.
UnicycleState step(const UnicycleState& s, const ControlInput& u, double dt);

struct ControllerConfig {
  double v_max = 1.0;
  double omega_lim = kOmegaLimit;
  double dt = quintic::kStandardDt;
  double goal_tolerance = kGoalTolerance;
  double lookahead = 0.3;   // m along the path
  double wall_lim = 0.01;   // m
  double budget_factor = 10.0;
};

struct ObservationStream {
  quintic::Trajectory full;
  std::vector<std::size_t> test_indices;  // sample indices of o_1..o_6

  double tf() const { return full.duration(); }
  std::vector<recognizer::Observation<quintic::TimedState>> test_points() const;
};

/// round(i * last / 7) for i = 1..6; a zero-length stream puts all six at 0.
std::vector<std::size_t> test_point_indices(std::size_t last_index);

/// Pure-pursuit tracking of `path` from the pose (path head, theta0).
/// Forward speed is capped by v_max and by the remaining goal distance, a
/// step that would break wall_lim becomes a pivot in place. Throws
/// ControllerTimeout once the time budget
/// (budget_factor * length / v_max + 2*pi / omega_lim) is spent.
ObservationStream follow_path(const gridmap::OccupancyGrid& grid,
                              const geoplanner::PositionPath& path, double theta0,
                              const ControllerConfig& cfg = {});

/// Trajectory CSV followed by `# test_points=i1,...,i6`.
void write_stream_csv(std::ostream& os, const ObservationStream& stream);
/// Inverse of write_stream_csv. Throws ParseError with the offending line.
ObservationStream read_stream_csv(std::istream& is);

}  // namespace goalrec::sim
