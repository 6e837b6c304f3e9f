#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <vector>

namespace goalrec::quintic {

/// Via point: position, velocity, acceleration and the duration of the
/// segment that starts here (`td` is ignored on the last point).
struct ViaPoint {
  double x = 0.0, y = 0.0;
  double vx = 0.0, vy = 0.0;
  double ax = 0.0, ay = 0.0;
  double td = 0.0;
};

using ViaSequence = std::vector<ViaPoint>;

/// One fifth-degree segment on local time [0, duration].
/// Coefficients are stored lowest order first: x(t) = sum cx[i] t^i.
struct QuinticSegment {
  std::array<double, 6> cx{};
  std::array<double, 6> cy{};
  double duration = 0.0;
};

struct SegmentState {
  double x = 0.0, y = 0.0;
  double vx = 0.0, vy = 0.0;
  double ax = 0.0, ay = 0.0;
};

/// Sample of a trajectory. `t` is the discrete timestamp index; the time in
/// seconds is t * Trajectory::dt.
struct TimedState {
  double x = 0.0, y = 0.0;
  double vx = 0.0, vy = 0.0;
  long t = 0;
};

struct Trajectory {
  std::vector<TimedState> samples;
  double dt = 0.1;

  std::size_t size() const { return samples.size(); }
  double duration() const {
    return samples.empty() ? 0.0 : static_cast<double>(samples.back().t) * dt;
  }
};

inline constexpr double kStandardDt = 0.1;

/// Single-axis coefficients (lowest order first) for a quintic matching
/// position, velocity and acceleration at both ends of [0, td].
std::array<double, 6> axis_coeffs(double p0, double v0, double a0, double p1,
                                  double v1, double a1, double td);

/// Throws DegenerateSegment when from.td <= 0.
QuinticSegment segment_coeffs(const ViaPoint& from, const ViaPoint& to);

/// Throws DomainError when t is outside [0, duration].
SegmentState eval_segment(const QuinticSegment& seg, double t);

/// Samples the concatenated piecewise quintic every `dt` seconds. When the
/// total duration is not a multiple of dt one extra sample, clamped to the
/// final via point, closes the trajectory.
Trajectory synthesize(std::span<const ViaPoint> via, double dt = kStandardDt);

std::vector<QuinticSegment> build_segments(std::span<const ViaPoint> via);

/// Peak speed sampled every `resolution` seconds plus both endpoints.
/// A non-positive resolution selects duration / 1000.
double max_speed(const QuinticSegment& seg, double resolution = 0.0);
double max_speed(const Trajectory& traj);

/// CSV `t,x,y,vx,vy` with t in seconds.
void write_csv(std::ostream& os, const Trajectory& traj);

}  // namespace goalrec::quintic
