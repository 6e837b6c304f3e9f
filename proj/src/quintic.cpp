#include "goalrec/quintic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "goalrec/error.hpp"

namespace goalrec::quintic {

std::array<double, 6> axis_coeffs(double p0, double v0, double a0, double p1,
                                  double v1, double a1, double td) {
  const double dp = p1 - p0;
  const double t2 = td * td;
  const double t3 = t2 * td;
  const double t4 = t3 * td;
  const double t5 = t4 * td;
  std::array<double, 6> c{};
  c[0] = p0;
  c[1] = v0;
  c[2] = a0 / 2.0;
  c[3] = (td * ((a1 - 3.0 * a0) * td - 8.0 * v1 - 12.0 * v0) + 20.0 * dp) /
         (2.0 * t3);
  c[4] = (td * (16.0 * v0 + 14.0 * v1 + (3.0 * a0 - 2.0 * a1) * td) - 30.0 * dp) /
         (2.0 * t4);
  c[5] = (td * ((a1 - a0) * td - 6.0 * (v1 + v0)) + 12.0 * dp) / (2.0 * t5);
  return c;
}

QuinticSegment segment_coeffs(const ViaPoint& from, const ViaPoint& to) {
  if (!(from.td > 0.0)) {
    throw DegenerateSegment("segment duration must be positive, got " +
                            std::to_string(from.td));
  }
  QuinticSegment seg;
  seg.cx = axis_coeffs(from.x, from.vx, from.ax, to.x, to.vx, to.ax, from.td);
  seg.cy = axis_coeffs(from.y, from.vy, from.ay, to.y, to.vy, to.ay, from.td);
  seg.duration = from.td;
  return seg;
}

namespace {

struct AxisState {
  double p, v, a;
};

AxisState horner(const std::array<double, 6>& c, double t) {
  const double p = ((((c[5] * t + c[4]) * t + c[3]) * t + c[2]) * t + c[1]) * t + c[0];
  const double v = (((5.0 * c[5] * t + 4.0 * c[4]) * t + 3.0 * c[3]) * t + 2.0 * c[2]) * t + c[1];
  const double a = ((20.0 * c[5] * t + 12.0 * c[4]) * t + 6.0 * c[3]) * t + 2.0 * c[2];
  return {p, v, a};
}

SegmentState eval_unchecked(const QuinticSegment& seg, double t) {
  const AxisState x = horner(seg.cx, t);
  const AxisState y = horner(seg.cy, t);
  return {x.p, y.p, x.v, y.v, x.a, y.a};
}

double speed_at(const QuinticSegment& seg, double t) {
  const AxisState x = horner(seg.cx, t);
  const AxisState y = horner(seg.cy, t);
  return std::hypot(x.v, y.v);
}

}  // namespace

SegmentState eval_segment(const QuinticSegment& seg, double t) {
  if (!(t >= 0.0 && t <= seg.duration)) {
    throw DomainError("t=" + std::to_string(t) + " outside [0, " +
                      std::to_string(seg.duration) + "]");
  }
  return eval_unchecked(seg, t);
}

std::vector<QuinticSegment> build_segments(std::span<const ViaPoint> via) {
  std::vector<QuinticSegment> segs;
  if (via.size() < 2) return segs;
  segs.reserve(via.size() - 1);
  for (std::size_t i = 0; i + 1 < via.size(); ++i) {
    segs.push_back(segment_coeffs(via[i], via[i + 1]));
  }
  return segs;
}

Trajectory synthesize(std::span<const ViaPoint> via, double dt) {
  if (!(dt > 0.0)) throw DomainError("dt must be positive");
  if (via.empty()) throw DegenerateSegment("empty via sequence");
  Trajectory traj;
  traj.dt = dt;
  const auto segs = build_segments(via);
  if (segs.empty()) {
    traj.samples.push_back({via[0].x, via[0].y, via[0].vx, via[0].vy, 0});
    return traj;
  }

  std::vector<double> start(segs.size() + 1, 0.0);
  for (std::size_t i = 0; i < segs.size(); ++i) start[i + 1] = start[i] + segs[i].duration;
  const double total = start.back();
  // Tolerance absorbs representation error in total / dt (2.0 / 0.1 etc).
  const long last = static_cast<long>(std::ceil(total / dt - 1e-9));

  traj.samples.reserve(static_cast<std::size_t>(last) + 1);
  std::size_t s = 0;
  for (long i = 0; i <= last; ++i) {
    const double t = std::min(static_cast<double>(i) * dt, total);
    while (s + 1 < segs.size() && t >= start[s + 1]) ++s;
    const double local = std::clamp(t - start[s], 0.0, segs[s].duration);
    SegmentState st;
    if (i == last) {
      const ViaPoint& end = via.back();
      st = {end.x, end.y, end.vx, end.vy, end.ax, end.ay};
    } else {
      st = eval_unchecked(segs[s], local);
    }
    traj.samples.push_back({st.x, st.y, st.vx, st.vy, i});
  }
  return traj;
}

double max_speed(const QuinticSegment& seg, double resolution) {
  if (!(resolution > 0.0)) resolution = seg.duration / 1000.0;
  if (!(resolution > 0.0)) return speed_at(seg, 0.0);
  const long n = static_cast<long>(std::floor(seg.duration / resolution));
  double best = speed_at(seg, seg.duration);
  for (long i = 0; i <= n; ++i) {
    best = std::max(best, speed_at(seg, std::min(i * resolution, seg.duration)));
  }
  return best;
}

double max_speed(const Trajectory& traj) {
  double best = 0.0;
  for (const auto& s : traj.samples) best = std::max(best, std::hypot(s.vx, s.vy));
  return best;
}

void write_csv(std::ostream& os, const Trajectory& traj) {
  os << "t,x,y,vx,vy\n";
  char buf[160];
  for (const auto& s : traj.samples) {
    std::snprintf(buf, sizeof buf, "%.6f,%.17g,%.17g,%.17g,%.17g\n",
                  static_cast<double>(s.t) * traj.dt, s.x, s.y, s.vx, s.vy);
    os << buf;
  }
}

}  // namespace goalrec::quintic
