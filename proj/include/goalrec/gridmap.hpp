#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace goalrec::gridmap {

/// World extent (meters) of the grid's width. Height scales with aspect.
inline constexpr double kWorldWidth = 10.0;

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// Occupancy grid mapped onto a 10 m wide world. Cell (r, c) covers
/// [c*h, (c+1)*h] x [r*h, (r+1)*h] with h = meters_per_cell(); row 0 is the
/// first body row of the map file.
///
/// A precomputed Euclidean feature transform makes wall_distance O(1).
/// Immutable after construction.
class OccupancyGrid {
 public:
  /// `passable` is row-major, width*height entries.
  OccupancyGrid(int width, int height, std::vector<std::uint8_t> passable);

  int width() const { return width_; }
  int height() const { return height_; }
  double meters_per_cell() const { return meters_per_cell_; }
  double world_width() const { return width_ * meters_per_cell_; }
  double world_height() const { return height_ * meters_per_cell_; }

  bool passable(int row, int col) const {
    return cells_[static_cast<std::size_t>(row) * width_ + col] != 0;
  }
  const std::vector<std::uint8_t>& cells() const { return cells_; }
  std::size_t obstacle_count() const;

  bool in_bounds(double x, double y) const;
  /// Free = inside bounds and inside a passable cell.
  bool is_free(double x, double y) const;

  /// Distance in meters to the nearest obstacle-cell center or the map
  /// boundary, whichever is closer. Zero inside an obstacle cell.
  /// Throws BoundsError outside the map.
  double wall_distance(double x, double y) const;
  double wall_distance(Point2 p) const { return wall_distance(p.x, p.y); }

  /// Serializes back into the Moving-AI `.map` format (`.` / `@`).
  std::string to_map_text() const;

 private:
  void build_feature_transform();

  int width_;
  int height_;
  double meters_per_cell_;
  std::vector<std::uint8_t> cells_;
  // Index of the nearest obstacle cell for every cell (-1 when the grid has
  // no obstacles).
  std::vector<std::int32_t> nearest_obstacle_;
};

OccupancyGrid parse_map(std::string_view text);
OccupancyGrid load_map(const std::string& path);

struct ScenarioPoint {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  Point2 position() const { return {x, y}; }
};

inline constexpr double kMinWallClearance = 0.23;
inline constexpr double kMinSeparation = 2.0;
inline constexpr int kMaxSamplingAttempts = 100000;

/// Rejection-samples `count` points at least 0.23 m from any wall and 2 m
/// from each other. Throws InfeasibleScenario once the attempt cap is spent.
std::vector<ScenarioPoint> sample_scenario_points(const OccupancyGrid& grid,
                                                  int count,
                                                  std::uint64_t rng_seed);

/// Scenario files: `x y theta` per line, `#` starts a comment.
std::vector<ScenarioPoint> parse_scenario(std::string_view text);
std::vector<ScenarioPoint> load_scenario(const std::string& path);
void write_scenario(std::ostream& os, const std::vector<ScenarioPoint>& pts);

}  // namespace goalrec::gridmap
