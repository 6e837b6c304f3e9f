#include "goalrec/gridmap.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "goalrec/error.hpp"
#include "goalrec/rng.hpp"

namespace goalrec::gridmap {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (end == text.size()) break;
    pos = end + 1;
  }
  // Trailing blank lines carry no rows.
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

int parse_header_int(std::string_view line, std::string_view key,
                     std::size_t line_no) {
  line = trim(line);
  if (line.substr(0, key.size()) != key) {
    throw ParseError("expected '" + std::string(key) + " <n>'", line_no);
  }
  std::string rest(trim(line.substr(key.size())));
  if (rest.empty() ||
      !std::all_of(rest.begin(), rest.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    throw ParseError("expected positive integer after '" + std::string(key) + "'",
                     line_no);
  }
  long v = std::stol(rest);
  if (v <= 0 || v > (1 << 20)) {
    throw ParseError("dimension out of range", line_no);
  }
  return static_cast<int>(v);
}

bool glyph_passable(char g) { return g == '.' || g == 'G'; }

// 1-D squared-distance lower envelope (Felzenszwalb & Huttenlocher).
// f[q] is the squared distance carried from the previous pass; writes the
// minimizing index for every position into `arg`.
void lower_envelope(const std::vector<double>& f, std::vector<int>& arg) {
  const int n = static_cast<int>(f.size());
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<int> v(n);
  std::vector<double> z(n + 1);
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (f[q] == kInf) continue;
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -kInf;
      z[1] = kInf;
      continue;
    }
    double s;
    while (true) {
      const int p = v[k];
      s = ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * (q - p));
      if (s > z[k]) break;
      --k;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  if (k < 0) {
    std::fill(arg.begin(), arg.end(), -1);
    return;
  }
  int j = 0;
  for (int q = 0; q < n; ++q) {
    while (z[j + 1] < q) ++j;
    arg[q] = v[j];
  }
}

}  // namespace

OccupancyGrid::OccupancyGrid(int width, int height,
                             std::vector<std::uint8_t> passable)
    : width_(width), height_(height), cells_(std::move(passable)) {
  if (width <= 0 || height <= 0) {
    throw DimensionError("grid dimensions must be positive");
  }
  if (cells_.size() != static_cast<std::size_t>(width) * height) {
    throw DimensionError("cell count does not match width x height");
  }
  meters_per_cell_ = kWorldWidth / width;
  build_feature_transform();
}

void OccupancyGrid::build_feature_transform() {
  const int w = width_;
  const int h = height_;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  nearest_obstacle_.assign(cells_.size(), -1);

  // Column pass: nearest obstacle row within each column.
  std::vector<int> col_row(cells_.size(), -1);
  for (int c = 0; c < w; ++c) {
    int last = -1;
    for (int r = 0; r < h; ++r) {
      if (!passable(r, c)) last = r;
      col_row[r * w + c] = last;
    }
    last = -1;
    for (int r = h - 1; r >= 0; --r) {
      if (!passable(r, c)) last = r;
      int& cur = col_row[r * w + c];
      if (last >= 0 && (cur < 0 || last - r < r - cur)) cur = last;
    }
  }

  // Row pass: lower envelope over the column distances.
  std::vector<double> f(w);
  std::vector<int> arg(w);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const int rr = col_row[r * w + c];
      f[c] = rr < 0 ? kInf : double(r - rr) * (r - rr);
    }
    lower_envelope(f, arg);
    for (int c = 0; c < w; ++c) {
      const int q = arg[c];
      if (q >= 0) nearest_obstacle_[r * w + c] = col_row[r * w + q] * w + q;
    }
  }
}

std::size_t OccupancyGrid::obstacle_count() const {
  return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), 0));
}

bool OccupancyGrid::in_bounds(double x, double y) const {
  return x >= 0.0 && y >= 0.0 && x <= world_width() && y <= world_height();
}

bool OccupancyGrid::is_free(double x, double y) const {
  if (!in_bounds(x, y)) return false;
  const int c = std::min(static_cast<int>(x / meters_per_cell_), width_ - 1);
  const int r = std::min(static_cast<int>(y / meters_per_cell_), height_ - 1);
  return passable(r, c);
}

double OccupancyGrid::wall_distance(double x, double y) const {
  if (!in_bounds(x, y)) {
    throw BoundsError("query (" + std::to_string(x) + ", " + std::to_string(y) +
                      ") outside map");
  }
  const double hcell = meters_per_cell_;
  const int c = std::min(static_cast<int>(x / hcell), width_ - 1);
  const int r = std::min(static_cast<int>(y / hcell), height_ - 1);
  if (!passable(r, c)) return 0.0;

  const double best = std::min({x, world_width() - x, y, world_height() - y});
  double best2 = best * best;
  // The nearest obstacle center of any point in this cell is the feature of
  // this cell or one of its eight neighbours.
  for (int dr = -1; dr <= 1; ++dr) {
    const int rr = r + dr;
    if (rr < 0 || rr >= height_) continue;
    for (int dc = -1; dc <= 1; ++dc) {
      const int cc = c + dc;
      if (cc < 0 || cc >= width_) continue;
      const std::int32_t idx = nearest_obstacle_[rr * width_ + cc];
      if (idx < 0) continue;
      const double ox = (idx % width_ + 0.5) * hcell;
      const double oy = (idx / width_ + 0.5) * hcell;
      best2 = std::min(best2, (x - ox) * (x - ox) + (y - oy) * (y - oy));
    }
  }
  return std::min(best, std::sqrt(best2));
}

std::string OccupancyGrid::to_map_text() const {
  std::string out = "type octile\nheight " + std::to_string(height_) +
                    "\nwidth " + std::to_string(width_) + "\nmap\n";
  out.reserve(out.size() + cells_.size() + height_);
  for (int r = 0; r < height_; ++r) {
    for (int c = 0; c < width_; ++c) out.push_back(passable(r, c) ? '.' : '@');
    out.push_back('\n');
  }
  return out;
}

OccupancyGrid parse_map(std::string_view text) {
  const auto lines = split_lines(text);
  if (lines.size() < 4) {
    throw ParseError("truncated header", lines.size() + 1);
  }
  if (trim(lines[0]).substr(0, 4) != "type") {
    throw ParseError("expected 'type <name>'", 1);
  }
  const int height = parse_header_int(lines[1], "height", 2);
  const int width = parse_header_int(lines[2], "width", 3);
  if (trim(lines[3]) != "map") throw ParseError("expected 'map'", 4);

  const std::size_t rows = lines.size() - 4;
  if (rows != static_cast<std::size_t>(height)) {
    throw DimensionError("header declares height " + std::to_string(height) +
                         " but body has " + std::to_string(rows) + " rows");
  }
  std::vector<std::uint8_t> cells;
  cells.reserve(static_cast<std::size_t>(width) * height);
  for (int r = 0; r < height; ++r) {
    std::string_view row = lines[4 + r];
    if (row.size() != static_cast<std::size_t>(width)) {
      throw DimensionError("row " + std::to_string(r) + " (line " +
                           std::to_string(5 + r) + ") has " +
                           std::to_string(row.size()) + " glyphs, expected " +
                           std::to_string(width));
    }
    for (char g : row) cells.push_back(glyph_passable(g) ? 1 : 0);
  }
  return OccupancyGrid(width, height, std::move(cells));
}

OccupancyGrid load_map(const std::string& path) { return parse_map(read_file(path)); }

std::vector<ScenarioPoint> sample_scenario_points(const OccupancyGrid& grid,
                                                  int count,
                                                  std::uint64_t rng_seed) {
  if (count <= 0) throw InfeasibleScenario("count must be positive");
  Rng rng(rng_seed);
  // A partial set that cannot be extended after this many draws is discarded.
  constexpr int kRestartAfter = 2000;

  std::vector<ScenarioPoint> pts;
  int since_accept = 0;
  for (int attempt = 0; attempt < kMaxSamplingAttempts; ++attempt) {
    const double x = rng.uniform(0.0, grid.world_width());
    const double y = rng.uniform(0.0, grid.world_height());
    const double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
    bool ok = grid.wall_distance(x, y) >= kMinWallClearance;
    for (const auto& p : pts) {
      if (!ok) break;
      ok = std::hypot(p.x - x, p.y - y) >= kMinSeparation;
    }
    if (ok) {
      pts.push_back({x, y, theta});
      since_accept = 0;
      if (static_cast<int>(pts.size()) == count) return pts;
    } else if (++since_accept >= kRestartAfter) {
      pts.clear();
      since_accept = 0;
    }
  }
  throw InfeasibleScenario("could not place " + std::to_string(count) +
                           " points within " +
                           std::to_string(kMaxSamplingAttempts) + " attempts");
}

std::vector<ScenarioPoint> parse_scenario(std::string_view text) {
  std::vector<ScenarioPoint> pts;
  std::size_t line_no = 0;
  for (std::string_view line : split_lines(text)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    if (trim(line).empty()) continue;
    std::istringstream ss{std::string(line)};
    ScenarioPoint p;
    if (!(ss >> p.x >> p.y >> p.theta)) {
      throw ParseError("expected 'x y theta'", line_no);
    }
    std::string extra;
    if (ss >> extra) throw ParseError("trailing tokens", line_no);
    pts.push_back(p);
  }
  return pts;
}

std::vector<ScenarioPoint> load_scenario(const std::string& path) {
  return parse_scenario(read_file(path));
}

void write_scenario(std::ostream& os, const std::vector<ScenarioPoint>& pts) {
  os << "# x y theta\n";
  char buf[96];
  for (const auto& p : pts) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", p.x, p.y, p.theta);
    os << buf;
  }
}

}  // namespace goalrec::gridmap
