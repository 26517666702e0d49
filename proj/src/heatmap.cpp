#include "socnav/heatmap.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <thread>

namespace socnav {

namespace {

void check_grid(const GridSpec& g) {
  if (!(g.resolution > 0.0)) throw ConfigError("grid resolution must be > 0", "grid");
  if (!(g.x_max > g.x_min) || !(g.y_max > g.y_min))
    throw ConfigError("grid needs x_max > x_min and y_max > y_min", "grid");
}

// ceil with a guard against quotients landing epsilon above an integer
int cell_count(double span, double resolution) {
  return std::max(1, static_cast<int>(std::ceil(span / resolution - 1e-9)));
}

}  // namespace

int grid_rows(const GridSpec& g) {
  check_grid(g);
  return cell_count(g.y_max - g.y_min, g.resolution);
}

int grid_cols(const GridSpec& g) {
  check_grid(g);
  return cell_count(g.x_max - g.x_min, g.resolution);
}

GridSpec grid_from_room(const Scenario& s, double resolution, double robot_theta) {
  validate_scenario(s);
  GridSpec g;
  g.resolution = resolution;
  g.robot_theta = robot_theta;
  g.x_min = g.x_max = s.walls.front().p1.x;
  g.y_min = g.y_max = s.walls.front().p1.y;
  for (const WallSegment& w : s.walls) {
    g.x_min = std::min({g.x_min, w.p1.x, w.p2.x});
    g.x_max = std::max({g.x_max, w.p1.x, w.p2.x});
    g.y_min = std::min({g.y_min, w.p1.y, w.p2.y});
    g.y_max = std::max({g.y_max, w.p1.y, w.p2.y});
  }
  check_grid(g);
  return g;
}

bool point_in_room(const Scenario& s, double x, double y) {
  // Ray cast along +x over the wall polygon.
  bool inside = false;
  for (const WallSegment& w : s.walls) {
    const double y1 = w.p1.y, y2 = w.p2.y;
    if ((y1 > y) == (y2 > y)) continue;
    const double x_cross = w.p1.x + (y - y1) / (y2 - y1) * (w.p2.x - w.p1.x);
    if (x < x_cross) inside = !inside;
  }
  return inside;
}

ScoreGrid sweep(const Model& m, const Scenario& base, const GridSpec& grid, bool mask_outside,
                int jobs) {
  check_grid(grid);
  if (jobs < 1) throw ConfigError("jobs must be >= 1", "jobs");
  validate_scenario(base);

  ScoreGrid out;
  out.grid = grid;
  out.rows = grid_rows(grid);
  out.cols = grid_cols(grid);
  out.scores.assign(static_cast<std::size_t>(out.rows) * static_cast<std::size_t>(out.cols), 0.0);

  auto eval_cell = [&](int row, int col) {
    const double x = out.cell_x(col);
    const double y = out.cell_y(row);
    const std::size_t slot =
        static_cast<std::size_t>(row) * static_cast<std::size_t>(out.cols) + static_cast<std::size_t>(col);
    if (mask_outside && !point_in_room(base, x, y)) {
      out.scores[slot] = -1.0;
      return;
    }
    Scenario s = base;
    s.robot = {x, y, normalize_angle(grid.robot_theta)};
    out.scores[slot] = score_graph(m, build_graph(s, m.spec.variant));
  };

  const int total = out.rows * out.cols;
  if (jobs == 1) {
    for (int i = 0; i < total; ++i) eval_cell(i / out.cols, i % out.cols);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    const int n_threads = std::min(jobs, total);
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) {
      pool.emplace_back([&] {
        for (int i = next.fetch_add(1); i < total; i = next.fetch_add(1))
          eval_cell(i / out.cols, i % out.cols);
      });
    }
    for (auto& th : pool) th.join();
  }
  return out;
}

std::string grid_csv(const ScoreGrid& g) {
  std::string out = "x,y,score\n";
  char buf[128];
  for (int r = 0; r < g.rows; ++r) {
    for (int c = 0; c < g.cols; ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", g.cell_x(c), g.cell_y(r), g.at(r, c));
      out += buf;
    }
  }
  return out;
}

std::string grid_pgm(const ScoreGrid& g) {
  char header[256];
  std::snprintf(header, sizeof(header),
                "P5\n# row0:y_max=%.17g x_min=%.17g resolution=%.17g theta=%.17g "
                "pixel=round(255*score) masked=0\n%d %d\n255\n",
                g.grid.y_max, g.grid.x_min, g.grid.resolution, g.grid.robot_theta, g.cols, g.rows);
  std::string out = header;
  out.reserve(out.size() + g.scores.size());
  for (double s : g.scores) {
    const double clamped = s < 0.0 ? 0.0 : s;
    out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * clamped))));
  }
  return out;
}

}  // namespace socnav
