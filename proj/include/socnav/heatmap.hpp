#pragma once

#include <string>
#include <vector>

#include "socnav/model.hpp"

namespace socnav {

// Spatial sweep window. The robot keeps one fixed orientation across the
// whole sweep; the default faces world +y.
struct GridSpec {
  double x_min = 0.0;
  double x_max = 0.0;
  double y_min = 0.0;
  double y_max = 0.0;
  double resolution = 0.1;  // meters per cell
  double robot_theta = 1.5707963267948966;
};

// Row-major scores in image convention: row 0 holds y = y_max - res/2, column
// 0 holds x = x_min + res/2. Scores are in [0, 1]; masked cells hold -1.
struct ScoreGrid {
  GridSpec grid;
  int rows = 0;
  int cols = 0;
  std::vector<double> scores;

  double at(int row, int col) const { return scores[static_cast<std::size_t>(row) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(col)]; }
  double cell_x(int col) const { return grid.x_min + (col + 0.5) * grid.resolution; }
  double cell_y(int row) const { return grid.y_max - (row + 0.5) * grid.resolution; }
};

int grid_rows(const GridSpec& g);
int grid_cols(const GridSpec& g);

// Default window: the room's bounding box.
GridSpec grid_from_room(const Scenario& s, double resolution, double robot_theta);

// Places the robot at every cell center with the fixed orientation,
// regraphizes and scores. Cells outside the room polygon are evaluated too
// unless mask_outside, which writes the -1 sentinel instead. Cell evaluations
// are independent; jobs > 1 splits them across threads without changing the
// result.
ScoreGrid sweep(const Model& m, const Scenario& base, const GridSpec& grid,
                bool mask_outside = false, int jobs = 1);

bool point_in_room(const Scenario& s, double x, double y);

// x,y,score rows; full double precision.
std::string grid_csv(const ScoreGrid& g);

// Binary 8-bit PGM, pixel = round(255 * score), masked cells 0. The header
// comment line documents the geometry.
std::string grid_pgm(const ScoreGrid& g);

}  // namespace socnav
