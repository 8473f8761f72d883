#include "teleop/core/grid.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>

namespace teleop {

namespace {

long checked_floor(double value) {
  const double f = std::floor(value);
  if (!std::isfinite(f) || f > static_cast<double>(std::numeric_limits<int>::max()) ||
      f < static_cast<double>(std::numeric_limits<int>::min())) {
    throw std::invalid_argument("world_to_grid: coordinate not representable as a cell index");
  }
  return static_cast<long>(f);
}

}  // namespace

GridIndex world_to_grid(Vec2 p, const Pose2D& origin, double resolution) {
  if (!(resolution > 0.0) || !std::isfinite(resolution)) {
    throw std::invalid_argument("world_to_grid: resolution must be positive");
  }
  if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw std::invalid_argument("world_to_grid: non-finite point");
  const long col = checked_floor((p.x - origin.x) / resolution);
  const long row = checked_floor((p.y - origin.y) / resolution);
  if (col < 0 || row < 0) {
    throw OutOfBounds("world_to_grid: point (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                      ") lies below the grid origin");
  }
  return {static_cast<int>(col), static_cast<int>(row)};
}

Vec2 grid_to_world(GridIndex i, const Pose2D& origin, double resolution) {
  return {origin.x + (i.col + 0.5) * resolution, origin.y + (i.row + 0.5) * resolution};
}

GridIndex GridGeometry::to_index(Vec2 p) const {
  const GridIndex i = world_to_grid(p, origin, resolution);
  if (!contains(i)) {
    throw OutOfBounds("grid index (" + std::to_string(i.col) + ", " + std::to_string(i.row) + ") outside " +
                      std::to_string(width) + "x" + std::to_string(height) + " grid");
  }
  return i;
}

Vec2 GridGeometry::center(GridIndex i) const { return grid_to_world(i, origin, resolution); }

std::vector<GridIndex> raster_line(GridIndex a, GridIndex b) {
  // Walks the segment between cell centers. The k-th vertical grid line is
  // crossed at t = (2k-1) / (2 dx), the k-th horizontal one at (2k-1) / (2 dy);
  // comparing the cross-multiplied numerators keeps the decision exact.
  const long dx = std::labs(static_cast<long>(b.col) - a.col);
  const long dy = std::labs(static_cast<long>(b.row) - a.row);
  const int sx = b.col >= a.col ? 1 : -1;
  const int sy = b.row >= a.row ? 1 : -1;

  std::vector<GridIndex> cells;
  cells.reserve(static_cast<std::size_t>(dx + dy + 1));
  GridIndex cur = a;
  cells.push_back(cur);
  long ix = 0;
  long iy = 0;
  while (ix < dx || iy < dy) {
    const long x_key = (2 * (ix + 1) - 1) * dy;  // compared against (2(iy+1)-1) * dx
    const long y_key = (2 * (iy + 1) - 1) * dx;
    if (iy >= dy || (ix < dx && x_key < y_key)) {
      cur.col += sx;
      ++ix;
    } else if (ix >= dx || y_key < x_key) {
      cur.row += sy;
      ++iy;
    } else {
      cur.col += sx;
      cur.row += sy;
      ++ix;
      ++iy;
    }
    cells.push_back(cur);
  }
  return cells;
}

}  // namespace teleop
