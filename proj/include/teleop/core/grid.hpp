#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "teleop/core/geometry.hpp"

namespace teleop {

/// Raised when a world point or index falls outside a grid. Distinct from
/// std::invalid_argument, which signals bad arithmetic inputs.
class OutOfBounds : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

struct GridIndex {
  int col = 0;
  int row = 0;
  friend bool operator==(const GridIndex&, const GridIndex&) = default;
  friend auto operator<=>(const GridIndex&, const GridIndex&) = default;
};

/// Lower-left origin, row-major storage, y increasing with row. The origin's
/// heading is ignored (maps are axis-aligned).
struct GridGeometry {
  double resolution = 0.05;
  int width = 0;
  int height = 0;
  Pose2D origin;

  std::size_t size() const { return static_cast<std::size_t>(width) * static_cast<std::size_t>(height); }
  bool contains(GridIndex i) const { return i.col >= 0 && i.row >= 0 && i.col < width && i.row < height; }
  std::size_t offset(GridIndex i) const {
    return static_cast<std::size_t>(i.row) * static_cast<std::size_t>(width) + static_cast<std::size_t>(i.col);
  }
  GridIndex index_of(std::size_t offset) const {
    return {static_cast<int>(offset % static_cast<std::size_t>(width)),
            static_cast<int>(offset / static_cast<std::size_t>(width))};
  }
  double extent_x() const { return width * resolution; }
  double extent_y() const { return height * resolution; }
  bool contains_point(Vec2 p) const {
    return p.x >= origin.x && p.y >= origin.y && p.x < origin.x + extent_x() && p.y < origin.y + extent_y();
  }

  /// Checked against width/height; throws OutOfBounds.
  GridIndex to_index(Vec2 p) const;
  Vec2 center(GridIndex i) const;

  friend bool operator==(const GridGeometry&, const GridGeometry&) = default;
};

/// col = floor((x - origin.x) / resolution), row likewise. Throws
/// std::invalid_argument for resolution <= 0 or non-finite input, and
/// OutOfBounds for a negative index.
GridIndex world_to_grid(Vec2 p, const Pose2D& origin, double resolution);

/// Center point of a cell; inverse of world_to_grid for cell centers.
Vec2 grid_to_world(GridIndex i, const Pose2D& origin, double resolution);

/// Cells crossed by the segment joining the centers of a and b, in order,
/// first = a and last = b. Consecutive cells share an edge, or a corner when
/// the segment passes exactly through a lattice corner.
std::vector<GridIndex> raster_line(GridIndex a, GridIndex b);

}  // namespace teleop
