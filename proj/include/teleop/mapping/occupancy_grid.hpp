#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "teleop/core/grid.hpp"
#include "teleop/core/messages.hpp"

namespace teleop::mapping {

struct LogOddsParams {
  double l_occ = 0.85;
  double l_free = -0.4;
  double l_min = -4.0;
  double l_max = 4.0;
  friend bool operator==(const LogOddsParams&, const LogOddsParams&) = default;
};

/// Tri-state export of the map, as published on /map.
struct OccupancyMsg {
  static constexpr std::int8_t kUnknown = -1;
  static constexpr std::int8_t kFree = 0;
  static constexpr std::int8_t kOccupied = 100;

  GridGeometry geometry;
  std::vector<std::int8_t> cells;  // row-major

  std::int8_t at(GridIndex i) const { return cells[geometry.offset(i)]; }
  friend bool operator==(const OccupancyMsg&, const OccupancyMsg&) = default;
};

void to_json(json& j, const OccupancyMsg& m);
void from_json(const json& j, OccupancyMsg& m);

/// Log-odds occupancy grid. Every cell starts at 0 (unknown) and stays within
/// [l_min, l_max].
class OccupancyGrid {
 public:
  OccupancyGrid() = default;
  explicit OccupancyGrid(GridGeometry geometry, LogOddsParams params = {});

  const GridGeometry& geometry() const { return geometry_; }
  const LogOddsParams& params() const { return params_; }
  const std::vector<double>& logodds() const { return logodds_; }
  double logodds(GridIndex i) const { return logodds_[geometry_.offset(i)]; }
  void set_logodds(GridIndex i, double value);
  double probability(GridIndex i) const;

  /// Adds one scan taken from `pose`. Each ray with a return frees the cells
  /// on its raster line up to (not including) the hit cell and marks the hit
  /// cell occupied; no-return rays free cells out to range_max. Rays leaving
  /// the grid are truncated at the border. Within a single scan a cell takes
  /// at most one update, and an occupied mark wins over a free one.
  /// Throws OutOfBounds if the pose lies outside the grid.
  void integrate_scan(const Pose2D& pose, const LaserScan& scan);

  friend bool operator==(const OccupancyGrid&, const OccupancyGrid&) = default;

 private:
  GridGeometry geometry_;
  LogOddsParams params_;
  std::vector<double> logodds_;
};

/// Functional form: returns the updated copy.
OccupancyGrid integrate_scan(OccupancyGrid g, const Pose2D& pose, const LaserScan& scan);

/// probability > p_occ -> 100, < p_free -> 0, else -1. Throws
/// std::invalid_argument unless 0 < p_free < p_occ < 1.
OccupancyMsg classify(const OccupancyGrid& g, double p_occ_thresh = 0.65, double p_free_thresh = 0.25);

/// JSON map file: header plus row-major log-odds. Doubles are written in
/// shortest round-trip form, so load(save(g)) == g bit for bit.
void save_map(const OccupancyGrid& g, const std::filesystem::path& path);
/// Throws SchemaError on malformed, truncated, or mismatched files.
OccupancyGrid load_map(const std::filesystem::path& path);

json map_to_json(const OccupancyGrid& g);
OccupancyGrid map_from_json(const json& j);

}  // namespace teleop::mapping
