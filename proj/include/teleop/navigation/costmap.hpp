#pragma once

#include <cstdint>
#include <vector>

#include "teleop/core/grid.hpp"
#include "teleop/mapping/occupancy_grid.hpp"

namespace teleop::nav {

inline constexpr std::uint8_t kFreeCost = 0;
inline constexpr std::uint8_t kUnknownCost = 128;
inline constexpr std::uint8_t kInscribedCost = 253;
inline constexpr std::uint8_t kLethalCost = 254;

struct InflationParams {
  double robot_radius = 0.11;
  double inflation_radius = 0.35;
  double decay = 10.0;  // 1/m
};

struct Costmap {
  GridGeometry geometry;
  std::vector<std::uint8_t> cost;  // row-major

  std::uint8_t at(GridIndex i) const { return cost[geometry.offset(i)]; }
  bool traversable(GridIndex i) const { return geometry.contains(i) && at(i) < kInscribedCost; }
  friend bool operator==(const Costmap&, const Costmap&) = default;
};

/// Cost for a cell at distance d (meters) from the nearest occupied cell.
std::uint8_t inflation_cost(double d, const InflationParams& p);

/// d is the exact Euclidean distance between cell centers to the nearest
/// occupied cell. Unknown cells cost at least kUnknownCost. Throws
/// std::invalid_argument if inflation_radius < robot_radius.
Costmap build_costmap(const mapping::OccupancyMsg& map, const InflationParams& params = {});

void to_json(json& j, const Costmap& c);

}  // namespace teleop::nav
