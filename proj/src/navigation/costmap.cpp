#include "teleop/navigation/costmap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace teleop::nav {

std::uint8_t inflation_cost(double d, const InflationParams& p) {
  if (d <= 0.0) return kLethalCost;
  if (d <= p.robot_radius) return kInscribedCost;
  if (d <= p.inflation_radius) {
    return static_cast<std::uint8_t>(std::lround(252.0 * std::exp(-p.decay * (d - p.robot_radius))));
  }
  return kFreeCost;
}

Costmap build_costmap(const mapping::OccupancyMsg& map, const InflationParams& params) {
  if (params.inflation_radius < params.robot_radius) {
    throw std::invalid_argument("build_costmap: inflation_radius must be >= robot_radius");
  }
  const auto& geo = map.geometry;
  Costmap out{geo, std::vector<std::uint8_t>(geo.size(), kFreeCost)};

  // Squared distance in cells to the nearest occupied cell, exact within the
  // inflation window; beyond it the cost is zero regardless of the value.
  const int reach = static_cast<int>(std::ceil(params.inflation_radius / geo.resolution));
  constexpr long kFar = std::numeric_limits<long>::max();
  std::vector<long> best(geo.size(), kFar);
  for (std::size_t off = 0; off < geo.size(); ++off) {
    if (map.cells[off] != mapping::OccupancyMsg::kOccupied) continue;
    const GridIndex c = geo.index_of(off);
    const int r0 = std::max(0, c.row - reach);
    const int r1 = std::min(geo.height - 1, c.row + reach);
    const int c0 = std::max(0, c.col - reach);
    const int c1 = std::min(geo.width - 1, c.col + reach);
    for (int r = r0; r <= r1; ++r) {
      for (int q = c0; q <= c1; ++q) {
        const long dr = r - c.row;
        const long dc = q - c.col;
        auto& slot = best[geo.offset({q, r})];
        slot = std::min(slot, dr * dr + dc * dc);
      }
    }
  }

  for (std::size_t off = 0; off < geo.size(); ++off) {
    std::uint8_t c = kFreeCost;
    if (best[off] != kFar) c = inflation_cost(std::sqrt(static_cast<double>(best[off])) * geo.resolution, params);
    if (map.cells[off] == mapping::OccupancyMsg::kUnknown) c = std::max(c, kUnknownCost);
    out.cost[off] = c;
  }
  return out;
}

void to_json(json& j, const Costmap& c) {
  j = json{{"resolution", c.geometry.resolution},
           {"width", c.geometry.width},
           {"height", c.geometry.height},
           {"origin", c.geometry.origin},
           {"cost", c.cost}};
}

}  // namespace teleop::nav
