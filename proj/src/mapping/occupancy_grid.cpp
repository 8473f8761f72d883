#include "teleop/mapping/occupancy_grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "teleop/core/errors.hpp"

namespace teleop::mapping {

namespace {

constexpr std::uint8_t kMarkFree = 1;
constexpr std::uint8_t kMarkOccupied = 2;

// Clips the segment from `a` (inside the box) toward `b` to the grid extent.
// Returns the fraction of the segment kept.
double clip_fraction(const GridGeometry& g, Vec2 a, Vec2 b) {
  const double x0 = g.origin.x;
  const double y0 = g.origin.y;
  const double x1 = x0 + g.extent_x();
  const double y1 = y0 + g.extent_y();
  double t_max = 1.0;
  const Vec2 d = b - a;
  auto limit = [&](double delta, double lo, double hi, double start) {
    if (delta > 0.0) t_max = std::min(t_max, (hi - start) / delta);
    if (delta < 0.0) t_max = std::min(t_max, (lo - start) / delta);
  };
  limit(d.x, x0, x1, a.x);
  limit(d.y, y0, y1, a.y);
  return std::max(0.0, t_max);
}

GridIndex clamped_index(const GridGeometry& g, Vec2 p) {
  const double fc = std::floor((p.x - g.origin.x) / g.resolution);
  const double fr = std::floor((p.y - g.origin.y) / g.resolution);
  return {static_cast<int>(std::clamp(fc, 0.0, static_cast<double>(g.width - 1))),
          static_cast<int>(std::clamp(fr, 0.0, static_cast<double>(g.height - 1)))};
}

}  // namespace

void to_json(json& j, const OccupancyMsg& m) {
  j = json{{"resolution", m.geometry.resolution},
           {"width", m.geometry.width},
           {"height", m.geometry.height},
           {"origin", m.geometry.origin},
           {"cells", m.cells}};
}

void from_json(const json& j, OccupancyMsg& m) {
  m.geometry.resolution = j.at("resolution").get<double>();
  m.geometry.width = j.at("width").get<int>();
  m.geometry.height = j.at("height").get<int>();
  m.geometry.origin = j.at("origin").get<Pose2D>();
  m.cells = j.at("cells").get<std::vector<std::int8_t>>();
  if (m.cells.size() != m.geometry.size()) throw std::invalid_argument("OccupancyMsg: cell count mismatch");
}

OccupancyGrid::OccupancyGrid(GridGeometry geometry, LogOddsParams params)
    : geometry_(geometry), params_(params), logodds_(geometry.size(), 0.0) {
  if (!(geometry.resolution > 0.0) || geometry.width <= 0 || geometry.height <= 0) {
    throw std::invalid_argument("OccupancyGrid: empty geometry");
  }
}

void OccupancyGrid::set_logodds(GridIndex i, double value) {
  logodds_[geometry_.offset(i)] = std::clamp(value, params_.l_min, params_.l_max);
}

double OccupancyGrid::probability(GridIndex i) const { return 1.0 / (1.0 + std::exp(-logodds(i))); }

void OccupancyGrid::integrate_scan(const Pose2D& pose, const LaserScan& scan) {
  const GridIndex robot_cell = geometry_.to_index(pose.position());
  const Vec2 origin = pose.position();

  std::vector<std::uint8_t> marks(logodds_.size(), 0);
  std::vector<std::size_t> touched;
  auto mark = [&](GridIndex c, std::uint8_t m) {
    const std::size_t off = geometry_.offset(c);
    if (marks[off] == 0) touched.push_back(off);
    marks[off] = std::max(marks[off], m);
  };

  for (std::size_t i = 0; i < scan.ranges.size(); ++i) {
    const bool hit = scan.has_return(i);
    if (!hit && scan.ranges[i] < scan.range_min) continue;  // too close to tell
    const double r = hit ? scan.ranges[i] : scan.range_max;
    const double bearing = pose.theta + scan.bearing(i);
    const Vec2 end = origin + Vec2{std::cos(bearing), std::sin(bearing)} * r;

    const bool end_inside = geometry_.contains_point(end);
    const Vec2 clipped = end_inside ? end : origin + (end - origin) * clip_fraction(geometry_, origin, end);
    const GridIndex end_cell = clamped_index(geometry_, clipped);
    const auto cells = raster_line(robot_cell, end_cell);
    const bool mark_endpoint_occupied = hit && end_inside;
    for (std::size_t k = 0; k < cells.size(); ++k) {
      const bool last = k + 1 == cells.size();
      if (last && mark_endpoint_occupied) {
        mark(cells[k], kMarkOccupied);
      } else {
        mark(cells[k], kMarkFree);
      }
    }
  }

  for (const std::size_t off : touched) {
    const double delta = marks[off] == kMarkOccupied ? params_.l_occ : params_.l_free;
    logodds_[off] = std::clamp(logodds_[off] + delta, params_.l_min, params_.l_max);
  }
}

OccupancyGrid integrate_scan(OccupancyGrid g, const Pose2D& pose, const LaserScan& scan) {
  g.integrate_scan(pose, scan);
  return g;
}

OccupancyMsg classify(const OccupancyGrid& g, double p_occ_thresh, double p_free_thresh) {
  if (!(0.0 < p_free_thresh && p_free_thresh < p_occ_thresh && p_occ_thresh < 1.0)) {
    throw std::invalid_argument("classify: thresholds must satisfy 0 < p_free < p_occ < 1");
  }
  // Compare in log-odds space; equivalent to thresholding the logistic.
  const double l_occ = std::log(p_occ_thresh / (1.0 - p_occ_thresh));
  const double l_free = std::log(p_free_thresh / (1.0 - p_free_thresh));
  OccupancyMsg msg{g.geometry(), std::vector<std::int8_t>(g.logodds().size(), OccupancyMsg::kUnknown)};
  for (std::size_t i = 0; i < msg.cells.size(); ++i) {
    const double l = g.logodds()[i];
    if (l > l_occ) {
      msg.cells[i] = OccupancyMsg::kOccupied;
    } else if (l < l_free) {
      msg.cells[i] = OccupancyMsg::kFree;
    }
  }
  return msg;
}

json map_to_json(const OccupancyGrid& g) {
  const auto& geo = g.geometry();
  const auto& p = g.params();
  return json{{"schema", 1},
              {"kind", "occupancy_grid"},
              {"resolution", geo.resolution},
              {"width", geo.width},
              {"height", geo.height},
              {"origin", geo.origin},
              {"params", {{"l_occ", p.l_occ}, {"l_free", p.l_free}, {"l_min", p.l_min}, {"l_max", p.l_max}}},
              {"logodds", g.logodds()}};
}

OccupancyGrid map_from_json(const json& j) {
  try {
    if (j.value("schema", 0) != 1) throw SchemaError("map: unsupported or missing \"schema\" (expected 1)");
    if (j.value("kind", std::string{}) != "occupancy_grid") throw SchemaError("map: \"kind\" is not occupancy_grid");
    GridGeometry geo{j.at("resolution").get<double>(), j.at("width").get<int>(), j.at("height").get<int>(),
                     j.at("origin").get<Pose2D>()};
    if (!(geo.resolution > 0.0) || geo.width <= 0 || geo.height <= 0) throw SchemaError("map: empty geometry");
    LogOddsParams params;
    if (j.contains("params")) {
      const auto& jp = j.at("params");
      params = {jp.at("l_occ").get<double>(), jp.at("l_free").get<double>(), jp.at("l_min").get<double>(),
                jp.at("l_max").get<double>()};
    }
    const auto& cells = j.at("logodds");
    if (!cells.is_array() || cells.size() != geo.size()) {
      throw SchemaError("map: expected " + std::to_string(geo.size()) + " log-odds values, found " +
                        std::to_string(cells.is_array() ? cells.size() : 0));
    }
    OccupancyGrid g(geo, params);
    for (std::size_t i = 0; i < geo.size(); ++i) {
      const double v = cells[i].get<double>();
      if (!std::isfinite(v) || v < params.l_min || v > params.l_max) {
        throw SchemaError("map: log-odds value out of range at cell " + std::to_string(i));
      }
      g.set_logodds(geo.index_of(i), v);
    }
    return g;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("map: ") + e.what());
  }
}

void save_map(const OccupancyGrid& g, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("save_map: cannot open " + path.string());
  out << map_to_json(g).dump() << '\n';
  if (!out) throw std::runtime_error("save_map: write failed for " + path.string());
}

OccupancyGrid load_map(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("map: cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  json j;
  try {
    j = json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw SchemaError("map: " + path.string() + " is not valid JSON (" + e.what() + ")");
  }
  return map_from_json(j);
}

}  // namespace teleop::mapping
