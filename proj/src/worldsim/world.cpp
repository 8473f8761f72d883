#include "teleop/worldsim/world.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>

#include "teleop/core/errors.hpp"

namespace teleop::sim {

Vec2 polygon_centroid(const std::vector<Vec2>& polygon) {
  if (polygon.empty()) return {};
  double area2 = 0.0;
  Vec2 acc;
  for (std::size_t i = 0; i < polygon.size(); ++i) {
    const Vec2 a = polygon[i];
    const Vec2 b = polygon[(i + 1) % polygon.size()];
    const double c = cross(a, b);
    area2 += c;
    acc = acc + (a + b) * c;
  }
  if (std::abs(area2) < 1e-15) {
    Vec2 mean;
    for (const auto& p : polygon) mean = mean + p;
    return mean * (1.0 / static_cast<double>(polygon.size()));
  }
  return acc * (1.0 / (3.0 * area2));
}

bool point_in_polygon(Vec2 p, const std::vector<Vec2>& polygon) {
  bool inside = false;
  for (std::size_t i = 0, j = polygon.size() - 1; i < polygon.size(); j = i++) {
    const Vec2 a = polygon[i];
    const Vec2 b = polygon[j];
    if ((a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x) inside = !inside;
  }
  return inside;
}

Obstacle Obstacle::make(std::vector<Vec2> polygon, std::vector<Vec2> waypoints, double speed, bool loop) {
  Obstacle o;
  o.polygon = polygon;
  o.base_polygon = std::move(polygon);
  o.waypoints = std::move(waypoints);
  o.speed = speed;
  o.loop = loop;
  o.start_centroid = polygon_centroid(o.base_polygon);
  return o;
}

double Obstacle::trajectory_length() const {
  double len = 0.0;
  Vec2 prev = start_centroid;
  for (const auto& w : waypoints) {
    len += distance(prev, w);
    prev = w;
  }
  if (loop) len += distance(prev, start_centroid);
  return len;
}

Vec2 Obstacle::centroid_at(double dist) const {
  if (waypoints.empty()) return start_centroid;
  const double total = trajectory_length();
  if (total <= 0.0) return start_centroid;
  if (loop) {
    dist = std::fmod(dist, total);
    if (dist < 0.0) dist += total;
  } else if (dist >= total) {
    return waypoints.back();
  }
  Vec2 prev = start_centroid;
  auto visit = [&](Vec2 next) -> std::optional<Vec2> {
    const double len = distance(prev, next);
    if (dist <= len && len > 0.0) return prev + (next - prev) * (dist / len);
    dist -= len;
    prev = next;
    return std::nullopt;
  };
  for (const auto& w : waypoints) {
    if (auto p = visit(w)) return *p;
  }
  if (loop) {
    if (auto p = visit(start_centroid)) return *p;
  }
  return prev;
}

std::vector<Segment> WorldModel::segments() const {
  std::vector<Segment> out = walls;
  for (const auto& o : obstacles) {
    for (std::size_t i = 0; i < o.polygon.size(); ++i) {
      out.push_back({o.polygon[i], o.polygon[(i + 1) % o.polygon.size()]});
    }
  }
  return out;
}

double WorldModel::clearance(Vec2 p) const {
  if (!bounds.contains(p)) return 0.0;
  double d = std::min({p.x - bounds.min_x, bounds.max_x - p.x, p.y - bounds.min_y, bounds.max_y - p.y});
  for (const auto& s : walls) d = std::min(d, distance_to_segment(p, s));
  for (const auto& o : obstacles) {
    if (o.polygon.size() >= 3 && point_in_polygon(p, o.polygon)) return 0.0;
    for (std::size_t i = 0; i < o.polygon.size(); ++i) {
      d = std::min(d, distance_to_segment(p, {o.polygon[i], o.polygon[(i + 1) % o.polygon.size()]}));
    }
  }
  return d;
}

void WorldModel::validate() const {
  if (!(robot_radius > 0.0)) throw SchemaError("world: robot_radius must be positive");
  if (!(bounds.max_x > bounds.min_x && bounds.max_y > bounds.min_y)) throw SchemaError("world: empty bounds");
  auto check = [&](Vec2 p, const char* what) {
    if (!bounds.contains(p)) {
      throw SchemaError(std::string("world: ") + what + " point (" + std::to_string(p.x) + ", " +
                        std::to_string(p.y) + ") outside bounds");
    }
  };
  for (const auto& s : walls) {
    check(s.a, "wall");
    check(s.b, "wall");
  }
  for (const auto& o : obstacles) {
    if (o.polygon.size() < 3) throw SchemaError("world: obstacle polygon needs at least 3 vertices");
    for (const auto& v : o.polygon) check(v, "obstacle");
    for (const auto& w : o.waypoints) check(w, "waypoint");
    if (o.speed < 0.0) throw SchemaError("world: obstacle speed must be non-negative");
  }
  check(robot_start.position(), "robot_start");
}

WorldModel advance_world(const WorldModel& w, double dt) {
  WorldModel next = w;
  for (auto& o : next.obstacles) {
    if (!o.is_dynamic()) continue;
    o.progress += o.speed * dt;
    if (o.loop) {
      const double total = o.trajectory_length();
      if (total > 0.0) o.progress = std::fmod(o.progress, total);
    }
    const Vec2 shift = o.centroid_at(o.progress) - o.start_centroid;
    for (std::size_t i = 0; i < o.polygon.size(); ++i) o.polygon[i] = o.base_polygon[i] + shift;
  }
  return next;
}

namespace {

std::vector<Vec2> points_from_json(const json& j, const char* field) {
  std::vector<Vec2> out;
  if (!j.is_array()) throw SchemaError(std::string("world: ") + field + " must be an array of points");
  for (const auto& p : j) out.push_back(p.get<Vec2>());
  return out;
}

}  // namespace

WorldModel world_from_json(const json& j) {
  try {
    if (j.value("schema", 0) != 1) throw SchemaError("world: unsupported or missing \"schema\" (expected 1)");
    WorldModel w;
    const auto& b = j.at("bounds");
    w.bounds = {b.at("min_x").get<double>(), b.at("min_y").get<double>(), b.at("max_x").get<double>(),
                b.at("max_y").get<double>()};
    for (const auto& s : j.value("walls", json::array())) {
      const auto pts = points_from_json(s, "wall");
      if (pts.size() != 2) throw SchemaError("world: wall must have exactly two endpoints");
      w.walls.push_back({pts[0], pts[1]});
    }
    for (const auto& o : j.value("obstacles", json::array())) {
      auto poly = points_from_json(o.at("polygon"), "polygon");
      std::vector<Vec2> wps;
      if (o.contains("waypoints")) wps = points_from_json(o.at("waypoints"), "waypoints");
      w.obstacles.push_back(Obstacle::make(std::move(poly), std::move(wps), o.value("speed", 0.0),
                                           o.value("loop", true)));
    }
    w.robot_start = j.at("robot_start").get<Pose2D>();
    w.robot_radius = j.value("robot_radius", 0.11);
    w.validate();
    return w;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("world: ") + e.what());
  }
}

json world_to_json(const WorldModel& w) {
  json walls = json::array();
  for (const auto& s : w.walls) walls.push_back(json::array({s.a, s.b}));
  json obstacles = json::array();
  for (const auto& o : w.obstacles) {
    json jo{{"polygon", o.base_polygon}};
    if (!o.waypoints.empty()) {
      jo["waypoints"] = o.waypoints;
      jo["speed"] = o.speed;
      jo["loop"] = o.loop;
    }
    obstacles.push_back(std::move(jo));
  }
  return json{{"schema", 1},
              {"bounds",
               {{"min_x", w.bounds.min_x}, {"min_y", w.bounds.min_y}, {"max_x", w.bounds.max_x},
                {"max_y", w.bounds.max_y}}},
              {"walls", walls},
              {"obstacles", obstacles},
              {"robot_start", w.robot_start},
              {"robot_radius", w.robot_radius}};
}

WorldModel load_world(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("world: cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw SchemaError("world: " + path.string() + ": " + e.what());
  }
  return world_from_json(j);
}

}  // namespace teleop::sim
