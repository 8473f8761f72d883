#pragma once

#include <filesystem>
#include <vector>

#include "teleop/core/geometry.hpp"
#include "teleop/core/messages.hpp"

namespace teleop::sim {

struct Bounds {
  double min_x = 0.0;
  double min_y = 0.0;
  double max_x = 0.0;
  double max_y = 0.0;

  bool contains(Vec2 p) const { return p.x >= min_x && p.x <= max_x && p.y >= min_y && p.y <= max_y; }
  double width() const { return max_x - min_x; }
  double height() const { return max_y - min_y; }
};

/// Convex polygon, optionally moving along a scripted centroid trajectory.
/// The trajectory starts at the polygon's initial centroid and visits each
/// waypoint in turn at `speed`; when `loop` is set it returns to the start
/// and repeats, otherwise it parks at the last waypoint.
struct Obstacle {
  std::vector<Vec2> polygon;  // current placement
  std::vector<Vec2> waypoints;
  double speed = 0.0;
  bool loop = true;

  // Derived at construction.
  std::vector<Vec2> base_polygon;
  Vec2 start_centroid;
  double progress = 0.0;  // meters along the trajectory

  bool is_dynamic() const { return !waypoints.empty() && speed > 0.0; }
  double trajectory_length() const;
  /// Centroid position after `distance` meters along the trajectory.
  Vec2 centroid_at(double distance) const;

  static Obstacle make(std::vector<Vec2> polygon, std::vector<Vec2> waypoints = {}, double speed = 0.0,
                       bool loop = true);
};

/// Area-weighted centroid of a simple polygon.
Vec2 polygon_centroid(const std::vector<Vec2>& polygon);
bool point_in_polygon(Vec2 p, const std::vector<Vec2>& polygon);

struct WorldModel {
  Bounds bounds;
  std::vector<Segment> walls;
  std::vector<Obstacle> obstacles;
  Pose2D robot_start;
  double robot_radius = 0.11;

  /// Walls plus every obstacle edge at its current placement.
  std::vector<Segment> segments() const;

  /// Distance from p to the nearest wall, obstacle edge, or bounds edge;
  /// zero when p lies inside an obstacle or outside the bounds.
  double clearance(Vec2 p) const;

  /// Throws SchemaError when geometry leaves the bounds or robot_radius <= 0.
  void validate() const;
};

/// Moves dynamic obstacles along their scripts. Static geometry is untouched.
WorldModel advance_world(const WorldModel& w, double dt);

/// World file: {"schema": 1, "bounds": {...}, "walls": [...], "obstacles": [...],
/// "robot_start": {...}, "robot_radius": r}. See README for the full schema.
WorldModel world_from_json(const json& j);
json world_to_json(const WorldModel& w);
WorldModel load_world(const std::filesystem::path& path);

}  // namespace teleop::sim
