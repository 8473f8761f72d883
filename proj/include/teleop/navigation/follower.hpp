#pragma once

#include <cstddef>

#include "teleop/core/geometry.hpp"
#include "teleop/navigation/planner.hpp"

namespace teleop::nav {

struct FollowerParams {
  double lookahead = 0.3;        // m
  double k_heading = 2.0;
  double goal_tolerance = 0.05;  // m, distance to the final waypoint
  VelocityLimits limits;
};

struct FollowCommand {
  Twist twist;
  bool goal_reached = false;
  std::size_t target_index = 0;
};

/// Pure pursuit. From the path point closest to the robot, the target is the
/// first waypoint at least `lookahead` further along the path (else the last
/// one). w = k_heading * heading error, v = v_max * max(0, cos(error)), both
/// clamped. Within goal_tolerance of the final waypoint: zero twist and
/// goal_reached. Throws std::invalid_argument on an empty path.
FollowCommand follow_path(const Pose2D& pose, const PlanPath& path, const FollowerParams& params = {});

/// Distance within tol_pos and, when check_heading, heading within tol_ang.
bool goal_reached(const Pose2D& pose, const Pose2D& goal, double tol_pos = 0.10, double tol_ang = 0.35,
                  bool check_heading = true);

/// Index of the waypoint segment nearest to p and the arc length of the
/// projection from the start of the path.
struct PathProjection {
  std::size_t segment = 0;
  double arc_length = 0.0;
  double distance = 0.0;
};
PathProjection project_onto_path(Vec2 p, const std::vector<Pose2D>& waypoints);

/// Total polyline length.
double path_length(const std::vector<Pose2D>& waypoints);

/// Point and heading at `arc_length` along the polyline, clamped to its ends.
Pose2D point_along_path(const std::vector<Pose2D>& waypoints, double arc_length);

}  // namespace teleop::nav
