#include "teleop/navigation/follower.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace teleop::nav {

PathProjection project_onto_path(Vec2 p, const std::vector<Pose2D>& waypoints) {
  PathProjection best;
  if (waypoints.empty()) return best;
  best.distance = distance(p, waypoints.front().position());
  double arc = 0.0;
  for (std::size_t i = 0; i + 1 < waypoints.size(); ++i) {
    const Vec2 a = waypoints[i].position();
    const Vec2 b = waypoints[i + 1].position();
    const Vec2 d = b - a;
    const double len = norm(d);
    const double t = len > 0.0 ? std::clamp(dot(p - a, d) / (len * len), 0.0, 1.0) : 0.0;
    const double dist = distance(p, a + d * t);
    if (dist < best.distance) best = {i, arc + t * len, dist};
    arc += len;
  }
  return best;
}

double path_length(const std::vector<Pose2D>& waypoints) {
  double len = 0.0;
  for (std::size_t i = 0; i + 1 < waypoints.size(); ++i) {
    len += distance(waypoints[i].position(), waypoints[i + 1].position());
  }
  return len;
}

Pose2D point_along_path(const std::vector<Pose2D>& waypoints, double arc_length) {
  if (waypoints.empty()) return {};
  if (arc_length <= 0.0 || waypoints.size() == 1) {
    Pose2D p = waypoints.front();
    return p;
  }
  double remaining = arc_length;
  for (std::size_t i = 0; i + 1 < waypoints.size(); ++i) {
    const Vec2 a = waypoints[i].position();
    const Vec2 b = waypoints[i + 1].position();
    const double len = distance(a, b);
    if (remaining <= len && len > 0.0) {
      const Vec2 p = a + (b - a) * (remaining / len);
      return {p.x, p.y, std::atan2(b.y - a.y, b.x - a.x)};
    }
    remaining -= len;
  }
  return waypoints.back();
}

FollowCommand follow_path(const Pose2D& pose, const PlanPath& path, const FollowerParams& params) {
  const auto& wps = path.waypoints;
  if (wps.empty()) throw std::invalid_argument("follow_path: empty path");

  FollowCommand out;
  const Vec2 here = pose.position();
  if (distance(here, wps.back().position()) <= params.goal_tolerance) {
    out.goal_reached = true;
    out.target_index = wps.size() - 1;
    return out;
  }

  const PathProjection proj = project_onto_path(here, wps);
  std::size_t target = wps.size() - 1;
  double arc = 0.0;
  for (std::size_t i = 0; i < wps.size(); ++i) {
    if (i > 0) arc += distance(wps[i - 1].position(), wps[i].position());
    if (i > proj.segment && arc - proj.arc_length >= params.lookahead) {
      target = i;
      break;
    }
  }
  out.target_index = target;

  const Vec2 t = wps[target].position();
  const double bearing = std::atan2(t.y - here.y, t.x - here.x);
  const double error = normalize_angle(bearing - pose.theta);
  out.twist = clamp_twist({params.limits.v_max * std::max(0.0, std::cos(error)), params.k_heading * error},
                          params.limits);
  return out;
}

bool goal_reached(const Pose2D& pose, const Pose2D& goal, double tol_pos, double tol_ang, bool check_heading) {
  if (distance(pose.position(), goal.position()) > tol_pos) return false;
  if (!check_heading) return true;
  return std::abs(normalize_angle(pose.theta - goal.theta)) <= tol_ang;
}

}  // namespace teleop::nav
