#include "teleop/core/geometry.hpp"

#include <algorithm>
#include <stdexcept>

namespace teleop {

double distance_to_segment(Vec2 p, const Segment& s) {
  const Vec2 d = s.b - s.a;
  const double len2 = dot(d, d);
  if (len2 == 0.0) return distance(p, s.a);
  const double t = std::clamp(dot(p - s.a, d) / len2, 0.0, 1.0);
  return distance(p, s.a + d * t);
}

double normalize_angle(double theta) {
  if (!std::isfinite(theta)) throw std::domain_error("normalize_angle: non-finite angle");
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double r = std::remainder(theta, two_pi);  // [-pi, pi]
  if (r <= -std::numbers::pi) r += two_pi;
  return r;
}

Twist clamp_twist(Twist t, const VelocityLimits& limits) {
  return {std::clamp(t.v, -limits.v_max, limits.v_max), std::clamp(t.w, -limits.w_max, limits.w_max)};
}

Pose2D interpolate(const Pose2D& from, const Pose2D& to, double alpha) {
  alpha = std::clamp(alpha, 0.0, 1.0);
  const double dtheta = normalize_angle(to.theta - from.theta);
  return {from.x + (to.x - from.x) * alpha, from.y + (to.y - from.y) * alpha,
          normalize_angle(from.theta + dtheta * alpha)};
}

}  // namespace teleop
