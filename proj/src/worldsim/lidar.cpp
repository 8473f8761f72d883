#include "teleop/worldsim/lidar.hpp"

#include <algorithm>
#include <cmath>

namespace teleop::sim {

std::optional<double> ray_segment_distance(Vec2 origin, Vec2 dir, const Segment& s) {
  const Vec2 e = s.b - s.a;
  const double denom = cross(dir, e);
  if (std::abs(denom) < 1e-15) return std::nullopt;
  const Vec2 ao = s.a - origin;
  const double t = cross(ao, e) / denom;
  const double u = cross(ao, dir) / denom;
  if (t < 0.0 || u < 0.0 || u > 1.0) return std::nullopt;
  return t;
}

std::optional<double> cast_ray(Vec2 origin, Vec2 dir, std::span<const Segment> segments) {
  std::optional<double> best;
  for (const auto& s : segments) {
    if (auto t = ray_segment_distance(origin, dir, s); t && (!best || *t < *best)) best = t;
  }
  return best;
}

LaserScan simulate_scan(const WorldModel& world, const Pose2D& pose, const LaserScan& header,
                        const SensorNoise& noise, Rng& rng) {
  LaserScan scan = header;
  const std::size_t beams = header.ranges.empty() ? LaserScan::kDefaultBeams : header.ranges.size();
  scan.angle_increment = 2.0 * std::numbers::pi / static_cast<double>(beams);
  scan.ranges.assign(beams, scan.no_return_value());

  const auto segments = world.segments();
  const Vec2 origin = pose.position();
  for (std::size_t i = 0; i < beams; ++i) {
    const double bearing = pose.theta + scan.bearing(i);
    const Vec2 dir{std::cos(bearing), std::sin(bearing)};
    const auto hit = cast_ray(origin, dir, segments);
    if (!hit || *hit < scan.range_min || *hit > scan.range_max) continue;
    double r = *hit;
    const double rel = r < 3.0 ? noise.range_noise_rel : noise.range_noise_rel_far;
    if (rel > 0.0) r = std::clamp(r * (1.0 + rng.gaussian(rel)), scan.range_min, scan.range_max);
    scan.ranges[i] = r;
  }
  return scan;
}

}  // namespace teleop::sim
