#pragma once

#include <optional>
#include <span>

#include "teleop/core/messages.hpp"
#include "teleop/core/random.hpp"
#include "teleop/worldsim/robot.hpp"
#include "teleop/worldsim/world.hpp"

namespace teleop::sim {

/// Distance along the ray from origin in direction dir (unit) to segment s,
/// or nullopt when the ray misses. Parallel segments never hit.
std::optional<double> ray_segment_distance(Vec2 origin, Vec2 dir, const Segment& s);

/// Nearest hit among `segments`, nullopt if none.
std::optional<double> cast_ray(Vec2 origin, Vec2 dir, std::span<const Segment> segments);

/// One sweep from `pose`. `header` supplies stamp, angle_min, range limits and
/// the beam count (its ranges size; the default 1147 when empty). Hits
/// shorter than range_min or beyond range_max read as "no return". Noise is
/// multiplicative Gaussian, relative std from SensorNoise by true range.
LaserScan simulate_scan(const WorldModel& world, const Pose2D& pose, const LaserScan& header,
                        const SensorNoise& noise, Rng& rng);

}  // namespace teleop::sim
