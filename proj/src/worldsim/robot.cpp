#include "teleop/worldsim/robot.hpp"

#include <cmath>

namespace teleop::sim {

namespace {

Pose2D integrate(const Pose2D& p, Twist t, double dt) {
  return {p.x + t.v * std::cos(p.theta) * dt, p.y + t.v * std::sin(p.theta) * dt,
          normalize_angle(p.theta + t.w * dt)};
}

}  // namespace

RobotState step_robot(const WorldModel& world, const RobotState& s, Twist cmd, double dt,
                      const VelocityLimits& limits) {
  RobotState next = s;
  next.stamp = s.stamp + dt;
  cmd = clamp_twist(cmd, limits);
  const Pose2D candidate = integrate(s.pose, cmd, dt);
  if (world.clearance(candidate.position()) < world.robot_radius) {
    next.twist = {};
    next.collision = true;
    return next;
  }
  next.pose = candidate;
  next.twist = cmd;
  next.collision = false;
  return next;
}

Pose2D read_odometry(const RobotState& s, const SensorNoise& noise, double dt, Rng& rng) {
  Twist measured = s.twist;
  if (measured.v != 0.0) measured.v *= 1.0 + rng.gaussian(noise.odom_noise_std_v);
  if (measured.w != 0.0) measured.w *= 1.0 + rng.gaussian(noise.odom_noise_std_w);
  return integrate(s.odom_pose, measured, dt);
}

}  // namespace teleop::sim
