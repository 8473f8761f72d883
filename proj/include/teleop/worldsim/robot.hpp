#pragma once

#include <cstdint>

#include "teleop/core/geometry.hpp"
#include "teleop/core/random.hpp"
#include "teleop/worldsim/world.hpp"

namespace teleop::sim {

/// Control tick of the simulated robot (50 Hz).
inline constexpr double kControlDt = 0.02;

struct RobotState {
  Pose2D pose;       // ground truth
  Pose2D odom_pose;  // integrated odometry estimate
  Twist twist;       // twist actually applied during the last step
  double stamp = 0.0;
  bool collision = false;  // last step was blocked
};

struct SensorNoise {
  double range_noise_rel = 0.01;       // ranges < 3 m
  double range_noise_rel_far = 0.02;   // ranges >= 3 m
  double odom_noise_std_v = 0.0;       // relative, per step
  double odom_noise_std_w = 0.0;
  std::uint64_t rng_seed = 0;

  static SensorNoise none() { return {0.0, 0.0, 0.0, 0.0, 0}; }
};

/// Unicycle Euler step. The command is clamped to `limits`. A step that would
/// bring the robot center within robot_radius of any geometry (or outside the
/// bounds) is blocked: pose unchanged, applied twist zero, collision raised.
RobotState step_robot(const WorldModel& world, const RobotState& s, Twist cmd, double dt,
                      const VelocityLimits& limits = {});

/// Integrates the applied twist, perturbed multiplicatively, into odom_pose.
/// With zero noise the result matches the ground-truth pose.
Pose2D read_odometry(const RobotState& s, const SensorNoise& noise, double dt, Rng& rng);

}  // namespace teleop::sim
