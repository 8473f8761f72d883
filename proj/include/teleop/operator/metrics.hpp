#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "teleop/core/messages.hpp"
#include "teleop/robot/agent.hpp"

namespace teleop::ops {

/// Summary of one run. Distances are ground truth; times are simulation
/// seconds from the start of the run.
struct RunMetrics {
  std::optional<double> time_to_goal;  // first time within goal tolerance of the active goal
  double path_length = 0.0;
  int mode_switches = 0;
  std::vector<double> teleport_distance;  // one entry per reconciliation
  int collision_count = 0;                // rising edges of the collision flag
  std::uint64_t delivered = 0;
  std::uint64_t dropped = 0;
  std::uint64_t malformed = 0;
  bool goal_reached = false;
  std::optional<double> final_goal_error;
  robot::TransitionLog transitions;
  double duration = 0.0;
};

void to_json(json& j, const RunMetrics& m);

}  // namespace teleop::ops
