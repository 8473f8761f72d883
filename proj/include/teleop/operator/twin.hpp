#pragma once

#include <optional>

#include "teleop/core/geometry.hpp"
#include "teleop/navigation/planner.hpp"

namespace teleop::ops {

enum class TwinSource : std::uint8_t { Telemetry, Predicted };
const char* to_string(TwinSource s);

struct TwinConfig {
  double staleness = 0.5;    // s without /odom before prediction starts
  double v_pred = 0.5;       // m/s along the cached path
  double smoothing_T = 1.0;  // s; 0 snaps on reconnection
};

/// Operator-side replica of the robot pose.
struct TwinState {
  Pose2D pose;  // what the UI shows
  TwinSource source = TwinSource::Telemetry;
  double last_telemetry_at = 0.0;
  std::optional<nav::PlanPath> path_cache;
  double path_progress = 0.0;  // m along path_cache
  bool has_telemetry = false;

  Pose2D live_pose;  // latest /odom pose
  // Active reconciliation: the shown pose is the live pose plus an offset
  // (predicted minus fresh, at reconciliation) that decays linearly to zero.
  std::optional<double> blend_start;
  Pose2D blend_offset;
};

/// /odom: tracks the live pose (blending if a reconciliation is running) and
/// keeps path_progress at the projection of the pose onto the cached path.
TwinState apply_odometry(TwinState twin, const Pose2D& pose, double now);

/// /plan: replaces the cache and resets progress to the closest path point.
TwinState apply_plan(TwinState twin, nav::PlanPath plan);

/// Advances the twin along the cached path at v_pred for dt seconds and
/// marks it Predicted. Without a cached path the twin holds position.
TwinState predict_twin(TwinState twin, double dt, double v_pred);

struct Reconciliation {
  TwinState twin;
  double teleport_distance = 0.0;
};

/// First fresh /odom after a Predicted period. Records the jump between the
/// predicted and live positions, then fades the difference out over
/// smoothing_T (linear in position, shortest-arc heading) while the live pose
/// keeps moving; smoothing_T = 0 snaps.
Reconciliation reconcile(TwinState twin, const Pose2D& fresh, double smoothing_T, double now);

/// Re-evaluates the blend at `now`; ends it after smoothing_T.
TwinState update_blend(TwinState twin, double smoothing_T, double now);

bool is_stale(const TwinState& twin, double now, double staleness);

}  // namespace teleop::ops
