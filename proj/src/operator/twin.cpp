#include "teleop/operator/twin.hpp"

#include <algorithm>

#include "teleop/navigation/follower.hpp"

namespace teleop::ops {

const char* to_string(TwinSource s) { return s == TwinSource::Telemetry ? "telemetry" : "predicted"; }

bool is_stale(const TwinState& twin, double now, double staleness) {
  return twin.has_telemetry && now - twin.last_telemetry_at > staleness;
}

TwinState apply_odometry(TwinState twin, const Pose2D& pose, double now) {
  twin.live_pose = pose;
  twin.last_telemetry_at = now;
  twin.has_telemetry = true;
  twin.source = TwinSource::Telemetry;
  if (!twin.blend_start) twin.pose = pose;
  if (twin.path_cache) {
    twin.path_progress = nav::project_onto_path(pose.position(), twin.path_cache->waypoints).arc_length;
  }
  return twin;
}

TwinState apply_plan(TwinState twin, nav::PlanPath plan) {
  const Vec2 anchor = twin.has_telemetry ? twin.live_pose.position() : twin.pose.position();
  twin.path_progress = nav::project_onto_path(anchor, plan.waypoints).arc_length;
  twin.path_cache = std::move(plan);
  return twin;
}

TwinState predict_twin(TwinState twin, double dt, double v_pred) {
  twin.source = TwinSource::Predicted;
  twin.blend_start.reset();
  if (!twin.path_cache || twin.path_cache->waypoints.empty()) return twin;
  const auto& wps = twin.path_cache->waypoints;
  twin.path_progress = std::min(twin.path_progress + v_pred * dt, nav::path_length(wps));
  twin.pose = nav::point_along_path(wps, twin.path_progress);
  return twin;
}

Reconciliation reconcile(TwinState twin, const Pose2D& fresh, double smoothing_T, double now) {
  Reconciliation r;
  r.teleport_distance = distance(twin.pose.position(), fresh.position());
  const Pose2D predicted = twin.pose;
  twin.blend_start.reset();
  twin = apply_odometry(std::move(twin), fresh, now);
  if (smoothing_T > 0.0) {
    twin.blend_start = now;
    twin.blend_offset = {predicted.x - fresh.x, predicted.y - fresh.y, normalize_angle(predicted.theta - fresh.theta)};
    twin.pose = predicted;
  }
  r.twin = std::move(twin);
  return r;
}

TwinState update_blend(TwinState twin, double smoothing_T, double now) {
  if (!twin.blend_start) return twin;
  const double alpha = smoothing_T > 0.0 ? (now - *twin.blend_start) / smoothing_T : 1.0;
  if (alpha >= 1.0) {
    twin.blend_start.reset();
    twin.pose = twin.live_pose;
  } else {
    const double k = 1.0 - std::max(0.0, alpha);
    const Pose2D& live = twin.live_pose;
    const Pose2D& off = twin.blend_offset;
    twin.pose = {live.x + k * off.x, live.y + k * off.y, normalize_angle(live.theta + k * off.theta)};
  }
  return twin;
}

}  // namespace teleop::ops
