#include "teleop/operator/server.hpp"

#include <cmath>

#include "teleop/core/errors.hpp"
#include "teleop/netlink/ping.hpp"

namespace teleop::ops {

const char* to_string(OperatorInput::Kind k) {
  switch (k) {
    case OperatorInput::Kind::Teleop: return "teleop";
    case OperatorInput::Kind::Goal: return "goal";
    case OperatorInput::Kind::Outage: return "outage";
    case OperatorInput::Kind::Restore: return "restore";
  }
  return "?";
}

namespace {

double finite_number(const json& j, const char* key, double fallback, bool required) {
  if (!j.contains(key)) {
    if (required) throw SchemaError(std::string("input: missing \"") + key + "\"");
    return fallback;
  }
  if (!j[key].is_number()) throw SchemaError(std::string("input: \"") + key + "\" must be a number");
  const double v = j[key].get<double>();
  if (!std::isfinite(v)) throw SchemaError(std::string("input: \"") + key + "\" must be finite");
  return v;
}

}  // namespace

OperatorInput parse_input(const json& j) {
  if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) {
    throw SchemaError("input: expected an object with a string \"type\"");
  }
  const auto type = j["type"].get<std::string>();
  OperatorInput in;
  if (type == "teleop") {
    in.kind = OperatorInput::Kind::Teleop;
    in.twist = {finite_number(j, "v", 0.0, true), finite_number(j, "w", 0.0, true)};
    in.latched = j.value("latched", false);
  } else if (type == "goal") {
    in.kind = OperatorInput::Kind::Goal;
    in.goal = {finite_number(j, "x", 0.0, true), finite_number(j, "y", 0.0, true), finite_number(j, "theta", 0.0, false)};
  } else if (type == "control") {
    const auto action = j.value("action", std::string{});
    if (action == "outage") {
      in.kind = OperatorInput::Kind::Outage;
      in.duration = finite_number(j, "duration", 0.0, false);
      if (in.duration < 0.0) throw SchemaError("input: outage duration must be non-negative");
    } else if (action == "restore") {
      in.kind = OperatorInput::Kind::Restore;
    } else {
      throw SchemaError("input: control action must be \"outage\" or \"restore\"");
    }
  } else {
    throw SchemaError("input: unknown type \"" + type + "\"");
  }
  return in;
}

json input_to_json(const OperatorInput& in) {
  switch (in.kind) {
    case OperatorInput::Kind::Teleop:
      return {{"type", "teleop"}, {"v", in.twist.v}, {"w", in.twist.w}, {"latched", in.latched}};
    case OperatorInput::Kind::Goal:
      return {{"type", "goal"}, {"x", in.goal.x}, {"y", in.goal.y}, {"theta", in.goal.theta}};
    case OperatorInput::Kind::Outage:
      return {{"type", "control"}, {"action", "outage"}, {"duration", in.duration}};
    case OperatorInput::Kind::Restore:
      return {{"type", "control"}, {"action", "restore"}};
  }
  return {};
}

std::vector<ScriptStep> parse_script(const json& j) {
  if (!j.is_array()) throw SchemaError("script: expected an array");
  std::vector<ScriptStep> out;
  double prev = 0.0;
  for (const auto& item : j) {
    if (!item.is_object()) throw SchemaError("script: each step must be an object");
    ScriptStep s;
    s.t = finite_number(item, "t", 0.0, true);
    if (s.t < prev) throw SchemaError("script: steps must be sorted by non-negative t");
    prev = s.t;
    s.input = parse_input(item);
    // Scripted teleop stands in for a held stick: it stays until replaced.
    if (s.input.kind == OperatorInput::Kind::Teleop && !item.contains("latched")) s.input.latched = true;
    out.push_back(s);
  }
  return out;
}

OperatorServer::OperatorServer(OperatorConfig cfg, Downlink downlink)
    : cfg_(std::move(cfg)),
      downlink_(std::move(downlink)),
      cmd_pub_(bus_.advertise(topics::kCmdVel)),
      goal_pub_(bus_.advertise(topics::kGoal)),
      pong_pub_(bus_.advertise(topics::kPong)),
      walls_(cfg_.walls) {}

void OperatorServer::submit(OperatorInput in) {
  std::lock_guard lock(input_mutex_);
  inputs_.push_back(in);
}

void OperatorServer::emit(double t, const std::string& kind, json detail) {
  if (events_) events_(t, kind, detail);
}

bool OperatorServer::operator_link_good(double now) const {
  const double window = cfg_.connectivity_k * cfg_.ping_interval;
  if (!last_ping_at_) return now <= window;
  return now - *last_ping_at_ <= window + 1e-9;
}

void OperatorServer::on_link_envelope(const Envelope& e, double arrival) {
  if (e.topic == topics::kPing) {
    try {
      const auto seq = e.payload.at("seq").get<std::uint64_t>();
      last_ping_at_ = arrival;
      downlink_(pong_pub_.publish(net::PingMonitor::pong_payload(seq), arrival));
    } catch (const json::exception&) {
      ++malformed_;
    }
    return;
  }
  ingest(e, arrival);
}

void OperatorServer::ingest(const Envelope& e, double arrival) {
  auto [it, inserted] = last_seq_.try_emplace(e.topic, e.seq);
  if (!inserted) {
    if (e.seq <= it->second) {
      ++stale_;
      return;
    }
    it->second = e.seq;
  }
  try {
    if (e.topic == topics::kOdom) {
      const auto pose = e.payload.at("pose").get<Pose2D>();
      if (twin_.source == TwinSource::Predicted) {
        auto r = reconcile(std::move(twin_), pose, cfg_.twin.smoothing_T, arrival);
        twin_ = std::move(r.twin);
        teleports_.push_back(r.teleport_distance);
        emit(arrival, "reconcile", {{"teleport_distance", r.teleport_distance}, {"smoothing_T", cfg_.twin.smoothing_T}});
      } else {
        twin_ = apply_odometry(std::move(twin_), pose, arrival);
      }
    } else if (e.topic == topics::kPlan) {
      twin_ = apply_plan(std::move(twin_), e.payload.get<nav::PlanPath>());
      ++plan_version_;
    } else if (e.topic == topics::kScan) {
      const auto scan = e.payload.get<LaserScan>();
      const Pose2D pose = e.payload.contains("pose") ? e.payload["pose"].get<Pose2D>() : twin_.live_pose;
      walls_.ingest(scan, pose, arrival);
    } else if (e.topic == topics::kMap) {
      map_ = e.payload.get<mapping::OccupancyMsg>();
      ++map_version_;
    } else if (e.topic == topics::kMode) {
      if (!e.payload.is_object() || !e.payload.contains("mode")) throw SchemaError("mode payload without mode");
      if (e.payload.value("goal_status", "") == "rejected") {
        notices_.push_back("robot rejected goal: " + e.payload.value("goal_reason", std::string{}));
      }
      mode_ = e.payload;
    }
  } catch (const std::exception&) {
    ++malformed_;
  }
}

void OperatorServer::apply(const OperatorInput& in, double now) {
  switch (in.kind) {
    case OperatorInput::Kind::Teleop:
      held_ = clamp_twist(in.twist, cfg_.limits);
      held_latched_ = in.latched;
      held_at_ = now;
      break;
    case OperatorInput::Kind::Goal: {
      if (cfg_.map_extent && !cfg_.map_extent->contains_point(in.goal.position())) {
        notices_.push_back("goal outside map");
        emit(now, "goal_refused", {{"x", in.goal.x}, {"y", in.goal.y}});
        break;
      }
      GoalMsg g{now, "map", in.goal};
      downlink_(goal_pub_.publish(json(g), now));
      active_goal_ = in.goal;
      emit(now, "goal_sent", {{"goal", in.goal}});
      break;
    }
    case OperatorInput::Kind::Outage:
    case OperatorInput::Kind::Restore:
      emit(now, "control", input_to_json(in));
      if (control_) control_(in, now);
      break;
  }
}

void OperatorServer::tick(double now) {
  while (next_step_ < script_.size() && script_[next_step_].t <= now + 1e-9) apply(script_[next_step_++].input, now);
  std::deque<OperatorInput> pending;
  {
    std::lock_guard lock(input_mutex_);
    pending.swap(inputs_);
  }
  for (const auto& in : pending) apply(in, now);

  // Teleop: stream the held command; a release or expiry sends one zero.
  if (held_) {
    const bool expired = !held_latched_ && now - held_at_ > cfg_.ui_teleop_timeout;
    const bool zero = held_->v == 0.0 && held_->w == 0.0;
    if (expired || zero) {
      downlink_(cmd_pub_.publish(json(Twist{}), now));
      held_.reset();
    } else if (now + 1e-9 >= next_teleop_) {
      downlink_(cmd_pub_.publish(json(*held_), now));
      next_teleop_ = now + 1.0 / cfg_.teleop_rate;
    }
  }

  // Twin: hold through short gaps, predict once stale, otherwise blend/track.
  if (is_stale(twin_, now, cfg_.twin.staleness)) {
    const double stale_since = twin_.last_telemetry_at + cfg_.twin.staleness;
    const double dt = now - std::max(last_tick_, stale_since);
    if (twin_.source == TwinSource::Telemetry) emit(now, "predict_start", {{"last_telemetry_at", twin_.last_telemetry_at}});
    twin_ = predict_twin(std::move(twin_), std::max(0.0, dt), cfg_.twin.v_pred);
  } else {
    twin_ = update_blend(std::move(twin_), cfg_.twin.smoothing_T, now);
  }
  walls_.expire(now);
  last_tick_ = now;
}

json OperatorServer::base_frame(const char* type, double now) const {
  json segs = json::array();
  for (const auto& s : walls_.segments()) segs.push_back({s.a.x, s.a.y, s.b.x, s.b.y});
  return json{{"type", type},
              {"t", now},
              {"twin", {{"pose", twin_.pose}, {"source", to_string(twin_.source)}, {"path_progress", twin_.path_progress}}},
              {"walls", std::move(segs)},
              {"mode", mode_.value("mode", "Remote")},
              {"connectivity",
               {{"robot", mode_.value("connectivity", "Good")}, {"operator", operator_link_good(now) ? "Good" : "Bad"}}},
              {"goal", active_goal_ ? json(*active_goal_) : json(nullptr)},
              {"metrics", {{"teleport_distance", teleports_}, {"malformed", malformed_}}}};
}

json OperatorServer::frame(double now) {
  json f = base_frame("frame", now);
  if (map_ && map_version_ != map_sent_) {
    f["map"] = *map_;
    map_sent_ = map_version_;
  }
  if (twin_.path_cache && plan_version_ != plan_sent_) {
    f["plan"] = *twin_.path_cache;
    plan_sent_ = plan_version_;
  }
  if (!notices_.empty()) {
    f["notices"] = notices_;
    notices_.clear();
  }
  return f;
}

json OperatorServer::snapshot(double now) const {
  json f = base_frame("snapshot", now);
  f["map"] = map_ ? json(*map_) : json(nullptr);
  f["plan"] = twin_.path_cache ? json(*twin_.path_cache) : json(nullptr);
  f["limits"] = {{"v_max", cfg_.limits.v_max}, {"w_max", cfg_.limits.w_max}};
  return f;
}

}  // namespace teleop::ops
