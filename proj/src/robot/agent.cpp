#include "teleop/robot/agent.hpp"

#include <cmath>

namespace teleop::robot {

const char* to_string(Mode m) { return m == Mode::Remote ? "Remote" : "Autonomous"; }

SupervisorOutput supervise_tick(const net::ConnectivityStatus& status, const ModeState& state, double now) {
  SupervisorOutput out;
  out.state = state;
  const bool good = status.status == net::LinkStatus::Good;
  if (state.mode == Mode::Remote) {
    if (good) {
      out.forward_teleop = true;
    } else if (state.last_goal) {
      out.state.mode = Mode::Autonomous;
      out.state.since = now;
      out.transition = Transition{now, Mode::Remote, Mode::Autonomous, "connectivity lost"};
      out.republish_goal = true;
      out.run_autonomy = true;
    } else {
      out.stop = true;  // nothing to navigate to
    }
  } else if (good) {
    out.state.mode = Mode::Remote;
    out.state.since = now;
    out.transition = Transition{now, Mode::Autonomous, Mode::Remote, "connectivity restored"};
    out.stop = true;  // wait for the operator
  } else {
    out.run_autonomy = true;
  }
  return out;
}

GoalDecision handle_goal(const GoalMsg& msg, const ModeState& state, const GridGeometry& map_extent) {
  GoalDecision d;
  d.state = state;
  if (msg.frame != "map") {
    d.reason = "goal frame must be \"map\"";
    return d;
  }
  if (!std::isfinite(msg.pose.x) || !std::isfinite(msg.pose.y) || !map_extent.contains_point(msg.pose.position())) {
    d.reason = "goal outside map bounds";
    return d;
  }
  d.state.last_goal = msg;
  d.accepted = true;
  d.replan = state.mode == Mode::Autonomous;
  return d;
}

void to_json(json& j, const AgentConfig& c) {
  j = json{{"connectivity_k", c.connectivity_k},
           {"ping_interval", c.ping.interval},
           {"ping_timeout", c.ping.timeout},
           {"cmd_timeout", c.cmd_timeout},
           {"remote_autonav", c.remote_autonav},
           {"v_max", c.limits.v_max},
           {"w_max", c.limits.w_max},
           {"robot_radius", c.inflation.robot_radius},
           {"inflation_radius", c.inflation.inflation_radius},
           {"inflation_decay", c.inflation.decay},
           {"cost_weight", c.planner.cost_weight},
           {"replan_period", c.replan.period},
           {"lookahead", c.follower.lookahead},
           {"k_heading", c.follower.k_heading},
           {"goal_tol_pos", c.goal_tol_pos},
           {"goal_tol_ang", c.goal_tol_ang},
           {"goal_check_heading", c.goal_check_heading}};
}

void from_json(const json& j, AgentConfig& c) {
  c = AgentConfig{};
  c.connectivity_k = j.value("connectivity_k", c.connectivity_k);
  c.ping.interval = j.value("ping_interval", c.ping.interval);
  c.ping.timeout = j.value("ping_timeout", c.ping.timeout);
  c.cmd_timeout = j.value("cmd_timeout", c.cmd_timeout);
  c.remote_autonav = j.value("remote_autonav", c.remote_autonav);
  c.limits.v_max = j.value("v_max", c.limits.v_max);
  c.limits.w_max = j.value("w_max", c.limits.w_max);
  c.inflation.robot_radius = j.value("robot_radius", c.inflation.robot_radius);
  c.inflation.inflation_radius = j.value("inflation_radius", c.inflation.inflation_radius);
  c.inflation.decay = j.value("inflation_decay", c.inflation.decay);
  c.planner.cost_weight = j.value("cost_weight", c.planner.cost_weight);
  c.replan.period = j.value("replan_period", c.replan.period);
  c.follower.lookahead = j.value("lookahead", c.follower.lookahead);
  c.follower.k_heading = j.value("k_heading", c.follower.k_heading);
  c.goal_tol_pos = j.value("goal_tol_pos", c.goal_tol_pos);
  c.goal_tol_ang = j.value("goal_tol_ang", c.goal_tol_ang);
  c.goal_check_heading = j.value("goal_check_heading", c.goal_check_heading);
  c.follower.limits = c.limits;
  c.ping.validate();
  if (c.connectivity_k < 1) throw std::invalid_argument("agent: connectivity_k must be >= 1");
}

namespace {

nav::PlanPath plan_with_start_fallback(const nav::Costmap& costmap, const AgentConfig& cfg, const Pose2D& pose,
                                       const Pose2D& goal, double now) {
  try {
    return nav::plan_shortest_path(costmap, pose, goal, cfg.planner, now);
  } catch (const nav::PlanningError& e) {
    if (e.kind() != nav::PlanningError::Kind::StartInCollision) throw;
    const auto alt = nav::nearest_traversable(costmap, costmap.geometry.to_index(pose.position()),
                                              cfg.start_search_radius);
    if (!alt) throw;
    const Vec2 c = costmap.geometry.center(*alt);
    return nav::plan_shortest_path(costmap, {c.x, c.y, pose.theta}, goal, cfg.planner, now);
  }
}

// replan_if_needed, with the start relaxed to a nearby free cell when the
// robot's own cell has been inflated over.
nav::ReplanResult refresh_plan(const nav::Costmap& costmap, const AgentConfig& cfg,
                               const std::optional<nav::PlanPath>& current, const Pose2D& pose, const Pose2D& goal,
                               double now) {
  try {
    return nav::replan_if_needed(costmap, current, pose, goal, now, cfg.planner, cfg.replan);
  } catch (const nav::PlanningError& e) {
    if (e.kind() != nav::PlanningError::Kind::StartInCollision) throw;
    return {plan_with_start_fallback(costmap, cfg, pose, goal, now), true, "start_relaxed"};
  }
}

}  // namespace

NavTick autonomous_tick(NavState& nav, const AgentConfig& cfg, const nav::Costmap& costmap, const Pose2D& pose,
                        const GoalMsg& goal, double now) {
  NavTick out;
  if (nav.reached_for && *nav.reached_for == goal.pose) {
    out.goal_reached = true;
    return out;
  }
  const bool fresh_goal = !nav.plan || nav.plan->goal != goal.pose;
  if (fresh_goal && nav::goal_reached(pose, goal.pose, cfg.goal_tol_pos, cfg.goal_tol_ang, cfg.goal_check_heading)) {
    nav.goal_reached = true;
    nav.reached_for = goal.pose;
    out.goal_reached = true;
    return out;
  }
  nav.goal_reached = false;
  try {
    auto rr = refresh_plan(costmap, cfg, nav.plan, pose, goal.pose, now);
    out.replanned = rr.replanned;
    out.replan_reason = rr.reason;
    nav.plan = std::move(rr.path);
    nav.last_error.clear();
  } catch (const std::exception& e) {
    nav.plan.reset();
    nav.last_error = e.what();
    out.error = e.what();
    return out;  // stopped; retried next tick
  }
  const auto cmd = nav::follow_path(pose, *nav.plan, cfg.follower);
  if (cmd.goal_reached) {
    nav.goal_reached = true;
    nav.reached_for = goal.pose;
    out.goal_reached = true;
    return out;
  }
  out.twist = cmd.twist;
  return out;
}

RobotAgent::RobotAgent(AgentConfig cfg, GridGeometry map_geometry, Uplink uplink)
    : cfg_(std::move(cfg)),
      map_geometry_(map_geometry),
      uplink_(std::move(uplink)),
      goal_republish_(bus_.advertise(topics::kGoal)),
      nav_goal_sub_(bus_.subscribe(topics::kGoal)),
      odom_pub_(bus_.advertise(topics::kOdom)),
      scan_pub_(bus_.advertise(topics::kScan)),
      map_pub_(bus_.advertise(topics::kMap)),
      plan_pub_(bus_.advertise(topics::kPlan)),
      mode_pub_(bus_.advertise(topics::kMode)),
      ping_pub_(bus_.advertise(topics::kPing)),
      map_(map_geometry),
      pings_(cfg_.ping),
      classifier_(cfg_.connectivity_k) {
  cfg_.follower.limits = cfg_.limits;
}

void RobotAgent::preload_map(mapping::OccupancyGrid map) {
  if (!(map.geometry() == map_geometry_)) throw std::invalid_argument("preload_map: geometry mismatch");
  map_ = std::move(map);
  map_dirty_ = true;
}

void RobotAgent::emit(double t, std::string kind, json detail) {
  if (events_) events_(AgentEvent{t, std::move(kind), std::move(detail)});
}

void RobotAgent::send_telemetry(Publisher& pub, json payload, double stamp) {
  const Envelope e = pub.publish(std::move(payload), stamp);
  if (uplink_) uplink_(e);
}

void RobotAgent::publish_mode(double now, json extra) {
  json payload{{"mode", to_string(state_.mode)},
               {"since", state_.since},
               {"connectivity", net::to_string(classifier_.status().status)},
               {"last_goal", state_.last_goal ? json(*state_.last_goal) : json(nullptr)}};
  payload.update(extra);
  send_telemetry(mode_pub_, std::move(payload), now);
}

void RobotAgent::on_link_envelope(const Envelope& e, double arrival) {
  if (e.topic == topics::kPong) {
    if (e.payload.is_object() && e.payload.contains("seq")) pings_.on_pong(e.payload["seq"].get<std::uint64_t>(), arrival);
    return;
  }
  inbox_.push_back(e);
}

void RobotAgent::on_scan(const LaserScan& scan, const Pose2D& odom_pose) { pending_scans_.emplace_back(scan, odom_pose); }

void RobotAgent::refresh_costmap() {
  if (!map_dirty_ && nav_.costmap) return;
  nav_.costmap = nav::build_costmap(mapping::classify(map_), cfg_.inflation);
  map_dirty_ = false;
}

void RobotAgent::update_plan_for_display(double now, const Pose2D& pose) {
  if (!state_.last_goal) return;
  refresh_costmap();
  try {
    auto rr = refresh_plan(*nav_.costmap, cfg_, nav_.plan, pose, state_.last_goal->pose, now);
    if (rr.replanned) emit(now, "replan", {{"reason", rr.reason}, {"mode", "Remote"}});
    nav_.plan = std::move(rr.path);
  } catch (const std::exception&) {
    // Remote mode only shows the path; the operator keeps driving.
  }
}

Twist RobotAgent::tick(double now, const Pose2D& odom_pose) {
  ++ticks_;
  if (ticks_ == 1) publish_mode(now);

  // Operator traffic that arrived since the last tick.
  while (!inbox_.empty()) {
    Envelope e = std::move(inbox_.front());
    inbox_.pop_front();
    if (e.topic == topics::kCmdVel) {
      try {
        last_cmd_ = clamp_twist(e.payload.get<Twist>(), cfg_.limits);
        last_cmd_at_ = e.stamp;
      } catch (const json::exception&) {
        emit(now, "malformed", {{"topic", e.topic}, {"seq", e.seq}});
      }
    } else if (e.topic == topics::kGoal) {
      GoalMsg goal;
      try {
        goal = e.payload.get<GoalMsg>();
      } catch (const std::exception& ex) {
        emit(now, "goal_rejected", {{"reason", ex.what()}});
        publish_mode(now, {{"goal_status", "rejected"}, {"goal_reason", ex.what()}});
        continue;
      }
      const GoalDecision d = handle_goal(goal, state_, map_geometry_);
      if (!d.accepted) {
        emit(now, "goal_rejected", {{"reason", d.reason}, {"goal", goal}});
        publish_mode(now, {{"goal_status", "rejected"}, {"goal_reason", d.reason}, {"rejected_goal", goal}});
        continue;
      }
      state_ = d.state;
      emit(now, "goal_accepted", {{"goal", goal}});
      publish_mode(now, {{"goal_status", "accepted"}});
      if (d.replan) {
        goal_republish_.publish(json(goal), now);
        emit(now, "goal_republished", {{"goal", goal}});
      }
    }
  }

  // Mapping.
  while (!pending_scans_.empty()) {
    auto [scan, pose] = std::move(pending_scans_.front());
    pending_scans_.pop_front();
    try {
      map_.integrate_scan(pose, scan);
      map_dirty_ = true;
    } catch (const OutOfBounds&) {
      emit(now, "scan_outside_map");
    }
    json payload = scan;
    payload["pose"] = pose;
    send_telemetry(scan_pub_, std::move(payload), scan.stamp);
  }

  // Connectivity.
  for (const auto& r : pings_.poll(now)) {
    ping_history_.push_back(r);
    if (classifier_.update(r, now)) {
      emit(now, "connectivity", {{"status", net::to_string(classifier_.status().status)}});
    }
  }
  if (auto seq = pings_.due(now)) send_telemetry(ping_pub_, net::PingMonitor::ping_payload(*seq), now);

  // Mode machine.
  const SupervisorOutput sup = supervise_tick(classifier_.status(), state_, now);
  state_ = sup.state;
  if (sup.transition) {
    log_.push_back(*sup.transition);
    emit(now, "transition",
         {{"from", to_string(sup.transition->from)},
          {"to", to_string(sup.transition->to)},
          {"reason", sup.transition->reason}});
    publish_mode(now);
    if (sup.transition->to == Mode::Remote) last_cmd_.reset();
    if (sup.transition->to == Mode::Autonomous) {
      // The Remote-mode display path may be stale; plan afresh from here.
      nav_.plan.reset();
      nav_.reached_for.reset();
      nav_.goal_reached = false;
    }
  }
  if (sup.republish_goal && state_.last_goal) {
    GoalMsg g = *state_.last_goal;
    g.stamp = now;
    goal_republish_.publish(json(g), now);
    emit(now, "goal_republished", {{"goal", g}});
  }
  for (auto& e : nav_goal_sub_.drain()) nav_goal_ = e.payload.get<GoalMsg>();

  // Command selection.
  Twist cmd;
  if (sup.run_autonomy && nav_goal_) {
    refresh_costmap();
    const bool was_reached = nav_.goal_reached;
    const NavTick nt = autonomous_tick(nav_, cfg_, *nav_.costmap, odom_pose, *nav_goal_, now);
    if (nt.replanned) emit(now, "replan", {{"reason", nt.replan_reason}, {"mode", "Autonomous"}});
    if (!nt.error.empty()) emit(now, "nav_error", {{"error", nt.error}});
    if (nt.goal_reached && !was_reached) emit(now, "goal_reached", {{"goal", nav_goal_->pose}});
    cmd = nt.twist;
  } else if (sup.forward_teleop) {
    const bool fresh = last_cmd_ && now - last_cmd_at_ <= cfg_.cmd_timeout;
    update_plan_for_display(now, odom_pose);
    if (fresh) {
      cmd = *last_cmd_;
    } else if (cfg_.remote_autonav && state_.last_goal) {
      refresh_costmap();
      const NavTick nt = autonomous_tick(nav_, cfg_, *nav_.costmap, odom_pose, *state_.last_goal, now);
      cmd = nt.twist;
    }
  }

  // Telemetry.
  if (nav_.plan && nav_.plan->stamp != published_plan_stamp_) {
    published_plan_stamp_ = nav_.plan->stamp;
    send_telemetry(plan_pub_, json(*nav_.plan), now);
  }
  if (now + 1e-9 >= next_odom_) {
    next_odom_ += 1.0 / cfg_.odom_rate;
    send_telemetry(odom_pub_, json{{"pose", odom_pose}, {"twist", cmd}}, now);
  }
  if (now + 1e-9 >= next_map_) {
    next_map_ += 1.0 / cfg_.map_rate;
    send_telemetry(map_pub_, json(mapping::classify(map_)), now);
  }
  return clamp_twist(cmd, cfg_.limits);
}

}  // namespace teleop::robot
