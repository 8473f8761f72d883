#pragma once

#include <deque>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "teleop/core/bus.hpp"
#include "teleop/core/grid.hpp"
#include "teleop/mapping/occupancy_grid.hpp"
#include "teleop/navigation/costmap.hpp"
#include "teleop/navigation/follower.hpp"
#include "teleop/navigation/planner.hpp"
#include "teleop/netlink/ping.hpp"

namespace teleop::robot {

enum class Mode : std::uint8_t { Remote, Autonomous };
const char* to_string(Mode m);

struct ModeState {
  Mode mode = Mode::Remote;
  std::optional<GoalMsg> last_goal;
  double since = 0.0;
};

struct Transition {
  double stamp = 0.0;
  Mode from = Mode::Remote;
  Mode to = Mode::Remote;
  std::string reason;
};

using TransitionLog = std::vector<Transition>;

struct SupervisorOutput {
  ModeState state;
  std::optional<Transition> transition;
  bool forward_teleop = false;   // Good + Remote: operator commands drive the robot
  bool republish_goal = false;   // entering Autonomous
  bool stop = false;             // zero twist this tick
  bool run_autonomy = false;     // Autonomous: navigator owns the twist
};

/// Mode state machine, evaluated every control tick.
SupervisorOutput supervise_tick(const net::ConnectivityStatus& status, const ModeState& state, double now);

struct GoalDecision {
  ModeState state;
  bool accepted = false;
  bool replan = false;  // accepted while Autonomous
  std::string reason;
};

/// Stores an operator goal as the last known destination. Goals outside the
/// map extent are rejected and leave the state untouched.
GoalDecision handle_goal(const GoalMsg& msg, const ModeState& state, const GridGeometry& map_extent);

struct AgentConfig {
  int connectivity_k = 3;
  net::PingConfig ping;
  double cmd_timeout = 0.25;     // s; stale teleop commands are ignored
  bool remote_autonav = false;   // follow the planned path in Remote mode too
  VelocityLimits limits;
  nav::InflationParams inflation;
  nav::PlannerParams planner;
  nav::ReplanParams replan;
  nav::FollowerParams follower;
  double goal_tol_pos = 0.10;
  double goal_tol_ang = 0.35;
  bool goal_check_heading = false;
  double start_search_radius = 0.3;  // m, when the robot's own cell is inscribed
  double odom_rate = 10.0;       // Hz
  double map_rate = 1.0;         // Hz
};

void to_json(json& j, const AgentConfig& c);
void from_json(const json& j, AgentConfig& c);

/// Navigation memory carried between autonomous ticks.
struct NavState {
  std::optional<nav::PlanPath> plan;
  std::optional<nav::Costmap> costmap;
  bool goal_reached = false;
  std::optional<Pose2D> reached_for;  // goal pose the idle state belongs to
  std::string last_error;
};

struct NavTick {
  Twist twist;
  bool replanned = false;
  std::string replan_reason;
  bool goal_reached = false;
  std::string error;
};

/// One autonomous control step: refresh the plan if needed, then follow it.
/// Planner failures stop the robot; the next tick retries.
NavTick autonomous_tick(NavState& nav, const AgentConfig& cfg, const nav::Costmap& costmap, const Pose2D& pose,
                        const GoalMsg& goal, double now);

/// Events the agent reports to whoever runs it (metrics, traces).
struct AgentEvent {
  double t = 0.0;
  std::string kind;  // connectivity, transition, goal_republished, goal_accepted, goal_rejected, replan,
                     // goal_reached, nav_error
  json detail;
};

/// Robot-side supervisor. Owns the local bus, the map, navigation state, and
/// the mode machine. Inbound operator traffic is queued and drained at the
/// start of each control tick; telemetry leaves through the uplink callback.
class RobotAgent {
 public:
  using Uplink = std::function<void(const Envelope&)>;
  using EventSink = std::function<void(const AgentEvent&)>;

  RobotAgent(AgentConfig cfg, GridGeometry map_geometry, Uplink uplink);
  RobotAgent(const RobotAgent&) = delete;
  RobotAgent& operator=(const RobotAgent&) = delete;

  /// Starts from a previously saved map instead of an empty one.
  void preload_map(mapping::OccupancyGrid map);
  void set_event_sink(EventSink sink) { events_ = std::move(sink); }

  /// Link delivery. Pongs resolve pings at their arrival time; other topics
  /// are queued for the next tick.
  void on_link_envelope(const Envelope& e, double arrival);

  /// New scan from the sensor, with the odometric pose at capture time.
  void on_scan(const LaserScan& scan, const Pose2D& odom_pose);

  /// One control tick; returns the twist to apply.
  Twist tick(double now, const Pose2D& odom_pose);

  const ModeState& mode_state() const { return state_; }
  const TransitionLog& transitions() const { return log_; }
  const net::ConnectivityStatus& connectivity() const { return classifier_.status(); }
  const mapping::OccupancyGrid& map() const { return map_; }
  const NavState& nav_state() const { return nav_; }
  const std::optional<GoalMsg>& nav_goal() const { return nav_goal_; }
  const std::vector<net::PingRecord>& ping_history() const { return ping_history_; }
  TopicBus& bus() { return bus_; }

 private:
  void emit(double t, std::string kind, json detail = json::object());
  void publish_mode(double now, json extra = json::object());
  void refresh_costmap();
  void update_plan_for_display(double now, const Pose2D& pose);

  void send_telemetry(Publisher& pub, json payload, double stamp);

  AgentConfig cfg_;
  GridGeometry map_geometry_;
  Uplink uplink_;
  EventSink events_;

  TopicBus bus_;
  // Supervisor -> navigator goal handoff on the local goal topic.
  Publisher goal_republish_;
  Subscription nav_goal_sub_;
  // Telemetry; every envelope published here also leaves through the uplink.
  Publisher odom_pub_, scan_pub_, map_pub_, plan_pub_, mode_pub_, ping_pub_;

  std::deque<Envelope> inbox_;  // operator traffic awaiting the next tick

  mapping::OccupancyGrid map_;
  bool map_dirty_ = true;
  std::deque<std::pair<LaserScan, Pose2D>> pending_scans_;

  net::PingMonitor pings_;
  net::ConnectivityClassifier classifier_;
  std::vector<net::PingRecord> ping_history_;

  ModeState state_;
  TransitionLog log_;
  std::optional<Twist> last_cmd_;
  double last_cmd_at_ = -1e9;
  std::optional<GoalMsg> nav_goal_;
  NavState nav_;

  std::uint64_t ticks_ = 0;
  double next_odom_ = 0.0;
  double next_map_ = 0.0;
  double published_plan_stamp_ = -1.0;
};

}  // namespace teleop::robot
