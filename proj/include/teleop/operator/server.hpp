#pragma once

#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "teleop/core/bus.hpp"
#include "teleop/core/grid.hpp"
#include "teleop/mapping/occupancy_grid.hpp"
#include "teleop/operator/twin.hpp"
#include "teleop/operator/walls.hpp"

namespace teleop::ops {

/// Operator action, from the UI gateway or from a scenario script. The JSON
/// form is the gateway input message (see PROTOCOL.md).
struct OperatorInput {
  enum class Kind : std::uint8_t { Teleop, Goal, Outage, Restore };
  Kind kind = Kind::Teleop;
  Twist twist;
  Pose2D goal;
  double duration = 0.0;  // Outage; 0 means until restored
  bool latched = false;   // Teleop held until replaced (scripts) instead of expiring
};

const char* to_string(OperatorInput::Kind k);

/// Parses {"type": "teleop" | "goal" | "control", ...}. Throws SchemaError.
OperatorInput parse_input(const json& j);
json input_to_json(const OperatorInput& in);

struct ScriptStep {
  double t = 0.0;
  OperatorInput input;
};

/// Scripts are arrays of input messages with an extra "t" field, sorted by t.
std::vector<ScriptStep> parse_script(const json& j);

struct OperatorConfig {
  TwinConfig twin;
  WallParams walls;
  double teleop_rate = 20.0;         // Hz, /cmd_vel while a teleop input is held
  double ui_teleop_timeout = 0.5;    // s, unlatched teleop expires without refresh
  double ping_interval = 0.1;        // s, expected robot ping period
  int connectivity_k = 3;            // missed pings before the operator side reports Bad
  std::optional<GridGeometry> map_extent;  // goals outside are refused locally
  VelocityLimits limits;
};

/// Operator endpoint. Owns the twin, wall segments, the latest map, plan and
/// mode, and turns operator inputs into link traffic. Everything except
/// submit() must be called from the thread that drives the simulation.
class OperatorServer {
 public:
  using Downlink = std::function<void(const Envelope&)>;
  using ControlHandler = std::function<void(const OperatorInput&, double now)>;
  using EventSink = std::function<void(double t, const std::string& kind, const json& detail)>;

  OperatorServer(OperatorConfig cfg, Downlink downlink);
  OperatorServer(const OperatorServer&) = delete;
  OperatorServer& operator=(const OperatorServer&) = delete;

  void set_script(std::vector<ScriptStep> script) { script_ = std::move(script); next_step_ = 0; }
  void set_control_handler(ControlHandler h) { control_ = std::move(h); }
  void set_event_sink(EventSink s) { events_ = std::move(s); }

  /// Queues a UI input for the next tick. Thread-safe.
  void submit(OperatorInput in);

  /// Link delivery. Pings are echoed immediately.
  void on_link_envelope(const Envelope& e, double arrival);

  /// Applies due inputs, advances prediction and blending, sends teleop.
  void tick(double now);

  /// State frame carrying map and plan only when they changed since the
  /// previous frame(). Walls, twin, mode and connectivity are always present.
  json frame(double now);
  /// Full state for a newly joined UI session.
  json snapshot(double now) const;

  const TwinState& twin() const { return twin_; }
  const std::vector<double>& teleports() const { return teleports_; }
  std::uint64_t malformed() const { return malformed_; }
  std::uint64_t stale_discarded() const { return stale_; }
  const std::optional<Pose2D>& active_goal() const { return active_goal_; }
  const WallSegmentSet& walls() const { return walls_; }
  const std::optional<mapping::OccupancyMsg>& map() const { return map_; }
  bool operator_link_good(double now) const;
  const json& mode() const { return mode_; }

 private:
  void apply(const OperatorInput& in, double now);
  void emit(double t, const std::string& kind, json detail = json::object());
  void ingest(const Envelope& e, double arrival);
  json base_frame(const char* type, double now) const;

  OperatorConfig cfg_;
  Downlink downlink_;
  ControlHandler control_;
  EventSink events_;

  TopicBus bus_;
  Publisher cmd_pub_, goal_pub_, pong_pub_;

  std::mutex input_mutex_;
  std::deque<OperatorInput> inputs_;
  std::vector<ScriptStep> script_;
  std::size_t next_step_ = 0;

  std::optional<Twist> held_;
  bool held_latched_ = false;
  double held_at_ = 0.0;
  double next_teleop_ = 0.0;

  TwinState twin_;
  double last_tick_ = 0.0;
  WallSegmentSet walls_;
  std::optional<mapping::OccupancyMsg> map_;
  std::uint64_t map_version_ = 0, map_sent_ = 0;
  std::uint64_t plan_version_ = 0, plan_sent_ = 0;
  json mode_ = json::object();
  std::optional<Pose2D> active_goal_;
  std::vector<std::string> notices_;

  std::map<std::string, std::uint64_t, std::less<>> last_seq_;
  std::optional<double> last_ping_at_;
  std::vector<double> teleports_;
  std::uint64_t malformed_ = 0;
  std::uint64_t stale_ = 0;
};

}  // namespace teleop::ops
