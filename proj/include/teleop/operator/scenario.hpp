#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "teleop/core/event_queue.hpp"
#include "teleop/core/grid.hpp"
#include "teleop/netlink/link.hpp"
#include "teleop/operator/metrics.hpp"
#include "teleop/operator/server.hpp"
#include "teleop/robot/agent.hpp"
#include "teleop/worldsim/robot.hpp"
#include "teleop/worldsim/world.hpp"

namespace teleop::ops {

/// Everything a headless run needs. Loaded from a scenario file whose
/// "world" is either an inline world object or a path relative to the file.
struct ScenarioConfig {
  std::string name;
  sim::WorldModel world;
  net::LinkConfig link;  // link.seed defaults to seed
  robot::AgentConfig agent;
  OperatorConfig operator_cfg;
  sim::SensorNoise noise;  // rng_seed defaults to seed + 1
  GridGeometry map_geometry;
  std::vector<ScriptStep> script;
  double duration = 30.0;
  std::uint64_t seed = 0;

  /// Re-seeds the link and sensor generators from a new run seed.
  void reseed(std::uint64_t s);
};

/// Throws SchemaError on any violation; nothing is simulated on failure.
ScenarioConfig scenario_from_json(const json& j, const std::filesystem::path& base_dir = {});
ScenarioConfig load_scenario(const std::filesystem::path& path);

/// Map covering the world bounds plus `margin` on every side. The margin keeps
/// walls drawn on the bounds inside the grid, so their hits are recorded.
GridGeometry map_geometry_for(const sim::WorldModel& w, double resolution = 0.05, double margin = 0.25);

/// Robot world, agent, link and operator wired onto one virtual clock.
/// Events at equal times run in scheduling order, so a run is a pure function
/// of the scenario (and seed).
class Simulation {
 public:
  using FrameSink = std::function<void(const json& frame, double now)>;

  explicit Simulation(ScenarioConfig cfg);
  ~Simulation();
  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  /// JSON-lines event trace destination (optional).
  void set_trace(std::ostream* out) { trace_ = out; }
  /// Receives one state frame per operator tick (optional; frames are only
  /// built when a sink is set).
  void set_frame_sink(FrameSink sink) { frames_ = std::move(sink); }

  /// Runs every event up to and including t (clamped to the duration).
  void advance_to(double t);
  void run() { advance_to(cfg_.duration); }
  bool finished() const;
  double now() const;

  RunMetrics metrics() const;
  const ScenarioConfig& config() const { return cfg_; }
  const sim::WorldModel& world() const { return world_; }
  const sim::RobotState& robot_state() const { return robot_; }
  robot::RobotAgent& agent() { return *agent_; }
  OperatorServer& operator_server() { return *operator_; }
  net::SimLink& link() { return *link_; }

 private:
  void trace(json line);
  void control_tick();
  void scan_tick(std::int64_t k);
  void operator_tick();

  ScenarioConfig cfg_;
  EventQueue clock_;
  sim::WorldModel world_;
  sim::RobotState robot_;
  Rng sensor_rng_;
  Rng odom_rng_;
  std::unique_ptr<net::SimLink> link_;
  std::unique_ptr<robot::RobotAgent> agent_;
  std::unique_ptr<OperatorServer> operator_;
  std::ostream* trace_ = nullptr;
  FrameSink frames_;

  Twist pending_cmd_;
  double path_length_ = 0.0;
  int collisions_ = 0;
  std::uint64_t arrived_ = 0;
  bool in_collision_ = false;
  std::optional<double> time_to_goal_;
  std::optional<Pose2D> goal_for_timing_;
};

struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::ostream* trace = nullptr;
};

/// Headless run at full speed on the virtual clock.
RunMetrics run_scenario(ScenarioConfig cfg, const RunOptions& opts = {});

/// Reads a JSON-lines trace and recomputes the run summary from it.
json summarize_trace(std::istream& in);

}  // namespace teleop::ops
