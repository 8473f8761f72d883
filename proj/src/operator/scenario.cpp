#include "teleop/operator/scenario.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include "teleop/core/errors.hpp"
#include "teleop/worldsim/lidar.hpp"

namespace teleop::ops {

void ScenarioConfig::reseed(std::uint64_t s) {
  seed = s;
  link.seed = s;
  noise.rng_seed = s + 1;
}

GridGeometry map_geometry_for(const sim::WorldModel& w, double resolution, double margin) {
  if (!(resolution > 0.0)) throw SchemaError("scenario: map resolution must be positive");
  GridGeometry g;
  g.resolution = resolution;
  g.origin = {w.bounds.min_x - margin, w.bounds.min_y - margin, 0.0};
  g.width = static_cast<int>(std::ceil((w.bounds.width() + 2 * margin) / resolution - 1e-9));
  g.height = static_cast<int>(std::ceil((w.bounds.height() + 2 * margin) / resolution - 1e-9));
  return g;
}

namespace {

const std::set<std::string> kScenarioKeys = {"schema", "name",  "world", "duration", "seed", "link", "agent",
                                             "twin",   "noise", "map",   "script",   "walls"};

sim::WorldModel resolve_world(const json& w, const std::filesystem::path& base_dir) {
  if (w.is_string()) {
    std::filesystem::path p = w.get<std::string>();
    if (p.is_relative()) p = base_dir / p;
    return sim::load_world(p);
  }
  if (w.is_object()) return sim::world_from_json(w);
  throw SchemaError("scenario: \"world\" must be a path or a world object");
}

}  // namespace

ScenarioConfig scenario_from_json(const json& j, const std::filesystem::path& base_dir) {
  try {
    if (!j.is_object()) throw SchemaError("scenario: expected an object");
    if (j.value("schema", 0) != 1) throw SchemaError("scenario: unsupported or missing \"schema\" (expected 1)");
    for (const auto& [key, value] : j.items()) {
      if (!kScenarioKeys.contains(key)) throw SchemaError("scenario: unknown key \"" + key + "\"");
    }
    ScenarioConfig c;
    c.name = j.value("name", std::string("scenario"));
    if (!j.contains("world")) throw SchemaError("scenario: missing \"world\"");
    c.world = resolve_world(j["world"], base_dir);
    c.duration = j.at("duration").get<double>();
    if (!(c.duration > 0.0) || !std::isfinite(c.duration)) throw SchemaError("scenario: duration must be positive");
    c.seed = j.value("seed", std::uint64_t{0});

    const json link = j.value("link", json::object());
    c.link = link.get<net::LinkConfig>();
    if (!link.contains("seed")) c.link.seed = c.seed;

    c.agent = j.value("agent", json::object()).get<robot::AgentConfig>();
    c.agent.inflation.robot_radius = j.value("agent", json::object()).value("robot_radius", c.world.robot_radius);

    const json noise = j.value("noise", json::object());
    c.noise.range_noise_rel = noise.value("range_noise_rel", c.noise.range_noise_rel);
    c.noise.range_noise_rel_far = noise.value("range_noise_rel_far", c.noise.range_noise_rel_far);
    c.noise.odom_noise_std_v = noise.value("odom_noise_std_v", c.noise.odom_noise_std_v);
    c.noise.odom_noise_std_w = noise.value("odom_noise_std_w", c.noise.odom_noise_std_w);
    c.noise.rng_seed = noise.value("seed", c.seed + 1);
    if (c.noise.range_noise_rel < 0.0 || c.noise.range_noise_rel_far < 0.0 || c.noise.odom_noise_std_v < 0.0 ||
        c.noise.odom_noise_std_w < 0.0) {
      throw SchemaError("scenario: noise levels must be non-negative");
    }

    const json map = j.value("map", json::object());
    c.map_geometry = map_geometry_for(c.world, map.value("resolution", 0.05), map.value("margin", 0.25));
    if (map.contains("origin")) c.map_geometry.origin = map["origin"].get<Pose2D>();
    c.map_geometry.width = map.value("width", c.map_geometry.width);
    c.map_geometry.height = map.value("height", c.map_geometry.height);
    if (c.map_geometry.width <= 0 || c.map_geometry.height <= 0) throw SchemaError("scenario: empty map");
    if (!c.map_geometry.contains_point(c.world.robot_start.position())) {
      throw SchemaError("scenario: robot_start outside the map");
    }

    auto& op = c.operator_cfg;
    const json twin = j.value("twin", json::object());
    op.twin.staleness = twin.value("staleness", op.twin.staleness);
    op.twin.v_pred = twin.value("v_pred", c.agent.limits.v_max);
    op.twin.smoothing_T = twin.value("smoothing_T", op.twin.smoothing_T);
    if (!(op.twin.staleness > 0.0) || !(op.twin.v_pred >= 0.0) || !(op.twin.smoothing_T >= 0.0)) {
      throw SchemaError("scenario: twin staleness must be positive, v_pred and smoothing_T non-negative");
    }
    const json walls = j.value("walls", json::object());
    op.walls.link_distance = walls.value("link_distance", op.walls.link_distance);
    op.walls.expiry = walls.value("expiry", op.walls.expiry);
    op.ping_interval = c.agent.ping.interval;
    op.connectivity_k = c.agent.connectivity_k;
    op.limits = c.agent.limits;
    op.map_extent = c.map_geometry;

    c.script = parse_script(j.value("script", json::array()));
    for (const auto& s : c.script) {
      if (s.t > c.duration) throw SchemaError("scenario: script step after the end of the run");
    }
    return c;
  } catch (const SchemaError&) {
    throw;
  } catch (const std::exception& e) {
    throw SchemaError(std::string("scenario: ") + e.what());
  }
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("scenario: cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw SchemaError("scenario: " + path.string() + ": " + e.what());
  }
  return scenario_from_json(j, path.parent_path());
}

namespace {

constexpr SimTime kControlPeriod{20'000};
constexpr SimTime kOperatorPeriod{50'000};

SimTime scan_time(std::int64_t k) {
  return SimTime{static_cast<std::int64_t>(std::llround(static_cast<double>(k) * 1e6 / LaserScan::kDefaultRateHz))};
}

}  // namespace

Simulation::Simulation(ScenarioConfig cfg)
    : cfg_(std::move(cfg)),
      world_(cfg_.world),
      sensor_rng_(cfg_.noise.rng_seed),
      odom_rng_(cfg_.noise.rng_seed ^ 0x9e3779b97f4a7c15ULL) {
  robot_.pose = world_.robot_start;
  robot_.odom_pose = world_.robot_start;

  link_ = std::make_unique<net::SimLink>(clock_, cfg_.link);
  agent_ = std::make_unique<robot::RobotAgent>(cfg_.agent, cfg_.map_geometry,
                                               [this](const Envelope& e) { link_->send(net::Direction::Uplink, e); });
  operator_ = std::make_unique<OperatorServer>(cfg_.operator_cfg,
                                               [this](const Envelope& e) { link_->send(net::Direction::Downlink, e); });
  operator_->set_script(cfg_.script);

  link_->set_receiver(net::Direction::Uplink,
                      [this](const Envelope& e, double at) { operator_->on_link_envelope(e, at); });
  link_->set_receiver(net::Direction::Downlink,
                      [this](const Envelope& e, double at) { agent_->on_link_envelope(e, at); });
  link_->set_observer([this](const net::LinkEvent& ev) {
    if (ev.kind == net::LinkEvent::Kind::Deliver) ++arrived_;
    static constexpr const char* kKinds[] = {"send", "drop", "deliver"};
    json line{{"t", ev.t}, {"ev", kKinds[static_cast<int>(ev.kind)]}, {"dir", net::to_string(ev.dir)},
              {"topic", ev.topic}, {"seq", ev.seq}};
    if (ev.kind == net::LinkEvent::Kind::Drop) line["reason"] = net::to_string(ev.reason);
    trace(std::move(line));
  });
  agent_->set_event_sink([this](const robot::AgentEvent& ev) {
    json line{{"t", ev.t}, {"ev", ev.kind}};
    line.update(ev.detail);
    trace(std::move(line));
  });
  operator_->set_event_sink([this](double t, const std::string& kind, const json& detail) {
    json line{{"t", t}, {"ev", kind}};
    line.update(detail);
    trace(std::move(line));
  });
  operator_->set_control_handler([this](const OperatorInput& in, double now) {
    auto& model = link_->model();
    if (in.kind == OperatorInput::Kind::Outage) {
      model.add_outage(now, in.duration > 0.0 ? now + in.duration : std::numeric_limits<double>::max());
    } else if (in.kind == OperatorInput::Kind::Restore) {
      model.end_outage(now);
    }
  });

  clock_.schedule(SimTime{0}, [this] { operator_tick(); });
  clock_.schedule(SimTime{0}, [this] { control_tick(); });
  clock_.schedule(SimTime{0}, [this] { scan_tick(0); });
}

Simulation::~Simulation() = default;

void Simulation::trace(json line) {
  if (!trace_) return;
  // "t" and "ev" first for readability; the rest in key order.
  nlohmann::ordered_json out;
  out["t"] = line["t"];
  out["ev"] = line["ev"];
  for (const auto& [k, v] : line.items()) {
    if (k != "t" && k != "ev") out[k] = v;
  }
  *trace_ << out.dump() << '\n';
}

double Simulation::now() const { return to_seconds(clock_.now()); }

bool Simulation::finished() const { return clock_.now() >= from_seconds(cfg_.duration); }

void Simulation::advance_to(double t) { clock_.run_until(from_seconds(std::min(t, cfg_.duration))); }

void Simulation::control_tick() {
  const double t = now();
  const double dt = to_seconds(kControlPeriod);
  if (t > 0.0) world_ = sim::advance_world(world_, dt);

  const Twist cmd = agent_->tick(t, robot_.odom_pose);
  const Vec2 before = robot_.pose.position();
  robot_ = sim::step_robot(world_, robot_, cmd, dt, cfg_.agent.limits);
  robot_.odom_pose = sim::read_odometry(robot_, cfg_.noise, dt, odom_rng_);
  path_length_ += distance(before, robot_.pose.position());

  if (robot_.collision && !in_collision_) {
    ++collisions_;
    trace({{"t", t}, {"ev", "collision"}, {"pose", robot_.pose}});
  }
  in_collision_ = robot_.collision;

  const auto& goal = agent_->mode_state().last_goal;
  if (goal && (!goal_for_timing_ || !(*goal_for_timing_ == goal->pose))) {
    goal_for_timing_ = goal->pose;
    time_to_goal_.reset();
  }
  if (goal && !time_to_goal_ &&
      distance(robot_.pose.position(), goal->pose.position()) <= cfg_.agent.goal_tol_pos) {
    time_to_goal_ = t + dt;
  }

  if (clock_.now() + kControlPeriod <= from_seconds(cfg_.duration)) {
    clock_.schedule(clock_.now() + kControlPeriod, [this] { control_tick(); });
  }
}

void Simulation::scan_tick(std::int64_t k) {
  LaserScan header = LaserScan::with_beams();
  header.stamp = now();
  agent_->on_scan(sim::simulate_scan(world_, robot_.pose, header, cfg_.noise, sensor_rng_), robot_.odom_pose);
  const SimTime next = scan_time(k + 1);
  if (next <= from_seconds(cfg_.duration)) clock_.schedule(next, [this, k] { scan_tick(k + 1); });
}

void Simulation::operator_tick() {
  const double t = now();
  operator_->tick(t);
  if (frames_) {
    json f = operator_->frame(t);
    f["truth"] = {{"pose", robot_.pose}, {"collision", robot_.collision}};
    frames_(f, t);
  }
  if (clock_.now() + kOperatorPeriod <= from_seconds(cfg_.duration)) {
    clock_.schedule(clock_.now() + kOperatorPeriod, [this] { operator_tick(); });
  }
}

RunMetrics Simulation::metrics() const {
  RunMetrics m;
  m.time_to_goal = time_to_goal_;
  m.path_length = path_length_;
  m.transitions = agent_->transitions();
  m.mode_switches = static_cast<int>(m.transitions.size());
  m.teleport_distance = operator_->teleports();
  m.collision_count = collisions_;
  m.delivered = arrived_;  // in-flight envelopes at the end are not counted
  m.dropped = link_->model().dropped();
  m.malformed = operator_->malformed();
  if (const auto& goal = agent_->mode_state().last_goal) {
    m.final_goal_error = distance(robot_.pose.position(), goal->pose.position());
    m.goal_reached = time_to_goal_.has_value();
  }
  m.duration = now();
  return m;
}

RunMetrics run_scenario(ScenarioConfig cfg, const RunOptions& opts) {
  if (opts.seed) cfg.reseed(*opts.seed);
  Simulation sim(std::move(cfg));
  sim.set_trace(opts.trace);
  sim.run();
  return sim.metrics();
}

json summarize_trace(std::istream& in) {
  std::map<std::string, std::uint64_t> counts;
  json transitions = json::array();
  std::vector<double> teleports;
  std::optional<double> goal_reached_at;
  double last_t = 0.0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json ev;
    try {
      ev = json::parse(line);
    } catch (const json::exception& e) {
      throw SchemaError("trace line " + std::to_string(lineno) + ": " + e.what());
    }
    const auto kind = ev.value("ev", std::string{});
    if (kind.empty() || !ev.contains("t")) throw SchemaError("trace line " + std::to_string(lineno) + ": missing t/ev");
    ++counts[kind];
    last_t = ev["t"].get<double>();
    if (kind == "transition") {
      transitions.push_back({{"t", last_t}, {"from", ev.value("from", "")}, {"to", ev.value("to", "")}});
    } else if (kind == "reconcile") {
      teleports.push_back(ev.value("teleport_distance", 0.0));
    } else if (kind == "goal_reached" && !goal_reached_at) {
      goal_reached_at = last_t;
    }
  }
  return json{{"events", counts},
              {"mode_switches", transitions.size()},
              {"transitions", transitions},
              {"teleport_distance", teleports},
              {"collision_count", counts["collision"]},
              {"sent", counts["send"]},
              {"delivered", counts["deliver"]},
              {"dropped", counts["drop"]},
              {"goal_reached_at", goal_reached_at ? json(*goal_reached_at) : json(nullptr)},
              {"last_t", last_t}};
}

}  // namespace teleop::ops
