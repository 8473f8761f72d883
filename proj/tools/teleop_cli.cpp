#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

#include <CLI11.hpp>

#include "teleop/core/errors.hpp"
#include "teleop/io/gateway.hpp"
#include "teleop/operator/scenario.hpp"

namespace {

using teleop::json;
namespace ops = teleop::ops;

struct RunArgs {
  std::string scenario;
  bool headless = false;
  std::optional<std::uint64_t> seed;
  unsigned short ws_port = 8765;
  std::string metrics_out;
  std::string trace_out;
  double speed = 1.0;
};

void write_metrics(const json& metrics, const std::string& path) {
  if (path.empty()) return;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << metrics.dump(2) << '\n';
}

// Wall-clock run with the UI gateway. The simulation thread owns all state;
// the gateway thread only queues inputs and ships frame strings.
void run_interactive(ops::Simulation& sim, const RunArgs& args) {
  teleop::io::Gateway gateway({"0.0.0.0", args.ws_port, 8}, [&sim](const json& msg) {
    sim.operator_server().submit(ops::parse_input(msg));
  });
  std::cerr << "gateway listening on ws://0.0.0.0:" << gateway.port() << "\n";
  sim.set_frame_sink([&](const json& frame, double now) {
    std::optional<std::string> snapshot;
    if (gateway.needs_snapshot()) {
      json snap = sim.operator_server().snapshot(now);
      snap["truth"] = frame["truth"];
      snapshot = snap.dump();
    }
    gateway.publish(frame.dump(), std::move(snapshot));
  });
  const auto start = std::chrono::steady_clock::now();
  while (!sim.finished()) {
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    sim.advance_to(wall * args.speed);
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
}

int run(const RunArgs& args) {
  ops::ScenarioConfig cfg = ops::load_scenario(args.scenario);
  if (args.seed) cfg.reseed(*args.seed);

  std::ofstream trace_file;
  if (!args.trace_out.empty()) {
    trace_file.open(args.trace_out);
    if (!trace_file) throw std::runtime_error("cannot write " + args.trace_out);
  }

  const auto wall_start = std::chrono::steady_clock::now();
  ops::Simulation sim(std::move(cfg));
  if (trace_file.is_open()) sim.set_trace(&trace_file);
  if (args.headless) {
    sim.run();
  } else {
    run_interactive(sim, args);
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();

  json metrics = sim.metrics();
  metrics["scenario"] = sim.config().name;
  metrics["seed"] = sim.config().seed;
  write_metrics(metrics, args.metrics_out);
  metrics["wall_time"] = wall;
  std::cout << metrics.dump(2) << '\n';
  return 0;
}

int replay(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::cout << ops::summarize_trace(in).dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Teleoperation simulator: robot agent, lossy link, operator server"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run_cmd = app.add_subcommand("run", "Run a scenario");
  run_cmd->add_option("--scenario", run_args.scenario, "Scenario file")->required()->check(CLI::ExistingFile);
  run_cmd->add_flag("--headless", run_args.headless, "Run the virtual clock as fast as possible, no UI");
  run_cmd->add_option("--seed", run_args.seed, "Override the scenario seed");
  run_cmd->add_option("--ws-port", run_args.ws_port, "UI gateway port (interactive runs)");
  run_cmd->add_option("--metrics-out", run_args.metrics_out, "Write the metrics JSON here");
  run_cmd->add_option("--trace-out", run_args.trace_out, "Write the JSON-lines event trace here");
  run_cmd->add_option("--speed", run_args.speed, "Simulation seconds per wall second (interactive)")
      ->check(CLI::PositiveNumber);

  std::string trace_path;
  auto* replay_cmd = app.add_subcommand("replay", "Summarize a recorded trace");
  replay_cmd->add_option("--trace", trace_path, "Trace file")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run_cmd) return run(run_args);
    return replay(trace_path);
  } catch (const teleop::SchemaError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
