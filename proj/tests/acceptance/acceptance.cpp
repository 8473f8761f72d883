// Headless acceptance run: one PASS/FAIL line per criterion, non-zero exit on
// any failure.
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "teleop/core/event_queue.hpp"
#include "teleop/mapping/occupancy_grid.hpp"
#include "teleop/navigation/planner.hpp"
#include "teleop/netlink/link.hpp"
#include "teleop/operator/scenario.hpp"
#include "teleop/worldsim/lidar.hpp"

using namespace teleop;

namespace {

const std::filesystem::path kData = TELEOP_DATA_DIR;
int failures = 0;

void report(int id, bool ok, const std::string& detail) {
  std::printf("%s criterion %d: %s\n", ok ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double wall_seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void planner_equivalence() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> side(8, 32), cost(0, 252);
  std::uniform_real_distribution<double> u(0, 1);
  int equal = 0, unreachable = 0;
  for (int inst = 0; inst < 100; ++inst) {
    const int w = side(rng), h = side(rng);
    nav::Costmap c{{0.05, w, h, {}}, std::vector<std::uint8_t>(static_cast<std::size_t>(w * h))};
    for (auto& v : c.cost) {
      const double r = u(rng);
      v = r < 0.15 ? nav::kLethalCost : (r < 0.2 ? nav::kInscribedCost : (r < 0.55 ? cost(rng) : 0));
    }
    const GridIndex s{0, 0}, g{w - 1, h - 1};
    c.cost[c.geometry.offset(s)] = 0;
    c.cost[c.geometry.offset(g)] = 0;
    const auto want = oracle::dijkstra(c, s, g);
    try {
      const auto got = nav::astar(c, s, g);
      if (want && got.weight.value() == want->value()) ++equal;
    } catch (const nav::PlanningError&) {
      if (!want) {
        ++equal;
        ++unreachable;
      }
    }
  }
  const double secs = wall_seconds_since(t0);
  report(1, equal == 100 && secs < 10.0,
         fmt("A* weight == Dijkstra weight on %d/100 instances (%d unreachable on both), %.2f s", equal, unreachable,
             secs));
}

// Ground truth for the mapping check.
struct Truth {
  std::vector<bool> occupied;  // cell square touches a wall or obstacle edge
  std::vector<bool> inside;    // cell center inside an obstacle
};

bool segment_touches_box(const Segment& s, double x0, double y0, double x1, double y1) {
  // Liang-Barsky clip of the segment against the closed box.
  double t0 = 0.0, t1 = 1.0;
  const double dx = s.b.x - s.a.x, dy = s.b.y - s.a.y;
  const double p[4] = {-dx, dx, -dy, dy};
  const double q[4] = {s.a.x - x0, x1 - s.a.x, s.a.y - y0, y1 - s.a.y};
  for (int i = 0; i < 4; ++i) {
    if (p[i] == 0.0) {
      if (q[i] < 0.0) return false;
    } else {
      const double r = q[i] / p[i];
      if (p[i] < 0.0) t0 = std::max(t0, r);
      else t1 = std::min(t1, r);
    }
  }
  return t0 <= t1;
}

Truth rasterize(const sim::WorldModel& w, const GridGeometry& geo) {
  Truth t{std::vector<bool>(geo.size()), std::vector<bool>(geo.size())};
  const auto segs = w.segments();
  for (std::size_t off = 0; off < geo.size(); ++off) {
    const GridIndex i = geo.index_of(off);
    const double x0 = geo.origin.x + i.col * geo.resolution, y0 = geo.origin.y + i.row * geo.resolution;
    for (const auto& s : segs) {
      if (segment_touches_box(s, x0, y0, x0 + geo.resolution, y0 + geo.resolution)) {
        t.occupied[off] = true;
        break;
      }
    }
    for (const auto& o : w.obstacles) t.inside[off] = t.inside[off] || sim::point_in_polygon(geo.center(i), o.polygon);
  }
  return t;
}

void mapping_fidelity() {
  const auto world = sim::load_world(kData / "worlds/reference.json");
  const auto geo = ops::map_geometry_for(world, 0.05);
  mapping::OccupancyGrid grid(geo);

  // Scripted tour: serpentine over the free space, 0.4 m spacing, four
  // headings per stop. Zero noise and zero drift, so odometry is the truth.
  std::vector<Pose2D> tour;
  for (int row = 0; row * 0.4 + 0.3 < world.bounds.max_y; ++row) {
    const double y = 0.3 + row * 0.4;
    for (int k = 0; k * 0.4 + 0.3 < world.bounds.max_x; ++k) {
      const double x = row % 2 ? world.bounds.max_x - 0.3 - k * 0.4 : 0.3 + k * 0.4;
      if (world.clearance({x, y}) < world.robot_radius + 0.05) continue;
      for (int h = 0; h < 4; ++h) tour.push_back({x, y, h * std::numbers::pi / 2});
    }
  }
  Rng rng(0);
  for (const auto& p : tour) {
    auto header = LaserScan::with_beams();
    grid.integrate_scan(p, sim::simulate_scan(world, p, header, sim::SensorNoise::none(), rng));
  }

  const auto msg = mapping::classify(grid);
  const auto truth = rasterize(world, geo);
  auto near_truth_occupied = [&](GridIndex i) {
    for (int dr = -1; dr <= 1; ++dr)
      for (int dc = -1; dc <= 1; ++dc) {
        const GridIndex n{i.col + dc, i.row + dr};
        if (geo.contains(n) && truth.occupied[geo.offset(n)]) return true;
      }
    return false;
  };
  std::size_t observed = 0, agree = 0;
  for (std::size_t off = 0; off < geo.size(); ++off) {
    const auto v = msg.cells[off];
    if (v == mapping::OccupancyMsg::kUnknown) continue;
    const GridIndex i = geo.index_of(off);
    const bool in_range = std::any_of(tour.begin(), tour.end(), [&](const Pose2D& p) {
      return distance(p.position(), geo.center(i)) <= 11.0;
    });
    if (!in_range) continue;
    ++observed;
    if (v == mapping::OccupancyMsg::kOccupied) agree += near_truth_occupied(i);
    else agree += !truth.occupied[off] && !truth.inside[off];
  }
  const double frac = observed ? static_cast<double>(agree) / static_cast<double>(observed) : 0.0;

  const auto path = std::filesystem::temp_directory_path() / "teleop_acceptance_map.json";
  mapping::save_map(grid, path);
  const auto back = mapping::load_map(path);
  std::filesystem::remove(path);
  bool bit_exact = back.geometry() == grid.geometry() && back.logodds().size() == grid.logodds().size();
  for (std::size_t k = 0; bit_exact && k < grid.logodds().size(); ++k) {
    bit_exact = std::bit_cast<std::uint64_t>(back.logodds()[k]) == std::bit_cast<std::uint64_t>(grid.logodds()[k]);
  }
  report(2, frac >= 0.95 && bit_exact,
         fmt("%zu scan poses, %.2f%% of %zu observed cells agree with ground truth, save/load bit-exact: %s",
             tour.size(), 100.0 * frac, observed, bit_exact ? "yes" : "no"));
}

void scan_geometry() {
  sim::WorldModel w;
  w.bounds = {0, 0, 10, 10};
  w.walls.push_back({{6.0, 0.0}, {6.0, 10.0}});
  const Pose2D pose{5.0, 5.0, 0.0};
  LaserScan header;
  header.angle_min = 0.0;
  header.ranges.assign(1, 0.0);  // one beam straight at the wall
  Rng rng(0);
  const double exact = sim::simulate_scan(w, pose, header, sim::SensorNoise::none(), rng).ranges[0];
  const double err = std::abs(exact - 1.0);

  sim::SensorNoise noise;
  noise.rng_seed = 2024;
  Rng nrng(noise.rng_seed);
  constexpr int kSamples = 10000;
  double sum = 0.0, sum2 = 0.0;
  for (int k = 0; k < kSamples; ++k) {
    const double r = sim::simulate_scan(w, pose, header, noise, nrng).ranges[0];
    sum += r;
    sum2 += r * r;
  }
  const double mean = sum / kSamples;
  const double sd = std::sqrt((sum2 - kSamples * mean * mean) / (kSamples - 1));
  const double rel = sd / 1.0;
  report(3, err <= 1e-9 && rel >= 0.008 && rel <= 0.012,
         fmt("noise-free range error %.3g m, noisy sample std %.4f%% of range over %d samples", err, 100.0 * rel,
             kSamples));
}

void failover_timing() {
  auto cfg = ops::load_scenario(kData / "scenarios/failover_timing.json");
  std::ostringstream trace;
  const auto m = ops::run_scenario(cfg, {std::nullopt, &trace});
  const auto& tr = m.transitions;
  const bool first_ok = !tr.empty() && tr[0].from == robot::Mode::Remote && tr[0].to == robot::Mode::Autonomous &&
                        tr[0].stamp >= 5.2 && tr[0].stamp <= 5.4;
  const double restore = cfg.link.outages.at(0).end;
  const bool back_ok = tr.size() >= 2 && tr[1].to == robot::Mode::Remote && tr[1].stamp >= restore &&
                       tr[1].stamp <= restore + 0.5;
  bool republished = false;
  std::istringstream lines(trace.str());
  for (std::string line; std::getline(lines, line);) {
    const auto j = json::parse(line);
    if (j["ev"] == "goal_republished" && !tr.empty() && std::abs(j["t"].get<double>() - tr[0].stamp) < 1e-9) {
      republished = true;
    }
  }
  report(4, first_ok && back_ok && republished && tr.size() == 2,
         fmt("Remote->Autonomous at %.2f s, goal republished: %s, Autonomous->Remote at %.2f s (restore %.1f s)",
             tr.empty() ? -1.0 : tr[0].stamp, republished ? "yes" : "no", tr.size() > 1 ? tr[1].stamp : -1.0,
             restore));
}

struct MidrunResult {
  ops::RunMetrics metrics;
  double v_pred = 0.0;
  double outage = 0.0;
};

MidrunResult end_to_end() {
  const auto cfg = ops::load_scenario(kData / "scenarios/outage_midrun.json");
  std::ostringstream a, b;
  const auto t0 = std::chrono::steady_clock::now();
  const auto m = ops::run_scenario(cfg, {std::nullopt, &a});
  const double secs = wall_seconds_since(t0);
  ops::run_scenario(cfg, {std::nullopt, &b});
  const bool identical = a.str() == b.str() && !a.str().empty();
  const double err = m.final_goal_error.value_or(1e9);
  report(5,
         m.goal_reached && err <= 0.10 && m.collision_count == 0 && m.mode_switches == 2 && identical && secs < 5.0,
         fmt("goal error %.3f m, %d collisions, %d mode switches, traces identical: %s, %.2f s wall", err,
             m.collision_count, m.mode_switches, identical ? "yes" : "no", secs));
  const auto& o = cfg.link.outages.at(0);
  return {m, cfg.operator_cfg.twin.v_pred, o.end - o.start};
}

void prediction_bound(const MidrunResult& midrun) {
  const double bound = midrun.v_pred * midrun.outage + 0.2;
  bool mid_ok = !midrun.metrics.teleport_distance.empty();
  double mid_max = 0.0;
  for (double d : midrun.metrics.teleport_distance) {
    mid_ok = mid_ok && d <= bound;
    mid_max = std::max(mid_max, d);
  }
  const auto cruise = ops::run_scenario(ops::load_scenario(kData / "scenarios/outage_cruise.json"));
  bool cruise_ok = !cruise.teleport_distance.empty();
  double cruise_max = 0.0;
  for (double d : cruise.teleport_distance) {
    cruise_ok = cruise_ok && d <= 0.3;
    cruise_max = std::max(cruise_max, d);
  }
  report(6, mid_ok && cruise_ok,
         fmt("outage_midrun teleport %.3f m (bound %.2f m), outage_cruise teleport %.3f m (bound 0.30 m)", mid_max,
             bound, cruise_max));
}

void link_statistics() {
  EventQueue q;
  net::SimLink link(q, {0.02, 0.005, 0.3, {}, 42});
  std::vector<std::uint64_t> seen;
  link.set_receiver(net::Direction::Uplink, [&](const Envelope& e, double) { seen.push_back(e.seq); });
  constexpr int kSends = 10000;
  for (int i = 0; i < kSends; ++i) {
    q.run_until(SimTime{static_cast<std::int64_t>(i) * 1000});
    link.send(net::Direction::Uplink, {"/odom", static_cast<std::uint64_t>(i + 1), 0.0, json::object()});
  }
  q.run_until(from_seconds(60.0));
  const double frac = static_cast<double>(seen.size()) / kSends;
  const bool fifo = std::is_sorted(seen.begin(), seen.end()) &&
                    std::adjacent_find(seen.begin(), seen.end()) == seen.end();
  report(7, frac >= 0.68 && frac <= 0.72 && fifo,
         fmt("delivered fraction %.4f over %d envelopes, FIFO: %s", frac, kSends, fifo ? "yes" : "no"));
}

}  // namespace

int main() {
  try {
    planner_equivalence();
    mapping_fidelity();
    scan_geometry();
    failover_timing();
    const auto midrun = end_to_end();
    prediction_bound(midrun);
    link_statistics();
  } catch (const std::exception& e) {
    std::printf("FAIL acceptance aborted: %s\n", e.what());
    return 2;
  }
  return failures == 0 ? 0 : 1;
}
