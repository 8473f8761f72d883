#include <doctest.h>

#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "teleop/core/errors.hpp"
#include "teleop/mapping/occupancy_grid.hpp"
#include "teleop/worldsim/lidar.hpp"
#include "teleop/worldsim/world.hpp"

using namespace teleop;
using namespace teleop::mapping;

namespace {

GridGeometry geom(int w, int h, double res = 0.05, Pose2D origin = {}) { return {res, w, h, origin}; }

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("teleop_test_" + name);
}

sim::WorldModel room() {
  sim::WorldModel w;
  w.bounds = {0, 0, 8, 6};
  w.walls = {{{0, 0}, {8, 0}}, {{8, 0}, {8, 6}}, {{8, 6}, {0, 6}}, {{0, 6}, {0, 0}}, {{3, 2}, {5, 2.5}}};
  w.robot_start = {1, 1, 0};
  return w;
}

}  // namespace

TEST_SUITE("mapping") {
  TEST_CASE("empty scan frees a disk of radius range_max") {
    OccupancyGrid g(geom(600, 600));
    const Pose2D pose{15.025, 15.025, 0};
    g.integrate_scan(pose, LaserScan::with_beams());
    const auto& geo = g.geometry();
    int freed = 0;
    for (std::size_t off = 0; off < geo.size(); ++off) {
      const double l = g.logodds()[off];
      CHECK(l <= 0.0);
      const double d = distance(geo.center(geo.index_of(off)), pose.position());
      if (l < 0.0) {
        ++freed;
        CHECK(d <= 12.0 + geo.resolution);
      }
    }
    CHECK(freed > 0);
    // Along every beam the cell just inside range_max is free.
    const auto scan = LaserScan::with_beams();
    for (std::size_t i : {0u, 287u, 573u, 1000u}) {
      const double a = scan.bearing(i);
      const Vec2 p = pose.position() + Vec2{std::cos(a), std::sin(a)} * 11.9;
      CHECK(g.logodds(geo.to_index(p)) < 0.0);
    }
  }

  TEST_CASE("single ray hitting at 1.0 m") {
    OccupancyGrid g(geom(200, 200));
    LaserScan scan;
    scan.angle_min = 0.0;
    scan.ranges = {1.0};
    const Pose2D pose{2.525, 2.525, 0};  // center of cell (50, 50)
    g.integrate_scan(pose, scan);
    // Hit at x = 3.525, cell 70: 19 intermediate cells, the robot cell, the hit cell.
    for (int c = 51; c <= 69; ++c) CHECK(g.logodds({c, 50}) == -0.4);
    CHECK(g.logodds({50, 50}) == -0.4);
    CHECK(g.logodds({70, 50}) == 0.85);
    int touched = 0;
    for (double l : g.logodds()) touched += l != 0.0;
    CHECK(touched == 21);
  }

  TEST_CASE("repeated hits saturate after 5 scans") {
    OccupancyGrid g(geom(200, 200));
    LaserScan scan;
    scan.angle_min = 0.0;
    scan.ranges = {1.0};
    const Pose2D pose{2.525, 2.525, 0};
    const int needed = static_cast<int>(std::ceil(4.0 / 0.85));
    REQUIRE(needed == 5);
    for (int k = 1; k <= needed; ++k) {
      g.integrate_scan(pose, scan);
      if (k < needed) CHECK(g.logodds({70, 50}) < 4.0);
    }
    CHECK(g.logodds({70, 50}) == 4.0);
    g.integrate_scan(pose, scan);
    CHECK(g.logodds({70, 50}) == 4.0);
    for (int k = 0; k < 20; ++k) g.integrate_scan(pose, scan);
    CHECK(g.logodds({60, 50}) == -4.0);
  }

  TEST_CASE("pose outside the grid throws") {
    OccupancyGrid g(geom(10, 10));
    CHECK_THROWS_AS(g.integrate_scan({5, 5, 0}, LaserScan::with_beams()), OutOfBounds);
  }

  TEST_CASE("rays leaving the grid are truncated, never written outside") {
    OccupancyGrid g(geom(20, 20));
    g.integrate_scan({0.5, 0.5, 0}, LaserScan::with_beams());
    CHECK(g.logodds().size() == 400u);
    for (double l : g.logodds()) CHECK(l <= 0.0);
  }

  TEST_CASE("classify examples") {
    OccupancyGrid g(geom(3, 1));
    auto m = classify(g);
    CHECK(m.cells == std::vector<std::int8_t>{-1, -1, -1});
    g.set_logodds({0, 0}, 4.0);
    g.set_logodds({1, 0}, -4.0);
    CHECK(g.probability({0, 0}) == doctest::Approx(1.0 / (1.0 + std::exp(-4.0))));
    m = classify(g);
    CHECK(m.cells == std::vector<std::int8_t>{100, 0, -1});

    // Threshold edges: logit(0.65) stays unknown, just above reads occupied.
    g.set_logodds({2, 0}, std::log(0.65 / 0.35) + 1e-9);
    CHECK(classify(g).at({2, 0}) == 100);
    g.set_logodds({2, 0}, std::log(0.25 / 0.75) - 1e-9);
    CHECK(classify(g).at({2, 0}) == 0);

    CHECK_THROWS_AS(classify(g, 0.3, 0.4), std::invalid_argument);
    CHECK_THROWS_AS(classify(g, 1.0, 0.2), std::invalid_argument);
    CHECK_THROWS_AS(classify(g, 0.6, 0.0), std::invalid_argument);
  }

  TEST_CASE("set_logodds clamps") {
    OccupancyGrid g(geom(2, 2));
    g.set_logodds({1, 1}, 9.0);
    CHECK(g.logodds({1, 1}) == 4.0);
    g.set_logodds({1, 1}, -9.0);
    CHECK(g.logodds({1, 1}) == -4.0);
  }

  TEST_CASE("save/load round trips") {
    const auto path = temp_file("fresh.json");
    OccupancyGrid fresh(geom(7, 5, 0.1, {-1.0, 2.0, 0.0}));
    save_map(fresh, path);
    CHECK(load_map(path) == fresh);

    const auto w = room();
    OccupancyGrid g(geom(180, 140, 0.05, {-0.5, -0.5, 0.0}));
    sim::SensorNoise noise;
    Rng rng(21);
    for (int k = 0; k < 100; ++k) {
      const Pose2D pose{1.0 + 0.06 * k, 1.0 + 0.03 * k, 0.1 * k};
      g.integrate_scan(pose, sim::simulate_scan(w, pose, LaserScan::with_beams(), noise, rng));
    }
    const auto full = temp_file("full.json");
    save_map(g, full);
    const auto back = load_map(full);
    REQUIRE(back.logodds().size() == g.logodds().size());
    bool bit_equal = true;
    for (std::size_t i = 0; i < g.logodds().size(); ++i) {
      bit_equal = bit_equal && std::bit_cast<std::uint64_t>(g.logodds()[i]) ==
                                   std::bit_cast<std::uint64_t>(back.logodds()[i]);
    }
    CHECK(bit_equal);
    CHECK(back.geometry() == g.geometry());
    std::filesystem::remove(path);
    std::filesystem::remove(full);
  }

  TEST_CASE("malformed map files are rejected") {
    const auto path = temp_file("trunc.json");
    OccupancyGrid g(geom(30, 30));
    g.set_logodds({3, 3}, 1.25);
    save_map(g, path);
    std::string text;
    {
      std::ifstream in(path);
      text.assign(std::istreambuf_iterator<char>(in), {});
    }
    {
      std::ofstream out(path, std::ios::trunc);
      out << text.substr(0, text.size() / 2);
    }
    CHECK_THROWS_AS(load_map(path), SchemaError);

    json j = map_to_json(g);
    j["schema"] = 99;
    CHECK_THROWS_AS(map_from_json(j), SchemaError);
    j = map_to_json(g);
    j["logodds"].erase(0);
    CHECK_THROWS_AS(map_from_json(j), SchemaError);
    j = map_to_json(g);
    j["logodds"][0] = 7.5;
    CHECK_THROWS_AS(map_from_json(j), SchemaError);
    CHECK_THROWS_AS(load_map(temp_file("does_not_exist.json")), SchemaError);
    std::filesystem::remove(path);
  }

  TEST_CASE("monotone evidence over random scans") {
    const auto w = room();
    OccupancyGrid g(geom(180, 140, 0.05, {-0.5, -0.5, 0.0}));
    const auto& geo = g.geometry();
    std::set<std::size_t> endpoints, traversed;
    std::vector<std::vector<double>> history;
    Rng rng(3), pose_rng(8);
    for (int k = 0; k < 15; ++k) {
      const Pose2D pose{0.5 + 7.0 * pose_rng.uniform(), 0.5 + 1.2 * pose_rng.uniform(), 6.0 * pose_rng.uniform()};
      const auto scan = sim::simulate_scan(w, pose, LaserScan::with_beams(), sim::SensorNoise{}, rng);
      const GridIndex rc = world_to_grid(pose.position(), geo.origin, geo.resolution);
      for (std::size_t i = 0; i < scan.ranges.size(); ++i) {
        REQUIRE(scan.has_return(i));
        const double a = pose.theta + scan.bearing(i);
        const Vec2 hit = pose.position() + Vec2{std::cos(a), std::sin(a)} * scan.ranges[i];
        const GridIndex hc = world_to_grid(hit, geo.origin, geo.resolution);
        const auto line = raster_line(rc, hc);
        for (std::size_t c = 0; c + 1 < line.size(); ++c) traversed.insert(geo.offset(line[c]));
        endpoints.insert(geo.offset(hc));
      }
      g.integrate_scan(pose, scan);
      history.push_back(g.logodds());
    }
    int checked_hit = 0, checked_free = 0;
    for (std::size_t off = 0; off < geo.size(); ++off) {
      const bool e = endpoints.contains(off), t = traversed.contains(off);
      if (e == t) continue;
      for (std::size_t k = 1; k < history.size(); ++k) {
        if (e) REQUIRE(history[k][off] >= history[k - 1][off]);
        if (t) REQUIRE(history[k][off] <= history[k - 1][off]);
      }
      (e ? checked_hit : checked_free)++;
    }
    CHECK(checked_hit > 100);
    CHECK(checked_free > 1000);
  }
}
