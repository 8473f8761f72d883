#include <doctest.h>

#include <atomic>
#include <cmath>
#include <numbers>
#include <random>
#include <thread>

#include "../oracles.hpp"
#include "teleop/core/bus.hpp"
#include "teleop/core/event_queue.hpp"
#include "teleop/core/geometry.hpp"
#include "teleop/core/grid.hpp"
#include "teleop/core/messages.hpp"

using namespace teleop;
using std::numbers::pi;

TEST_SUITE("core") {
  TEST_CASE("normalize_angle examples") {
    CHECK(normalize_angle(0.0) == 0.0);
    CHECK(normalize_angle(3.0 * pi) == doctest::Approx(pi).epsilon(1e-15));
    CHECK(normalize_angle(-pi) == doctest::Approx(pi));
    CHECK(normalize_angle(pi) == pi);
    // -7.5 reduced by repeated +2pi: -7.5 + 2pi = -1.2168146928204138
    CHECK(normalize_angle(-7.5) == doctest::Approx(oracle::normalize_by_loop(-7.5)).epsilon(1e-14));
    CHECK(normalize_angle(-7.5) == doctest::Approx(-1.2168146928204138).epsilon(1e-14));
  }

  TEST_CASE("normalize_angle rejects non-finite input") {
    CHECK_THROWS_AS(normalize_angle(std::nan("")), std::domain_error);
    CHECK_THROWS_AS(normalize_angle(INFINITY), std::domain_error);
  }

  TEST_CASE("normalize_angle agrees with the loop oracle and is idempotent") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    for (int i = 0; i < 5000; ++i) {
      const double x = u(rng);
      const double n = normalize_angle(x);
      CHECK(n > -pi);
      CHECK(n <= pi);
      CHECK(n == doctest::Approx(oracle::normalize_by_loop(x)).epsilon(1e-12));
      CHECK(normalize_angle(n) == n);
      CHECK(std::remainder(n - x, 2.0 * pi) == doctest::Approx(0.0).epsilon(1e-12));
    }
  }

  TEST_CASE("clamp_twist and interpolate") {
    CHECK(clamp_twist({2.0, -3.0}, {}) == Twist{0.5, -1.5});
    CHECK(clamp_twist({0.1, 0.2}, {}) == Twist{0.1, 0.2});
    const Pose2D mid = interpolate({0, 0, 3.0}, {2, 4, -3.0}, 0.5);
    CHECK(mid.x == 1.0);
    CHECK(mid.y == 2.0);
    // Shortest arc between 3.0 and -3.0 goes through pi, not 0.
    CHECK(std::abs(mid.theta) == doctest::Approx(pi));
  }

  TEST_CASE("world_to_grid examples") {
    CHECK(world_to_grid({0.0, 0.0}, {}, 0.05) == GridIndex{0, 0});
    CHECK(world_to_grid({1.0, 0.5}, {}, 0.05) == GridIndex{20, 10});
    CHECK_THROWS_AS(world_to_grid({-0.01, 0.0}, {}, 0.05), OutOfBounds);
    CHECK_THROWS_AS(world_to_grid({0.0, 0.0}, {}, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(world_to_grid({NAN, 0.0}, {}, 0.05), std::invalid_argument);
  }

  TEST_CASE("grid center inverse lands within half a cell") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    const Pose2D origin{-2.0, 1.5, 0.0};
    for (int i = 0; i < 2000; ++i) {
      const Vec2 p{origin.x + u(rng), origin.y + u(rng)};
      const GridIndex c = world_to_grid(p, origin, 0.05);
      const Vec2 back = grid_to_world(c, origin, 0.05);
      CHECK(std::abs(back.x - p.x) <= 0.025 + 1e-12);
      CHECK(std::abs(back.y - p.y) <= 0.025 + 1e-12);
      CHECK(world_to_grid(back, origin, 0.05) == c);
    }
  }

  TEST_CASE("GridGeometry checked access") {
    GridGeometry g{0.1, 10, 5, {0, 0, 0}};
    CHECK(g.to_index({0.95, 0.45}) == GridIndex{9, 4});
    CHECK_THROWS_AS(g.to_index({1.0, 0.2}), OutOfBounds);
    CHECK(g.center({0, 0}).x == doctest::Approx(0.05));
  }

  TEST_CASE("raster_line examples") {
    CHECK(raster_line({0, 0}, {0, 0}) == std::vector<GridIndex>{{0, 0}});
    CHECK(raster_line({0, 0}, {3, 0}) == std::vector<GridIndex>{{0, 0}, {1, 0}, {2, 0}, {3, 0}});
    CHECK(raster_line({0, 0}, {5, 3}) == oracle::dense_line({0, 0}, {5, 3}, 2 * 5 * 3 * 10 + 1));
  }

  TEST_CASE("raster_line matches the dense-sampling oracle") {
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<int> u(-12, 12);
    for (int i = 0; i < 1500; ++i) {
      const GridIndex a{u(rng) + 20, u(rng) + 20};
      const GridIndex b{u(rng) + 20, u(rng) + 20};
      const int dx = std::abs(a.col - b.col), dy = std::abs(a.row - b.row);
      const auto line = raster_line(a, b);
      REQUIRE(line == oracle::dense_line(a, b, 2 * (dx + 1) * (dy + 1) * 8 + 1));
      CHECK(line.front() == a);
      CHECK(line.back() == b);
      for (std::size_t k = 1; k < line.size(); ++k) {
        CHECK(std::abs(line[k].col - line[k - 1].col) <= 1);
        CHECK(std::abs(line[k].row - line[k - 1].row) <= 1);
      }
    }
  }

  TEST_CASE("bus: single subscriber receives one envelope") {
    TopicBus bus;
    auto sub = bus.subscribe(topics::kOdom);
    auto pub = bus.advertise(topics::kOdom);
    pub.publish(json{{"x", 1}}, 0.5);
    auto e = sub.poll();
    REQUIRE(e);
    CHECK(e->topic == "/odom");
    CHECK(e->seq == 1);
    CHECK(e->stamp == 0.5);
    CHECK_FALSE(sub.poll());
  }

  TEST_CASE("bus: seq strictly increasing over 100 publishes") {
    TopicBus bus;
    auto sub = bus.subscribe(topics::kScan);
    auto pub = bus.advertise(topics::kScan);
    for (int i = 0; i < 100; ++i) pub.publish(json(i), i);
    const auto all = sub.drain();
    REQUIRE(all.size() == 100);
    for (std::size_t i = 0; i < all.size(); ++i) CHECK(all[i].seq == i + 1);
  }

  TEST_CASE("bus: two subscribers each receive all 10") {
    TopicBus bus;
    auto a = bus.subscribe(topics::kPlan);
    auto b = bus.subscribe(topics::kPlan);
    auto pub = bus.advertise(topics::kPlan);
    for (int i = 0; i < 10; ++i) pub.publish(json(i), 0.0);
    // Expected deliveries enumerated: every (subscriber, message) pair once.
    std::set<std::pair<int, std::uint64_t>> seen;
    for (const auto& e : a.drain()) seen.insert({0, e.seq});
    for (const auto& e : b.drain()) seen.insert({1, e.seq});
    CHECK(seen.size() == 20);
  }

  TEST_CASE("bus: unknown topics rejected") {
    TopicBus bus;
    CHECK_THROWS_AS(bus.subscribe("/odometry"), UnknownTopic);
    CHECK_THROWS_AS(bus.advertise("/cmd"), UnknownTopic);
  }

  TEST_CASE("bus: late subscriber and dropped subscription") {
    TopicBus bus;
    auto pub = bus.advertise(topics::kMode);
    pub.publish(json(1), 0.0);
    auto late = bus.subscribe(topics::kMode);
    CHECK(late.pending() == 0);
    {
      auto temp = bus.subscribe(topics::kMode);
      CHECK(bus.subscriber_count(topics::kMode) == 2);
    }
    pub.publish(json(2), 0.0);
    CHECK(late.pending() == 1);
    CHECK(bus.subscriber_count(topics::kMode) == 1);
  }

  TEST_CASE("bus: concurrent publishers keep per-publisher order without gaps") {
    TopicBus bus;
    auto sub = bus.subscribe(topics::kOdom);
    constexpr int kThreads = 4;
    constexpr int kEach = 2000;
    std::vector<std::thread> threads;
    for (int t = 0; t < kThreads; ++t) {
      threads.emplace_back([&bus, t] {
        auto pub = bus.advertise(topics::kOdom);
        for (int i = 0; i < kEach; ++i) pub.publish(json{{"pub", t}}, 0.0);
      });
    }
    for (auto& th : threads) th.join();
    std::vector<std::uint64_t> last(kThreads, 0);
    const auto all = sub.drain();
    CHECK(all.size() == kThreads * kEach);
    for (const auto& e : all) {
      const int p = e.payload["pub"].get<int>();
      CHECK(e.seq == last[static_cast<std::size_t>(p)] + 1);
      last[static_cast<std::size_t>(p)] = e.seq;
    }
  }

  TEST_CASE("event queue runs in (time, insertion) order") {
    EventQueue q;
    std::vector<int> order;
    q.schedule(SimTime{200}, [&] { order.push_back(3); });
    q.schedule(SimTime{100}, [&] { order.push_back(1); });
    q.schedule(SimTime{100}, [&] {
      order.push_back(2);
      q.schedule(SimTime{50}, [&] { order.push_back(4); });  // past: runs at now
    });
    q.run_until(SimTime{150});
    CHECK(order == std::vector<int>{1, 2, 4});
    CHECK(q.now() == SimTime{150});
    q.run_until(SimTime{1000});
    CHECK(order == std::vector<int>{1, 2, 4, 3});
  }

  TEST_CASE("message JSON round trips") {
    LaserScan s = LaserScan::with_beams(4);
    s.ranges = {1.0, 2.0, s.no_return_value(), 0.1};
    const auto back = json(s).get<LaserScan>();
    CHECK(back.ranges == s.ranges);
    CHECK(back.angle_increment == s.angle_increment);
    CHECK_FALSE(back.has_return(2));
    CHECK_FALSE(back.has_return(3));
    CHECK(s.angle_increment == doctest::Approx(pi / 2));
    CHECK(LaserScan::with_beams().ranges.size() == 1147);

    GoalMsg g{1.5, "map", {1, 2, 0.5}};
    CHECK(json(g).get<GoalMsg>() == g);
    json bad = g;
    bad["frame"] = "odom";
    CHECK_THROWS(bad.get<GoalMsg>());

    Envelope e{"/odom", 7, 0.25, json{{"a", 1}}};
    const auto eb = json(e).get<Envelope>();
    CHECK(eb.topic == e.topic);
    CHECK(eb.seq == 7);
    CHECK(eb.payload == e.payload);
    CHECK(json::parse(R"({"x":1,"y":2})").get<Vec2>() == Vec2{1, 2});
    CHECK(json::parse("[1,2]").get<Vec2>() == Vec2{1, 2});
  }
}
