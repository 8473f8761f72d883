#include <doctest.h>

#include <random>

#include "teleop/netlink/link.hpp"
#include "teleop/robot/agent.hpp"

using namespace teleop;
using namespace teleop::robot;

namespace {

const GridGeometry kExtent{0.05, 200, 120, {}};  // 10 x 6 m

GoalMsg goal_at(double x, double y) { return {0.0, "map", {x, y, 0.0}}; }

net::ConnectivityStatus status(net::LinkStatus s) { return {s, 0.0}; }

// Drives a RobotAgent at 50 Hz with an idealized echo: pings sent while the
// link is up come back 0.04 s later; operator envelopes are injected by time.
struct AgentHarness {
  std::vector<net::Outage> outages;
  std::vector<Envelope> uplink;
  std::vector<AgentEvent> events;
  RobotAgent agent;
  std::vector<std::pair<double, Envelope>> downlink;  // (deliver time, envelope)
  std::uint64_t seq = 0;

  explicit AgentHarness(std::vector<net::Outage> o, AgentConfig cfg = {})
      : outages(std::move(o)), agent(cfg, kExtent, [this](const Envelope& e) { uplink.push_back(e); }) {
    agent.set_event_sink([this](const AgentEvent& e) { events.push_back(e); });
  }

  bool up(double t) const {
    return std::none_of(outages.begin(), outages.end(), [t](const net::Outage& o) { return o.contains(t); });
  }

  void send_goal(double t, GoalMsg g) { downlink.emplace_back(t, Envelope{"/move_base_simple/goal", ++seq, t, json(g)}); }
  void send_twist(double t, Twist tw) { downlink.emplace_back(t, Envelope{"/cmd_vel", ++seq, t, json(tw)}); }

  std::vector<Twist> run(double until, Pose2D pose = {1, 3, 0}) {
    std::vector<Twist> out;
    std::size_t ping_cursor = 0, down_cursor = 0;
    std::sort(downlink.begin(), downlink.end(), [](auto& a, auto& b) { return a.first < b.first; });
    for (int k = 0; to_seconds(SimTime{k * 20000}) <= until; ++k) {
      const double now = to_seconds(SimTime{k * 20000});
      while (down_cursor < downlink.size() && downlink[down_cursor].first <= now) {
        const auto& [t, e] = downlink[down_cursor++];
        if (up(t)) agent.on_link_envelope(e, t);
      }
      out.push_back(agent.tick(now, pose));
      for (; ping_cursor < uplink.size(); ++ping_cursor) {
        const auto& e = uplink[ping_cursor];
        if (e.topic != "/ping" || !up(e.stamp) || !up(e.stamp + 0.02)) continue;
        agent.on_link_envelope({"/pong", e.seq, e.stamp, net::PingMonitor::pong_payload(e.payload["seq"])},
                               e.stamp + 0.04);
      }
    }
    return out;
  }

  std::size_t count(std::string_view topic) const {
    return std::count_if(uplink.begin(), uplink.end(), [&](const Envelope& e) { return e.topic == topic; });
  }
};

}  // namespace

TEST_SUITE("agent") {
  TEST_CASE("supervisor: Good + Remote forwards teleop") {
    const auto out = supervise_tick(status(net::LinkStatus::Good), {}, 1.0);
    CHECK(out.forward_teleop);
    CHECK_FALSE(out.transition);
  }

  TEST_CASE("supervisor: Bad + Remote + goal switches to Autonomous") {
    ModeState s;
    s.last_goal = goal_at(5, 3);
    const auto out = supervise_tick(status(net::LinkStatus::Bad), s, 2.0);
    CHECK(out.state.mode == Mode::Autonomous);
    REQUIRE(out.transition);
    CHECK(out.transition->stamp == 2.0);
    CHECK(out.republish_goal);
    CHECK(out.run_autonomy);
  }

  TEST_CASE("supervisor: Bad + Remote without goal stops in place") {
    const auto out = supervise_tick(status(net::LinkStatus::Bad), {}, 2.0);
    CHECK(out.state.mode == Mode::Remote);
    CHECK_FALSE(out.transition);
    CHECK(out.stop);
    CHECK_FALSE(out.forward_teleop);
  }

  TEST_CASE("supervisor: Good + Autonomous returns to Remote and stops") {
    ModeState s{Mode::Autonomous, goal_at(5, 3), 1.0};
    const auto out = supervise_tick(status(net::LinkStatus::Good), s, 4.0);
    CHECK(out.state.mode == Mode::Remote);
    REQUIRE(out.transition);
    CHECK(out.transition->to == Mode::Remote);
    CHECK(out.stop);
    CHECK(out.state.last_goal == s.last_goal);
  }

  TEST_CASE("handle_goal keeps the last known destination") {
    ModeState s;
    auto d = handle_goal(goal_at(2, 2), s, kExtent);
    CHECK(d.accepted);
    CHECK(d.state.last_goal == goal_at(2, 2));
    d = handle_goal(goal_at(7, 4), d.state, kExtent);
    CHECK(d.state.last_goal == goal_at(7, 4));
    CHECK_FALSE(d.replan);

    const auto out = handle_goal(goal_at(12, 4), d.state, kExtent);
    CHECK_FALSE(out.accepted);
    CHECK(out.state.last_goal == goal_at(7, 4));
    CHECK_FALSE(out.reason.empty());

    GoalMsg odd = goal_at(1, 1);
    odd.frame = "odom";
    CHECK_FALSE(handle_goal(odd, d.state, kExtent).accepted);

    ModeState autonomous{Mode::Autonomous, goal_at(1, 1), 0.0};
    CHECK(handle_goal(goal_at(3, 3), autonomous, kExtent).replan);
  }

  TEST_CASE("autonomous_tick: goal already satisfied") {
    NavState nav;
    const nav::Costmap c{kExtent, std::vector<std::uint8_t>(kExtent.size(), 0)};
    const auto t = autonomous_tick(nav, AgentConfig{}, c, {5.03, 3.0, 1.0}, goal_at(5, 3), 1.0);
    CHECK(t.goal_reached);
    CHECK(t.twist == Twist{});
    CHECK_FALSE(nav.plan);
    // Idle until the goal changes.
    CHECK(autonomous_tick(nav, AgentConfig{}, c, {4.0, 3.0, 0.0}, goal_at(5, 3), 1.1).goal_reached);
    const auto moved = autonomous_tick(nav, AgentConfig{}, c, {4.0, 3.0, 0.0}, goal_at(8, 3), 1.2);
    CHECK_FALSE(moved.goal_reached);
    CHECK(moved.twist.v > 0.0);
  }

  TEST_CASE("autonomous_tick: planner failure stops and reports") {
    NavState nav;
    nav::Costmap c{kExtent, std::vector<std::uint8_t>(kExtent.size(), 0)};
    for (int r = 0; r < kExtent.height; ++r) c.cost[kExtent.offset({100, r})] = nav::kLethalCost;
    const auto t = autonomous_tick(nav, AgentConfig{}, c, {1, 3, 0}, goal_at(8, 3), 0.0);
    CHECK(t.twist == Twist{});
    CHECK_FALSE(t.error.empty());
  }

  TEST_CASE("telemetry rates on a healthy link") {
    AgentHarness h({});
    h.run(10.0);
    const auto odom = h.count("/odom");
    CHECK(odom >= 99);
    CHECK(odom <= 101);
    CHECK(h.count("/map") == 10 + 1);
    CHECK(h.count("/ping") == 101);
    CHECK(h.agent.transitions().empty());
    CHECK(h.agent.connectivity().status == net::LinkStatus::Good);
  }

  TEST_CASE("one /mode envelope per transition") {
    AgentHarness h({{3.0, 5.0}});
    h.send_goal(0.5, goal_at(8, 3));
    h.run(8.0);
    REQUIRE(h.agent.transitions().size() == 2);
    std::size_t plain = 0, goal_status = 0;
    for (const auto& e : h.uplink) {
      if (e.topic != "/mode") continue;
      (e.payload.contains("goal_status") ? goal_status : plain)++;
    }
    CHECK(plain == 1 + 2);  // startup announcement plus one per transition
    CHECK(goal_status == 1);
  }

  TEST_CASE("teleop passes through in Remote and goes stale") {
    AgentHarness h({});
    h.send_twist(1.0, {0.3, 0.2});
    const auto cmds = h.run(2.0);
    CHECK(cmds[51] == Twist{0.3, 0.2});     // t = 1.02
    CHECK(cmds[60] == Twist{0.3, 0.2});     // t = 1.20
    CHECK(cmds[70] == Twist{});             // t = 1.40, older than cmd_timeout
  }

  TEST_CASE("outage without a goal keeps the robot stopped in Remote") {
    AgentHarness h({{1.0, 3.0}});
    h.send_twist(0.9, {0.3, 0.0});
    const auto cmds = h.run(4.0);
    CHECK(h.agent.transitions().empty());
    for (std::size_t k = 70; k < 150; ++k) CHECK(cmds[k] == Twist{});
  }

  TEST_CASE("switch timing: Autonomous within K*interval + timeout of a hard outage") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> start(1.0, 3.0);
    for (int trial = 0; trial < 10; ++trial) {
      const double t = start(rng);
      AgentHarness h({{t, t + 2.0}});
      h.send_goal(0.3, goal_at(8, 3));
      h.run(t + 1.0);
      REQUIRE(h.agent.transitions().size() == 1);
      CHECK(h.agent.transitions()[0].stamp <= t + 0.38 + 1e-9);
      CHECK(h.agent.transitions()[0].stamp > t);
    }
  }

  TEST_CASE("goal persistence across mode flapping") {
    std::vector<net::Outage> outs{{1.0, 1.6}, {2.5, 3.1}, {4.0, 4.7}, {5.5, 6.0}};
    AgentHarness h(outs);
    h.send_goal(0.2, goal_at(2, 2));
    h.send_goal(2.0, goal_at(6, 4));
    h.send_goal(2.3, goal_at(7, 1));
    h.send_goal(4.1, goal_at(9, 5));  // lost in the outage
    h.run(7.0);
    std::vector<Pose2D> republished;
    for (const auto& e : h.events) {
      if (e.kind == "goal_republished") republished.push_back(e.detail["goal"]["pose"].get<Pose2D>());
    }
    REQUIRE(republished.size() == 4);
    CHECK(republished[0] == Pose2D{2, 2, 0});
    CHECK(republished[1] == Pose2D{7, 1, 0});
    CHECK(republished[2] == Pose2D{7, 1, 0});
    CHECK(republished[3] == Pose2D{7, 1, 0});
    CHECK(h.agent.mode_state().last_goal->pose == Pose2D{7, 1, 0});
  }

  TEST_CASE("agent config JSON round trip") {
    AgentConfig c;
    c.connectivity_k = 5;
    c.limits.v_max = 0.3;
    const auto back = json(c).get<AgentConfig>();
    CHECK(back.connectivity_k == 5);
    CHECK(back.follower.limits.v_max == 0.3);
    json bad = json(c);
    bad["ping_timeout"] = 0.2;
    CHECK_THROWS_AS(bad.get<AgentConfig>(), std::invalid_argument);
  }
}
