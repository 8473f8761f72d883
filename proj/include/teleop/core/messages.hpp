#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "teleop/core/geometry.hpp"

namespace teleop {

using json = nlohmann::json;

/// Virtual clock time. Integer microseconds keep event ordering exact.
using SimTime = std::chrono::duration<std::int64_t, std::micro>;

inline double to_seconds(SimTime t) { return static_cast<double>(t.count()) / 1e6; }
inline SimTime from_seconds(double s) { return SimTime{static_cast<std::int64_t>(std::llround(s * 1e6))}; }

namespace topics {
inline constexpr std::string_view kScan = "/scan";
inline constexpr std::string_view kOdom = "/odom";
inline constexpr std::string_view kMap = "/map";
inline constexpr std::string_view kCmdVel = "/cmd_vel";
inline constexpr std::string_view kGoal = "/move_base_simple/goal";
inline constexpr std::string_view kPlan = "/plan";
inline constexpr std::string_view kMode = "/mode";
inline constexpr std::string_view kPing = "/ping";
inline constexpr std::string_view kPong = "/pong";

inline constexpr std::array<std::string_view, 9> kRegistry = {kScan, kOdom,  kMap,  kCmdVel, kGoal,
                                                              kPlan, kMode, kPing, kPong};

bool is_registered(std::string_view topic);
}  // namespace topics

/// One 360 degree sweep. A reading greater than range_max means "no return".
struct LaserScan {
  static constexpr int kDefaultBeams = 1147;
  static constexpr double kDefaultRangeMin = 0.15;
  static constexpr double kDefaultRangeMax = 12.0;
  static constexpr double kDefaultRateHz = 5.5;

  double stamp = 0.0;
  double angle_min = -std::numbers::pi;
  double angle_increment = 2.0 * std::numbers::pi / kDefaultBeams;
  double range_min = kDefaultRangeMin;
  double range_max = kDefaultRangeMax;
  std::vector<double> ranges;

  double no_return_value() const { return range_max + 1.0; }
  bool has_return(std::size_t i) const { return ranges[i] >= range_min && ranges[i] <= range_max; }
  double bearing(std::size_t i) const { return angle_min + static_cast<double>(i) * angle_increment; }

  /// Header fields with `beams` readings, all set to "no return".
  static LaserScan with_beams(int beams = kDefaultBeams);
};

/// Operator destination, the move_base_simple/goal message.
struct GoalMsg {
  double stamp = 0.0;
  std::string frame = "map";
  Pose2D pose;
  friend bool operator==(const GoalMsg&, const GoalMsg&) = default;
};

/// Topic-addressed unit crossing the bus and the link.
struct Envelope {
  std::string topic;
  std::uint64_t seq = 0;
  double stamp = 0.0;
  json payload;
};

void to_json(json& j, const Vec2& v);
void from_json(const json& j, Vec2& v);
void to_json(json& j, const Pose2D& p);
void from_json(const json& j, Pose2D& p);
void to_json(json& j, const Twist& t);
void from_json(const json& j, Twist& t);
void to_json(json& j, const LaserScan& s);
void from_json(const json& j, LaserScan& s);
void to_json(json& j, const GoalMsg& g);
void from_json(const json& j, GoalMsg& g);
void to_json(json& j, const Envelope& e);
void from_json(const json& j, Envelope& e);

}  // namespace teleop
