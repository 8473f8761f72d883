#include "teleop/core/messages.hpp"

#include <algorithm>
#include <stdexcept>

namespace teleop {

bool topics::is_registered(std::string_view topic) {
  return std::find(kRegistry.begin(), kRegistry.end(), topic) != kRegistry.end();
}

LaserScan LaserScan::with_beams(int beams) {
  if (beams <= 0) throw std::invalid_argument("LaserScan: beam count must be positive");
  LaserScan s;
  s.angle_increment = 2.0 * std::numbers::pi / beams;
  s.ranges.assign(static_cast<std::size_t>(beams), s.no_return_value());
  return s;
}

void to_json(json& j, const Vec2& v) { j = json::array({v.x, v.y}); }
void from_json(const json& j, Vec2& v) {
  if (j.is_array()) {
    v = {j.at(0).get<double>(), j.at(1).get<double>()};
  } else {
    v = {j.at("x").get<double>(), j.at("y").get<double>()};
  }
}

void to_json(json& j, const Pose2D& p) { j = json{{"x", p.x}, {"y", p.y}, {"theta", p.theta}}; }
void from_json(const json& j, Pose2D& p) {
  p.x = j.at("x").get<double>();
  p.y = j.at("y").get<double>();
  p.theta = normalize_angle(j.value("theta", 0.0));
}

void to_json(json& j, const Twist& t) { j = json{{"v", t.v}, {"w", t.w}}; }
void from_json(const json& j, Twist& t) {
  t.v = j.at("v").get<double>();
  t.w = j.at("w").get<double>();
}

void to_json(json& j, const LaserScan& s) {
  j = json{{"stamp", s.stamp},         {"angle_min", s.angle_min}, {"angle_increment", s.angle_increment},
           {"range_min", s.range_min}, {"range_max", s.range_max}, {"ranges", s.ranges}};
}
void from_json(const json& j, LaserScan& s) {
  s.stamp = j.at("stamp").get<double>();
  s.angle_min = j.at("angle_min").get<double>();
  s.angle_increment = j.at("angle_increment").get<double>();
  s.range_min = j.at("range_min").get<double>();
  s.range_max = j.at("range_max").get<double>();
  s.ranges = j.at("ranges").get<std::vector<double>>();
}

void to_json(json& j, const GoalMsg& g) { j = json{{"stamp", g.stamp}, {"frame", g.frame}, {"pose", g.pose}}; }
void from_json(const json& j, GoalMsg& g) {
  g.stamp = j.value("stamp", 0.0);
  g.frame = j.value("frame", std::string{"map"});
  if (g.frame != "map") throw std::invalid_argument("GoalMsg: frame must be \"map\", got \"" + g.frame + "\"");
  g.pose = j.at("pose").get<Pose2D>();
}

void to_json(json& j, const Envelope& e) {
  j = json{{"topic", e.topic}, {"seq", e.seq}, {"stamp", e.stamp}, {"payload", e.payload}};
}
void from_json(const json& j, Envelope& e) {
  e.topic = j.at("topic").get<std::string>();
  e.seq = j.at("seq").get<std::uint64_t>();
  e.stamp = j.at("stamp").get<double>();
  e.payload = j.at("payload");
}

}  // namespace teleop
