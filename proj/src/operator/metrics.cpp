#include "teleop/operator/metrics.hpp"

namespace teleop::ops {

void to_json(json& j, const RunMetrics& m) {
  json transitions = json::array();
  for (const auto& t : m.transitions) {
    transitions.push_back(
        {{"stamp", t.stamp}, {"from", robot::to_string(t.from)}, {"to", robot::to_string(t.to)}, {"reason", t.reason}});
  }
  j = json{{"time_to_goal", m.time_to_goal ? json(*m.time_to_goal) : json(nullptr)},
           {"path_length", m.path_length},
           {"mode_switches", m.mode_switches},
           {"teleport_distance", m.teleport_distance},
           {"collision_count", m.collision_count},
           {"delivered", m.delivered},
           {"dropped", m.dropped},
           {"malformed", m.malformed},
           {"goal_reached", m.goal_reached},
           {"final_goal_error", m.final_goal_error ? json(*m.final_goal_error) : json(nullptr)},
           {"transitions", std::move(transitions)},
           {"duration", m.duration}};
}

}  // namespace teleop::ops
