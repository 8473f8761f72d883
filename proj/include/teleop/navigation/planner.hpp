#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "teleop/core/geometry.hpp"
#include "teleop/core/grid.hpp"
#include "teleop/core/messages.hpp"
#include "teleop/navigation/costmap.hpp"

namespace teleop::nav {

class PlanningError : public std::runtime_error {
 public:
  enum class Kind { NoPath, GoalInCollision, StartInCollision };
  PlanningError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Path weight split into unit-step and diagonal-step parts, in cells. Both
/// parts are sums of the same per-edge terms in any order, so two searches
/// that agree on the optimum report the same value bit for bit.
struct PathCost {
  double straight = 0.0;
  double diagonal = 0.0;  // multiplied by sqrt(2)

  double value() const;
  PathCost operator+(const PathCost& o) const { return {straight + o.straight, diagonal + o.diagonal}; }
  friend bool operator==(const PathCost&, const PathCost&) = default;
};

struct PlannerParams {
  double cost_weight = 3.0;
  double goal_search_radius = 0.3;  // m, used when the goal cell is in collision
};

/// Weight of one move between 8-adjacent cells.
PathCost edge_cost(std::uint8_t from_cost, std::uint8_t to_cost, bool diagonal, double cost_weight);

/// Octile distance in cells; admissible because every edge factor is >= 1.
PathCost octile_heuristic(GridIndex a, GridIndex b);

struct GridPath {
  std::vector<GridIndex> cells;
  PathCost weight;
};

/// A* over 8-connected traversable cells (cost < INSCRIBED). A diagonal move
/// requires both orthogonal neighbours to be traversable. Open-set ties break
/// on (f, h, row, col). Throws PlanningError::NoPath.
GridPath astar(const Costmap& c, GridIndex start, GridIndex goal, const PlannerParams& params = {});

struct PlanPath {
  double stamp = 0.0;
  std::vector<Pose2D> waypoints;  // cell centers
  Pose2D goal;                    // requested goal the path was planned for
  double weight = 0.0;            // in cells
};

void to_json(json& j, const PlanPath& p);
void from_json(const json& j, PlanPath& p);

/// World-level planner. A goal cell at or above INSCRIBED is replaced by the
/// nearest traversable cell within goal_search_radius. Throws PlanningError
/// (StartInCollision, GoalInCollision, NoPath) or OutOfBounds.
PlanPath plan_shortest_path(const Costmap& c, const Pose2D& start, const Pose2D& goal,
                            const PlannerParams& params = {}, double stamp = 0.0);

/// Nearest traversable cell to `center` within `radius` meters, ties by
/// (row, col).
std::optional<GridIndex> nearest_traversable(const Costmap& c, GridIndex center, double radius);

struct ReplanParams {
  double period = 2.0;  // s
};

struct ReplanResult {
  PlanPath path;
  bool replanned = false;
  std::string reason;  // "initial", "blocked", "timer", "goal_changed"
};

/// Keeps `current` unless a waypoint now sits on cost >= INSCRIBED, the
/// replan period has elapsed, or the goal moved. Planner errors propagate.
ReplanResult replan_if_needed(const Costmap& c, const std::optional<PlanPath>& current, const Pose2D& pose,
                              const Pose2D& goal, double now, const PlannerParams& planner = {},
                              const ReplanParams& params = {});

}  // namespace teleop::nav
