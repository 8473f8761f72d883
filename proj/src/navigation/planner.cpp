#include "teleop/navigation/planner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <queue>

namespace teleop::nav {

double PathCost::value() const { return straight + std::numbers::sqrt2 * diagonal; }

PathCost edge_cost(std::uint8_t from_cost, std::uint8_t to_cost, bool diagonal, double cost_weight) {
  const double mean = (static_cast<double>(from_cost) + static_cast<double>(to_cost)) / 2.0;
  const double factor = 1.0 + mean / 256.0 * cost_weight;
  return diagonal ? PathCost{0.0, factor} : PathCost{factor, 0.0};
}

PathCost octile_heuristic(GridIndex a, GridIndex b) {
  const int dx = std::abs(a.col - b.col);
  const int dy = std::abs(a.row - b.row);
  const int lo = std::min(dx, dy);
  const int hi = std::max(dx, dy);
  return {static_cast<double>(hi - lo), static_cast<double>(lo)};
}

namespace {

struct OpenEntry {
  double f;
  double h;
  GridIndex cell;
  PathCost g;
};

struct OpenOrder {
  // priority_queue pops the "largest"; invert for a min-heap on (f, h, row, col).
  bool operator()(const OpenEntry& a, const OpenEntry& b) const {
    if (a.f != b.f) return a.f > b.f;
    if (a.h != b.h) return a.h > b.h;
    if (a.cell.row != b.cell.row) return a.cell.row > b.cell.row;
    return a.cell.col > b.cell.col;
  }
};

constexpr int kDirs[8][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {1, -1}, {-1, 1}, {-1, -1}};

}  // namespace

GridPath astar(const Costmap& c, GridIndex start, GridIndex goal, const PlannerParams& params) {
  const auto& geo = c.geometry;
  if (!geo.contains(start) || !geo.contains(goal)) throw OutOfBounds("astar: start or goal outside costmap");
  if (!c.traversable(start)) throw PlanningError(PlanningError::Kind::StartInCollision, "start cell in collision");
  if (!c.traversable(goal)) throw PlanningError(PlanningError::Kind::GoalInCollision, "goal cell in collision");

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<PathCost> g(geo.size(), PathCost{inf, 0.0});
  std::vector<std::size_t> parent(geo.size(), std::numeric_limits<std::size_t>::max());
  std::vector<bool> closed(geo.size(), false);
  std::priority_queue<OpenEntry, std::vector<OpenEntry>, OpenOrder> open;

  const std::size_t start_off = geo.offset(start);
  const std::size_t goal_off = geo.offset(goal);
  g[start_off] = {};
  const double h0 = octile_heuristic(start, goal).value();
  open.push({h0, h0, start, {}});

  while (!open.empty()) {
    const OpenEntry cur = open.top();
    open.pop();
    const std::size_t off = geo.offset(cur.cell);
    if (closed[off]) continue;
    closed[off] = true;
    if (off == goal_off) break;

    const std::uint8_t here = c.cost[off];
    for (const auto& d : kDirs) {
      const GridIndex n{cur.cell.col + d[0], cur.cell.row + d[1]};
      if (!c.traversable(n)) continue;
      const bool diagonal = d[0] != 0 && d[1] != 0;
      if (diagonal && (!c.traversable({cur.cell.col + d[0], cur.cell.row}) ||
                       !c.traversable({cur.cell.col, cur.cell.row + d[1]}))) {
        continue;
      }
      const std::size_t noff = geo.offset(n);
      if (closed[noff]) continue;
      const PathCost cand = cur.g + edge_cost(here, c.cost[noff], diagonal, params.cost_weight);
      if (cand.value() < g[noff].value()) {
        g[noff] = cand;
        parent[noff] = off;
        const PathCost h = octile_heuristic(n, goal);
        open.push({(cand + h).value(), h.value(), n, cand});
      }
    }
  }

  if (!closed[goal_off]) throw PlanningError(PlanningError::Kind::NoPath, "no path to goal");

  GridPath out;
  out.weight = g[goal_off];
  for (std::size_t off = goal_off;; off = parent[off]) {
    out.cells.push_back(geo.index_of(off));
    if (off == start_off) break;
  }
  std::reverse(out.cells.begin(), out.cells.end());
  return out;
}

std::optional<GridIndex> nearest_traversable(const Costmap& c, GridIndex center, double radius) {
  const auto& geo = c.geometry;
  const int reach = static_cast<int>(std::ceil(radius / geo.resolution));
  std::optional<GridIndex> best;
  double best_d = std::numeric_limits<double>::infinity();
  for (int r = center.row - reach; r <= center.row + reach; ++r) {
    for (int q = center.col - reach; q <= center.col + reach; ++q) {
      const GridIndex cell{q, r};
      if (!c.traversable(cell)) continue;
      const double d = std::hypot(q - center.col, r - center.row) * geo.resolution;
      if (d > radius + 1e-12) continue;
      // Row-major scan order already breaks ties by (row, col).
      if (d < best_d) {
        best_d = d;
        best = cell;
      }
    }
  }
  return best;
}

void to_json(json& j, const PlanPath& p) {
  j = json{{"stamp", p.stamp}, {"waypoints", p.waypoints}, {"goal", p.goal}, {"weight", p.weight}};
}

void from_json(const json& j, PlanPath& p) {
  p.stamp = j.at("stamp").get<double>();
  p.waypoints = j.at("waypoints").get<std::vector<Pose2D>>();
  p.goal = j.value("goal", Pose2D{});
  p.weight = j.value("weight", 0.0);
}

PlanPath plan_shortest_path(const Costmap& c, const Pose2D& start, const Pose2D& goal, const PlannerParams& params,
                            double stamp) {
  const auto& geo = c.geometry;
  const GridIndex s = geo.to_index(start.position());
  GridIndex g = geo.to_index(goal.position());
  if (!c.traversable(s)) throw PlanningError(PlanningError::Kind::StartInCollision, "start cell in collision");
  if (!c.traversable(g)) {
    auto alt = nearest_traversable(c, g, params.goal_search_radius);
    if (!alt) {
      throw PlanningError(PlanningError::Kind::GoalInCollision,
                          "goal in collision and no traversable cell within search radius");
    }
    g = *alt;
  }
  const GridPath gp = astar(c, s, g, params);

  PlanPath path;
  path.stamp = stamp;
  path.goal = goal;
  path.weight = gp.weight.value();
  path.waypoints.reserve(gp.cells.size());
  for (std::size_t i = 0; i < gp.cells.size(); ++i) {
    const Vec2 p = geo.center(gp.cells[i]);
    double heading = start.theta;
    if (i + 1 < gp.cells.size()) {
      const Vec2 n = geo.center(gp.cells[i + 1]);
      heading = std::atan2(n.y - p.y, n.x - p.x);
    } else if (!path.waypoints.empty()) {
      heading = path.waypoints.back().theta;
    }
    path.waypoints.push_back({p.x, p.y, normalize_angle(heading)});
  }
  return path;
}

ReplanResult replan_if_needed(const Costmap& c, const std::optional<PlanPath>& current, const Pose2D& pose,
                              const Pose2D& goal, double now, const PlannerParams& planner,
                              const ReplanParams& params) {
  std::string reason;
  if (!current) {
    reason = "initial";
  } else if (current->goal != goal) {
    reason = "goal_changed";
  } else if (std::any_of(current->waypoints.begin(), current->waypoints.end(), [&](const Pose2D& w) {
               const Vec2 p = w.position();
               if (!c.geometry.contains_point(p)) return true;
               return c.at(c.geometry.to_index(p)) >= kInscribedCost;
             })) {
    reason = "blocked";
  } else if (now - current->stamp >= params.period) {
    reason = "timer";
  } else {
    return {*current, false, {}};
  }
  return {plan_shortest_path(c, pose, goal, planner, now), true, reason};
}

}  // namespace teleop::nav
