#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <filesystem>
#include <sstream>

#include "teleop/core/errors.hpp"
#include "teleop/core/geometry.hpp"
#include "teleop/core/grid.hpp"
#include "teleop/navigation/costmap.hpp"
#include "teleop/navigation/planner.hpp"
#include "teleop/netlink/link.hpp"
#include "teleop/operator/scenario.hpp"

namespace py = pybind11;
using namespace teleop;

namespace {

using Cell = std::pair<int, int>;  // (col, row)

py::object to_py(const json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

template <class T>
GridGeometry geometry_of(const std::vector<std::vector<T>>& rows, double resolution) {
  GridGeometry g;
  g.resolution = resolution;
  g.height = static_cast<int>(rows.size());
  g.width = rows.empty() ? 0 : static_cast<int>(rows.front().size());
  for (const auto& r : rows) {
    if (static_cast<int>(r.size()) != g.width) throw std::invalid_argument("rows must have equal length");
  }
  return g;
}

template <class T>
std::vector<T> flatten(const std::vector<std::vector<T>>& rows) {
  std::vector<T> out;
  for (const auto& r : rows) out.insert(out.end(), r.begin(), r.end());
  return out;
}

py::dict plan(const std::vector<std::vector<std::uint8_t>>& cost, Cell start, Cell goal, double cost_weight) {
  nav::Costmap c{geometry_of(cost, 1.0), flatten(cost)};
  nav::PlannerParams p;
  p.cost_weight = cost_weight;
  const auto path = nav::astar(c, {start.first, start.second}, {goal.first, goal.second}, p);
  std::vector<Cell> cells;
  for (const auto& i : path.cells) cells.emplace_back(i.col, i.row);
  py::dict out;
  out["cells"] = cells;
  out["weight"] = path.weight.value();
  return out;
}

std::vector<std::vector<int>> costmap(const std::vector<std::vector<std::int8_t>>& occupancy, double resolution,
                                      double robot_radius, double inflation_radius) {
  mapping::OccupancyMsg m{geometry_of(occupancy, resolution), flatten(occupancy)};
  const auto c = nav::build_costmap(m, {robot_radius, inflation_radius, 10.0});
  std::vector<std::vector<int>> out(static_cast<std::size_t>(c.geometry.height));
  for (int r = 0; r < c.geometry.height; ++r) {
    for (int col = 0; col < c.geometry.width; ++col) out[static_cast<std::size_t>(r)].push_back(c.at({col, r}));
  }
  return out;
}

py::dict link_stats(double loss_prob, double base_latency, double jitter_std, std::uint64_t seed, int count,
                    double interval) {
  net::LinkConfig cfg;
  cfg.loss_prob = loss_prob;
  cfg.base_latency = base_latency;
  cfg.jitter_std = jitter_std;
  cfg.seed = seed;
  cfg.validate();
  net::LinkModel model(cfg);
  std::vector<double> arrivals;
  for (int i = 0; i < count; ++i) {
    const auto out = model.send(net::Direction::Uplink, i * interval);
    if (out.delivered) arrivals.push_back(out.deliver_at);
  }
  py::dict d;
  d["delivered"] = model.delivered();
  d["dropped"] = model.dropped();
  d["arrivals"] = arrivals;
  return d;
}

py::object run(const std::string& path, std::optional<std::uint64_t> seed, bool with_trace) {
  auto cfg = ops::load_scenario(path);
  std::ostringstream trace;
  ops::RunOptions opts;
  opts.seed = seed;
  if (with_trace) opts.trace = &trace;
  ops::RunMetrics m;
  {
    py::gil_scoped_release release;
    m = ops::run_scenario(std::move(cfg), opts);
  }
  json j = m;
  if (with_trace) {
    py::dict out;
    out["metrics"] = to_py(j);
    out["trace"] = trace.str();
    return out;
  }
  return to_py(j);
}

}  // namespace

PYBIND11_MODULE(pyteleop, m) {
  m.doc() = "Bindings for the teleoperation core: geometry, planning, link model, headless scenarios.";

  py::register_exception<SchemaError>(m, "SchemaError", PyExc_ValueError);
  py::register_exception<OutOfBounds>(m, "OutOfBounds", PyExc_IndexError);
  py::register_exception<nav::PlanningError>(m, "PlanningError", PyExc_RuntimeError);

  m.def("normalize_angle", &normalize_angle, py::arg("theta"), "Wraps an angle to (-pi, pi].");
  m.def(
      "world_to_grid",
      [](double x, double y, double origin_x, double origin_y, double resolution) {
        const auto i = world_to_grid({x, y}, {origin_x, origin_y, 0.0}, resolution);
        return Cell{i.col, i.row};
      },
      py::arg("x"), py::arg("y"), py::arg("origin_x") = 0.0, py::arg("origin_y") = 0.0,
      py::arg("resolution") = 0.05, "Cell (col, row) holding a world point.");
  m.def(
      "raster_line",
      [](Cell a, Cell b) {
        std::vector<Cell> out;
        for (const auto& i : raster_line({a.first, a.second}, {b.first, b.second})) out.emplace_back(i.col, i.row);
        return out;
      },
      py::arg("a"), py::arg("b"), "Cells crossed by the segment between two cell centers.");
  m.def("build_costmap", &costmap, py::arg("occupancy"), py::arg("resolution") = 0.05,
        py::arg("robot_radius") = 0.11, py::arg("inflation_radius") = 0.35,
        "Inflated cost rows (0..254) from occupancy rows (-1 unknown, 0 free, 100 occupied).");
  m.def("plan", &plan, py::arg("cost"), py::arg("start"), py::arg("goal"), py::arg("cost_weight") = 3.0,
        "A* over cost rows indexed [row][col]; returns {'cells': [(col, row)], 'weight': cells}.");
  m.def("link_stats", &link_stats, py::arg("loss_prob") = 0.0, py::arg("base_latency") = 0.02,
        py::arg("jitter_std") = 0.005, py::arg("seed") = 0, py::arg("count") = 1000, py::arg("interval") = 0.01,
        "Sends `count` envelopes through the link model; returns counts and arrival times.");
  m.def("run_scenario", &run, py::arg("path"), py::arg("seed") = py::none(), py::arg("trace") = false,
        "Runs a scenario file headless; returns the metrics dict (and the trace text when trace=True).");
}
