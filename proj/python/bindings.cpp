#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "hexflood/analysis.hpp"
#include "hexflood/cli.hpp"
#include "hexflood/error.hpp"
#include "hexflood/hexgrid.hpp"
#include "hexflood/hydro.hpp"
#include "hexflood/terrain.hpp"

namespace py = pybind11;
using namespace hexflood;

namespace {

std::pair<int, int> as_pair(AxialCoord c) { return {c.q, c.r}; }

}  // namespace

PYBIND11_MODULE(_hexflood, m) {
  m.doc() = "Hexagonal cellular-automata runoff simulation.";

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<OutOfBounds>(m, "OutOfBounds", PyExc_IndexError);
  py::register_exception<DataGap>(m, "DataGap", PyExc_ValueError);
  py::register_exception<ResourceError>(m, "ResourceError", PyExc_MemoryError);

  py::class_<HexMetrics>(m, "HexMetrics")
      .def_readonly("size", &HexMetrics::size)
      .def_readonly("width", &HexMetrics::width)
      .def_readonly("area", &HexMetrics::area)
      .def("__repr__", [](const HexMetrics& h) {
        std::ostringstream s;
        s << "HexMetrics(size=" << h.size << ", width=" << h.width << ", area=" << h.area << ")";
        return s.str();
      });

  m.def("metrics_from_width", &metrics_from_width, py::arg("width_m"));
  m.def("metrics_from_size", &metrics_from_size, py::arg("size_m"));

  m.def(
      "axial_to_world",
      [](double q, double r, const HexMetrics& metrics) {
        const auto p = axial_to_world(FractionalAxial{q, r}, metrics);
        return std::make_pair(p.x, p.y);
      },
      py::arg("q"), py::arg("r"), py::arg("metrics"));
  m.def(
      "world_to_axial",
      [](double x, double y, const HexMetrics& metrics) {
        return as_pair(world_to_axial(WorldPoint{x, y}, metrics));
      },
      py::arg("x"), py::arg("y"), py::arg("metrics"));
  m.def(
      "cube_round",
      [](double x, double y, double z) {
        const auto c = cube_round(FractionalCube{x, y, z});
        return std::make_tuple(c.x, c.y, c.z);
      },
      py::arg("x"), py::arg("y"), py::arg("z"));
  m.def(
      "neighbors",
      [](int q, int r) {
        std::vector<std::pair<int, int>> out;
        for (auto c : neighbors(AxialCoord{q, r})) out.push_back(as_pair(c));
        return out;
      },
      py::arg("q"), py::arg("r"));
  m.def(
      "hex_distance",
      [](std::pair<int, int> a, std::pair<int, int> b) {
        return hex_distance({a.first, a.second}, {b.first, b.second});
      },
      py::arg("a"), py::arg("b"));

  m.def(
      "geodesic_distance",
      [](double lat1, double lon1, double lat2, double lon2) {
        return geodesic_distance({lat1, lon1}, {lat2, lon2});
      },
      py::arg("lat1"), py::arg("lon1"), py::arg("lat2"), py::arg("lon2"));

  py::class_<HexTerrain>(m, "HexTerrain")
      .def_property_readonly("metrics", &HexTerrain::metrics)
      .def_property_readonly("q_cells", [](const HexTerrain& t) { return t.extent().q_cells; })
      .def_property_readonly("r_cells", [](const HexTerrain& t) { return t.extent().r_cells; })
      .def_property_readonly("heights", [](const HexTerrain& t) {
        return std::vector<double>(t.heights().begin(), t.heights().end());
      })
      .def("__len__", &HexTerrain::size);

  m.def(
      "synthetic_terrain",
      [](const std::string& kind, double width_m, int q_cells, int r_cells, double a, double b,
         double c, double k) {
        return synthetic_terrain(parse_synthetic_kind(kind), metrics_from_width(width_m),
                                 {q_cells, r_cells}, {a, b, c, k});
      },
      py::arg("kind"), py::arg("width_m"), py::arg("q_cells"), py::arg("r_cells"),
      py::arg("a") = 0.0, py::arg("b") = 0.0, py::arg("c") = 0.0, py::arg("k") = 0.0);

  m.def(
      "distribute_partition",
      [](const std::vector<double>& heights, const std::vector<double>& depths) {
        return distribute_partition(heights, depths);
      },
      py::arg("heights"), py::arg("depths"));

  py::class_<Rng>(m, "Rng")
      .def(py::init<std::uint64_t>(), py::arg("seed") = 0)
      .def("next", &Rng::next)
      .def("shuffle", [](Rng& rng, std::size_t n) { return shuffle(rng, n); }, py::arg("n"));

  py::class_<WaterGrid>(m, "WaterGrid")
      .def(py::init([](const HexTerrain& t, const std::string& boundary) {
             return WaterGrid(t, parse_boundary(boundary));
           }),
           py::arg("terrain"), py::arg("boundary") = "closed")
      .def_property_readonly("depths", [](const WaterGrid& g) {
        return std::vector<double>(g.depths().begin(), g.depths().end());
      })
      .def_property_readonly("outflow_total", &WaterGrid::outflow_total)
      .def_property_readonly("rain_total", &WaterGrid::rain_total)
      .def("total_depth", &WaterGrid::total_depth)
      .def("apply_rain", [](WaterGrid& g, double rate, double dt) { apply_rain(g, rate, dt); },
           py::arg("rain_rate"), py::arg("dt_seconds"))
      .def("step", [](WaterGrid& g, Rng& rng) { step(g, rng); }, py::arg("rng"))
      .def("__len__", &WaterGrid::size);

  m.attr("REFERENCE_RAIN_RATE") = kReferenceRainRate;

  m.def(
      "run_scenario",
      [](const HexTerrain& terrain, double rain_rate, double rain_duration,
         double equilibrate_duration, double step_seconds, std::uint64_t seed,
         const std::string& boundary) {
        SimulationParams p;
        p.rain_rate = rain_rate;
        p.rain_duration = rain_duration;
        p.equilibrate_duration = equilibrate_duration;
        p.step_seconds = step_seconds;
        p.seed = seed;
        p.boundary = parse_boundary(boundary);
        py::gil_scoped_release release;
        return run_scenario(terrain, p, 0, SnapshotSink{});
      },
      py::arg("terrain"), py::arg("rain_rate") = kReferenceRainRate, py::arg("rain_duration") = 0.0,
      py::arg("equilibrate_duration") = 0.0, py::arg("step_seconds") = kDefaultStepSeconds,
      py::arg("seed") = 0, py::arg("boundary") = "closed");

  m.def(
      "summarize",
      [](const std::vector<double>& depths) {
        const auto r = summarize(depths);
        py::dict d;
        d["count"] = r.count;
        d["sum"] = r.sum;
        d["mean"] = r.mean;
        d["sample_std"] = r.sample_std;
        d["min"] = r.min;
        d["max"] = r.max;
        return d;
      },
      py::arg("depths"));

  m.def(
      "flood_zones",
      [](const WaterGrid& grid, double threshold) {
        py::list out;
        for (const auto& z : flood_zones(grid, threshold)) {
          py::dict d;
          d["label"] = z.label;
          std::vector<std::pair<int, int>> cells;
          for (auto c : z.cells) cells.push_back(as_pair(c));
          d["cells"] = cells;
          d["max_depth"] = z.max_depth;
          d["area"] = z.area;
          out.append(d);
        }
        return out;
      },
      py::arg("grid"), py::arg("threshold") = kDefaultRiskThreshold);

  m.def(
      "export_depth_csv",
      [](const WaterGrid& grid) {
        std::ostringstream s;
        export_depth_csv(grid, s);
        return s.str();
      },
      py::arg("grid"));
  m.def(
      "render_depth_map",
      [](const WaterGrid& grid, double pixels_per_meter, const std::string& ramp) {
        std::ostringstream s(std::ios::binary);
        render_depth_map(grid, {pixels_per_meter, parse_color_ramp(ramp)}, s);
        return py::bytes(s.str());
      },
      py::arg("grid"), py::arg("pixels_per_meter") = 1.0, py::arg("ramp") = "blues");

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = cli::run(args, out, err);
        return std::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
}
