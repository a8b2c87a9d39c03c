#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "topam/config.hpp"
#include "topam/filter.hpp"
#include "topam/grid_fem.hpp"
#include "topam/optimizer.hpp"
#include "topam/overhang.hpp"
#include "topam/projection.hpp"
#include "topam/report.hpp"

namespace py = pybind11;
using namespace topam;

namespace {

// Column-major element vector -> (nely, nelx) array, top row first.
Eigen::MatrixXd as_image(const Grid& g, const Vector& v) {
  return Eigen::Map<const Eigen::MatrixXd>(v.data(), g.nely, g.nelx);
}

py::dict run_to_dict(const RunResult& r) {
  py::dict d;
  const Grid& g = r.setup.grid;
  d["x"] = as_image(g, r.x);
  d["ero"] = as_image(g, r.fields[Field::Eroded]);
  d["int"] = as_image(g, r.fields[Field::Intermediate]);
  d["dil"] = as_image(g, r.fields[Field::Dilated]);
  d["objective"] = std::vector<double>(r.objective.begin(), r.objective.end());
  d["constraint_names"] = r.constraint_names;
  d["angles"] = r.angles;
  d["theta_star"] = r.theta_star ? py::cast(*r.theta_star) : py::none();
  std::vector<double> hist;
  for (const auto& rec : r.history) hist.push_back(rec.objective[0] ? *rec.objective[0] : 0.0);
  d["objective_ero_history"] = hist;
  d["pp_events"] = r.pp_events.size();
  d["seconds"] = r.seconds;
  d["log"] = format_log(r);
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Self-supporting topology optimization core";

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);

  m.def("preset_names", &preset_names);
  m.def("format_preset", [](const std::string& name) { return format_config(preset_config(name)); },
        py::arg("name"));

  m.def(
      "run",
      [](const std::string& text, int max_iters, const std::string& out_dir) {
        RunConfig cfg = parse_config(text, "<python>");
        if (max_iters > 0) cfg.max_iters = max_iters;
        RunResult r;
        {
          py::gil_scoped_release release;
          r = run_optimization(cfg);
        }
        if (!out_dir.empty()) write_run(r, out_dir);
        return run_to_dict(r);
      },
      py::arg("config"), py::arg("max_iters") = 0, py::arg("out_dir") = "",
      "Run an optimization from configuration text; returns fields as (nely, nelx) arrays.");

  m.def(
      "filter_density",
      [](const Eigen::MatrixXd& rho, double radius) {
        const Grid g(static_cast<int>(rho.cols()), static_cast<int>(rho.rows()));
        const Vector v = Eigen::Map<const Vector>(rho.data(), rho.size());
        return as_image(g, build_filter(g, radius).apply(v));
      },
      py::arg("rho"), py::arg("radius"));

  m.def("heaviside", &heaviside, py::arg("x"), py::arg("beta"), py::arg("mu"));
  m.def("power_mean", &power_mean, py::arg("s"), py::arg("p"));

  m.def(
      "compliance",
      [](const Eigen::MatrixXd& rho, double force, double penal) {
        RunConfig cfg;
        cfg.nelx = static_cast<int>(rho.cols());
        cfg.nely = static_cast<int>(rho.rows());
        cfg.passive_radius = 0.0;
        const ProblemSetup s = make_problem(cfg);
        MaterialModel mat = s.material;
        mat.eta = penal;
        const Vector v = Eigen::Map<const Vector>(rho.data(), rho.size());
        LoadCase load = s.load;
        load.forces[0].second = -force;
        return assemble_and_solve(s.grid, mat, v, load).objective;
      },
      py::arg("rho"), py::arg("force") = 1.0, py::arg("penal") = 3.0,
      "Cantilever compliance of a density image, clamped on the left, loaded mid-right.");
}
