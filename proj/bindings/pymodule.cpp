#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "divband/config.hpp"
#include "divband/io.hpp"
#include "divband/version.hpp"

namespace py = pybind11;
using namespace divband;

namespace {

GridSolution solve_config(const RunConfig& rc) {
  double x_max = rc.solve.x_max > 0.0 ? rc.solve.x_max : default_x_max(rc.model);
  auto K = static_cast<std::size_t>(std::llround(x_max / rc.solve.h));
  CandidatePool pool(rc.model, rc.solve.h, K);
  StateOptimizer opt(pool, rc.space);
  return solve(rc.model, opt, rc.solve);
}

py::dict solution_dict(const GridSolution& sol) {
  py::dict d;
  d["h"] = sol.h;
  d["x_max"] = sol.x_max;
  d["levels"] = sol.bands.levels;
  d["V"] = sol.V.values;
  d["fprime"] = sol.fprime.values;
  d["v0"] = sol.V.values.front();
  d["verified"] = sol.verified;
  d["max_residual"] = sol.residual.max_abs;
  d["residual_tolerance"] = sol.residual.tolerance;
  return d;
}

}  // namespace

PYBIND11_MODULE(_divband, m) {
  m.doc() = "band-policy solver for dividend and reinsurance control";
  m.attr("__version__") = std::string(kVersion);

  m.def("solve", [](const std::string& config_path) {
    return solution_dict(solve_config(load_config(config_path)));
  },
        py::arg("config_path"), "Solve the config and return the grid solution");

  m.def("validate", [](const std::string& config_path) {
    // load_config raises on an invalid model; reaching here means it is valid.
    RunConfig rc = load_config(config_path);
    py::dict d;
    d["config_hash"] = rc.config_hash;
    d["model_hash"] = rc.model_hash;
    d["lines"] = rc.model.n;
    d["classes"] = rc.model.m;
    return d;
  },
        py::arg("config_path"), "Parse and validate a config, returning its hashes");

  m.def("simulate", [](const std::string& config_path, const std::string& policy_path,
                       std::size_t paths, double x0) {
    RunConfig rc = load_config(config_path);
    PolicyFile pf = read_policy_json(policy_path);
    if (pf.meta.model_hash != rc.model_hash)
      throw std::runtime_error("model hash mismatch: " + rc.model_hash + " vs " +
                               pf.meta.model_hash);
    if (paths > 0) rc.sim.paths = paths;
    rc.sim.x0 = x0;
    Simulator sim(rc.model, pf.policy);
    SimulationResult r = sim.estimate_value(rc.sim);
    py::dict d;
    d["mean"] = r.mean_discounted_dividends;
    d["std_error"] = r.std_error;
    d["ruin_fraction"] = r.ruin_fraction;
    d["paths"] = r.paths;
    return d;
  },
        py::arg("config_path"), py::arg("policy_path"), py::arg("paths") = 0,
        py::arg("x0") = 0.0, "Monte Carlo estimate of the policy value at x0");
}
