#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "agestruct/dynamics.hpp"
#include "agestruct/errors.hpp"
#include "agestruct/reproduction.hpp"
#include "agestruct/scenario.hpp"

namespace py = pybind11;
using namespace agestruct;

namespace {

Scenario parse(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("", e.what());
  }
  return load_scenario(doc);
}

py::dict equilibrium_dict(const EquilibriumReport& eq) {
  py::dict d;
  d["regime"] = std::string(to_string(eq.regime));
  d["R0"] = eq.r0;
  d["nontrivial"] = eq.nontrivial();
  d["P_star"] = eq.state.total;
  d["moments"] = eq.state.moments;
  d["residual"] = eq.residual_inf_norm;
  return d;
}

py::dict trajectory_dict(const Trajectory& traj) {
  std::vector<double> total, births, mortality;
  std::vector<std::vector<double>> moments;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const auto s = traj.state(k);
    total.push_back(s.total);
    moments.push_back(s.moments);
    births.push_back(traj.births(k));
    mortality.push_back(traj.cumulative_mortality(k));
  }
  py::dict d;
  d["t"] = traj.times();
  d["P"] = total;
  d["moments"] = moments;
  d["B"] = births;
  d["M"] = mortality;
  d["extinct"] = traj.extinct();
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Moment-closure dynamics for age-structured populations.";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<AssumptionError>(m, "AssumptionError", PyExc_ValueError);
  py::register_exception<NoSolutionError>(m, "NoSolutionError", PyExc_ValueError);
  py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_RuntimeError);

  py::class_<Scenario>(m, "Scenario")
      .def(py::init(&parse), py::arg("json"))
      .def_static("from_file", [](const std::string& path) { return load_scenario_file(path); })
      .def_property_readonly("order", [](const Scenario& s) { return s.model.order(); })
      .def_property_readonly("t_end", [](const Scenario& s) { return s.sim.t_end; })
      .def("violations",
           [](const Scenario& s) {
             std::vector<std::pair<std::string, std::string>> out;
             for (const auto& v : validate_assumptions(s.model).violations) out.emplace_back(v.condition, v.subject);
             return out;
           })
      .def("net_reproduction_rate", [](const Scenario& s, double x) { return net_reproduction_rate(s.model, x); },
           py::arg("x"))
      .def("rn_inverse", [](const Scenario& s, double y) { return rn_inverse(s.model, y); }, py::arg("y"))
      .def("classify",
           [](const Scenario& s) {
             const auto c = classify(s.model);
             return py::make_tuple(c.r0, std::string(to_string(c.regime)));
           })
      .def("equilibrium", [](const Scenario& s) { return equilibrium_dict(equilibrium(s.model)); })
      .def("initial_state", [](const Scenario& s) { return initial_state(s).flatten(); })
      .def(
          "simulate",
          [](const Scenario& s, std::optional<double> t_end) {
            const auto init = initial_state(s);
            Trajectory traj = [&] {
              py::gil_scoped_release release;
              return integrate(s.model, init, t_end.value_or(s.sim.t_end), s.sim.integrator);
            }();
            return trajectory_dict(traj);
          },
          py::arg("t_end") = py::none());
}
