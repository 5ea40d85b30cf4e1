#pragma once

// Scenario documents: JSON configuration for the model, the initial state,
// integration settings and outputs.
//
//   {
//     "model": {
//       "kernel": "polynomial_age",            // or "multi_exponential"
//       "n": 1,                                // optional, must match beta
//       "rho": 2.0,                            // list for multi_exponential
//       "beta": [{"family": "exp_decay", "b": 1.0, "k": 1.0},
//                {"family": "exp_decay", "b": 4.5, "k": 1.0}],
//       "mu": {"family": "power", "m0": 1.0, "c": 1.0, "p": 2.0},
//       "fertility_scale": 1.0                 // optional
//     },
//     "initial": {"family": "exp_decay", "scale": 1.0, "rate": 1.0, "a_max": 50},
//     "sim": {"t_end": 100, "rtol": 1e-8, "atol": 1e-12},
//     "output": {"dir": "out", "age_points": 2001},
//     "sweep": {"parameter": "fertility_scale", "values": [0.5, 1.0, 1.2, 2.0]}
//   }

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "agestruct/dynamics.hpp"
#include "agestruct/model.hpp"
#include "agestruct/quadrature.hpp"
#include "agestruct/state.hpp"

namespace agestruct {

struct InitialSpec {
  enum class Kind { Density, Moments, Equilibrium };
  Kind kind = Kind::Density;
  std::optional<InitialDensity> density;
  QuadratureSettings quadrature;
  std::optional<StateVector> moments;
  /// Equilibrium start: the equilibrium state multiplied by this factor.
  double equilibrium_scale = 1.0;
};

struct SimSettings {
  double t_end = 100.0;
  IntegratorSettings integrator;
};

struct OutputSettings {
  std::string dir = ".";
  std::size_t age_points = 2001;
};

struct SweepSpec {
  /// "fertility_scale", a dotted path such as "model.rho", or a JSON pointer.
  std::string parameter;
  std::vector<double> values;
};

struct Scenario {
  nlohmann::json document;
  ModelSpec model;
  InitialSpec initial;
  SimSettings sim;
  OutputSettings output;
  std::optional<SweepSpec> sweep;
};

/// Builds (without validating assumptions) the model from a "model" section.
/// Throws ConfigError with the offending field path.
ModelSpec build_model(const nlohmann::json& model_section);

Scenario load_scenario(const nlohmann::json& document);
/// Throws ConfigError for unreadable files or malformed JSON.
Scenario load_scenario_file(const std::filesystem::path& path);

/// JSON pointer for a sweep parameter path.
std::string sweep_pointer(const std::string& parameter);

/// Copy of `document` with the sweep parameter set to `value`.
nlohmann::json apply_parameter(const nlohmann::json& document, const std::string& parameter,
                               double value);

/// The initial moment vector: quadrature of p0, explicit moments, or a scaled equilibrium.
StateVector initial_state(const Scenario& scenario);

}  // namespace agestruct
