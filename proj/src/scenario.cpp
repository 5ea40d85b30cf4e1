#include "agestruct/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "agestruct/errors.hpp"
#include "agestruct/reproduction.hpp"

namespace agestruct {

using nlohmann::json;

namespace {

const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw ConfigError(path, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(path + "." + key, "missing required field");
  return *it;
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path, "expected a number, got " + std::string(v.type_name()));
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(path, "must be finite");
  return x;
}

double number(const json& obj, const std::string& key, const std::string& path) {
  return as_number(require(obj, key, path), path + "." + key);
}

double number_or(const json& obj, const std::string& key, const std::string& path, double fallback) {
  if (!obj.contains(key)) return fallback;
  return as_number(obj.at(key), path + "." + key);
}

std::vector<double> numbers(const json& v, const std::string& path) {
  if (!v.is_array()) throw ConfigError(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t k = 0; k < v.size(); ++k)
    out.push_back(as_number(v[k], path + "[" + std::to_string(k) + "]"));
  return out;
}

std::string text(const json& obj, const std::string& key, const std::string& path,
                 const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_string()) throw ConfigError(path + "." + key, "expected a string");
  return v.get<std::string>();
}

RateFunction build_rate(const json& spec, const std::string& path) {
  const std::string family = text(spec, "family", path, "");
  if (family == "exp_decay") return RateFunction::exp_decay(number(spec, "b", path), number(spec, "k", path));
  if (family == "power_decay")
    return RateFunction::power_decay(number(spec, "b", path), number(spec, "q", path));
  if (family == "power")
    return RateFunction::power_growth(number(spec, "m0", path), number(spec, "c", path),
                                      number(spec, "p", path));
  throw ConfigError(path + ".family", "unknown family '" + family +
                                          "' (expected exp_decay, power_decay or power)");
}

InitialSpec build_initial(const json& spec, const std::string& path) {
  InitialSpec out;
  if (!spec.is_object()) throw ConfigError(path, "expected an object");
  const std::string family = text(spec, "family", path, "exp_decay");
  out.quadrature.a_max = number_or(spec, "a_max", path, out.quadrature.a_max);
  out.quadrature.abs_tol = number_or(spec, "abs_tol", path, out.quadrature.abs_tol);
  if (spec.contains("max_subdivisions")) {
    const double m = number(spec, "max_subdivisions", path);
    if (m < 1.0) throw ConfigError(path + ".max_subdivisions", "must be >= 1");
    out.quadrature.max_subdivisions = static_cast<std::size_t>(m);
  }
  if (!(out.quadrature.a_max > 0.0)) throw ConfigError(path + ".a_max", "must be > 0");
  if (!(out.quadrature.abs_tol > 0.0)) throw ConfigError(path + ".abs_tol", "must be > 0");

  if (family == "exp_decay") {
    const double rate = number(spec, "rate", path);
    out.density = InitialDensity::exp_decay(number_or(spec, "scale", path, 1.0), rate);
    if (spec.contains("declared_tail_rate") && number(spec, "declared_tail_rate", path) != rate)
      throw ConfigError(path + ".declared_tail_rate",
                        "an exponential density's tail rate is its own rate");
  } else if (family == "table") {
    auto ages = numbers(require(spec, "ages", path), path + ".ages");
    auto values = numbers(require(spec, "values", path), path + ".values");
    if (ages.size() != values.size())
      throw ConfigError(path + ".values", "ages and values differ in length");
    out.density = InitialDensity::table(std::move(ages), std::move(values),
                                        number(spec, "declared_tail_rate", path));
  } else if (family == "moments") {
    out.kind = InitialSpec::Kind::Moments;
    out.moments = StateVector{number(spec, "P", path),
                              numbers(require(spec, "moments", path), path + ".moments")};
  } else if (family == "equilibrium") {
    out.kind = InitialSpec::Kind::Equilibrium;
    out.equilibrium_scale = number_or(spec, "scale", path, 1.0);
    if (!(out.equilibrium_scale > 0.0)) throw ConfigError(path + ".scale", "must be > 0");
  } else {
    throw ConfigError(path + ".family", "unknown family '" + family +
                                            "' (expected exp_decay, table, moments or equilibrium)");
  }
  return out;
}

}  // namespace

ModelSpec build_model(const json& m) {
  const std::string path = "model";
  if (!m.is_object()) throw ConfigError(path, "expected an object");
  const std::string kernel_name = text(m, "kernel", path, "polynomial_age");
  const auto& beta_spec = require(m, "beta", path);
  if (!beta_spec.is_array() || beta_spec.empty())
    throw ConfigError(path + ".beta", "expected a non-empty array of coefficient families");

  std::vector<RateFunction> beta;
  for (std::size_t i = 0; i < beta_spec.size(); ++i)
    beta.push_back(build_rate(beta_spec[i], path + ".beta[" + std::to_string(i) + "]"));

  if (m.contains("n")) {
    const auto& nv = m.at("n");
    if (!nv.is_number_integer() || nv.get<long long>() < 0)
      throw ConfigError(path + ".n", "expected a non-negative integer");
    if (static_cast<std::size_t>(nv.get<long long>()) + 1 != beta.size())
      throw ConfigError(path + ".beta", "order n = " + std::to_string(nv.get<long long>()) +
                                            " needs n+1 coefficients, got " +
                                            std::to_string(beta.size()));
  }

  Kernel kernel;
  if (kernel_name == "polynomial_age") {
    kernel = PolynomialAgeKernel{number(m, "rho", path)};
  } else if (kernel_name == "multi_exponential") {
    kernel = MultiExponentialKernel{numbers(require(m, "rho", path), path + ".rho")};
  } else {
    throw ConfigError(path + ".kernel", "unknown kernel '" + kernel_name +
                                            "' (expected polynomial_age or multi_exponential)");
  }

  ModelSpec model(std::move(kernel), std::move(beta), build_rate(require(m, "mu", path), path + ".mu"));
  const double scale = number_or(m, "fertility_scale", path, 1.0);
  if (!(scale > 0.0)) throw ConfigError(path + ".fertility_scale", "must be > 0");
  return scale == 1.0 ? model : model.with_fertility_scale(scale);
}

Scenario load_scenario(const json& doc) {
  if (!doc.is_object()) throw ConfigError("", "scenario must be a JSON object");
  ModelSpec model = build_model(require(doc, "model", "scenario"));

  InitialSpec initial;
  if (doc.contains("initial")) initial = build_initial(doc.at("initial"), "initial");
  else initial.density = InitialDensity::exp_decay(1.0, 1.0);

  SimSettings sim;
  if (doc.contains("sim")) {
    const auto& s = doc.at("sim");
    if (!s.is_object()) throw ConfigError("sim", "expected an object");
    sim.t_end = number_or(s, "t_end", "sim", sim.t_end);
    sim.integrator.rtol = number_or(s, "rtol", "sim", sim.integrator.rtol);
    sim.integrator.atol = number_or(s, "atol", "sim", sim.integrator.atol);
    sim.integrator.initial_step = number_or(s, "initial_step", "sim", sim.integrator.initial_step);
    if (!(sim.t_end >= 0.0)) throw ConfigError("sim.t_end", "must be >= 0");
    if (!(sim.integrator.rtol > 0.0)) throw ConfigError("sim.rtol", "must be > 0");
    if (!(sim.integrator.atol > 0.0)) throw ConfigError("sim.atol", "must be > 0");
  }

  OutputSettings output;
  if (doc.contains("output")) {
    const auto& o = doc.at("output");
    if (!o.is_object()) throw ConfigError("output", "expected an object");
    output.dir = text(o, "dir", "output", output.dir);
    const double points = number_or(o, "age_points", "output", static_cast<double>(output.age_points));
    if (points < 2.0 || points != std::floor(points))
      throw ConfigError("output.age_points", "must be an integer >= 2");
    output.age_points = static_cast<std::size_t>(points);
  }

  std::optional<SweepSpec> sweep;
  if (doc.contains("sweep")) {
    const auto& s = doc.at("sweep");
    if (!s.is_object()) throw ConfigError("sweep", "expected an object");
    sweep = SweepSpec{text(s, "parameter", "sweep", "fertility_scale"),
                      numbers(require(s, "values", "sweep"), "sweep.values")};
  }

  if (initial.moments && initial.moments->size() != model.state_size())
    throw ConfigError("initial.moments", "expected n+1 = " + std::to_string(model.order() + 1) +
                                             " moments");

  return Scenario{doc, std::move(model), std::move(initial), sim, output, std::move(sweep)};
}

Scenario load_scenario_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("--config", "malformed JSON in '" + path.string() + "': " + e.what());
  }
  return load_scenario(doc);
}

std::string sweep_pointer(const std::string& parameter) {
  if (parameter.empty()) throw ConfigError("sweep.parameter", "empty parameter path");
  if (parameter.front() == '/') return parameter;
  if (parameter == "fertility_scale") return "/model/fertility_scale";
  // dotted path with optional [k] indices: model.beta[1].b -> /model/beta/1/b
  std::string ptr;
  std::string token;
  auto flush = [&] {
    if (!token.empty()) ptr += "/" + token;
    token.clear();
  };
  for (char ch : parameter) {
    if (ch == '.' || ch == '[' || ch == ']') flush();
    else token.push_back(ch);
  }
  flush();
  return ptr;
}

json apply_parameter(const json& document, const std::string& parameter, double value) {
  json patched = document;
  try {
    patched[json::json_pointer(sweep_pointer(parameter))] = value;
  } catch (const json::exception& e) {
    throw ConfigError("sweep.parameter", "cannot set '" + parameter + "': " + e.what());
  }
  return patched;
}

StateVector initial_state(const Scenario& scenario) {
  switch (scenario.initial.kind) {
    case InitialSpec::Kind::Moments:
      return *scenario.initial.moments;
    case InitialSpec::Kind::Equilibrium:
      return nontrivial_equilibrium(scenario.model).state.scaled(scenario.initial.equilibrium_scale);
    case InitialSpec::Kind::Density:
      break;
  }
  return moments_from_density(*scenario.initial.density, scenario.model, scenario.initial.quadrature)
      .state;
}

}  // namespace agestruct
