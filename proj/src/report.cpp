#include "agestruct/report.hpp"

namespace agestruct {

using nlohmann::json;

namespace {

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

json to_json(const ValidationReport& report) {
  json violations = json::array();
  for (const auto& v : report.violations)
    violations.push_back(
        {{"condition", v.condition}, {"subject", v.subject}, {"x", v.x}, {"observed", v.observed}});
  return {{"passed", report.passed()}, {"violations", violations}};
}

json to_json(const EquilibriumReport& report) {
  return {{"regime", std::string(to_string(report.regime))},
          {"r0", report.r0},
          {"nontrivial", report.nontrivial()},
          {"P_star", report.state.total},
          {"moments_star", report.state.moments},
          {"residual_inf_norm", report.residual_inf_norm}};
}

json to_json(const MonitorReport& report) {
  json out = json::object();
  for (const auto& m : report.all()) {
    out[m.name] = {{"hypothesis_held", m.hypothesis_held},
                   {"conclusion_held", m.conclusion_held ? json(*m.conclusion_held) : json(nullptr)},
                   {"first_violation_time", optional_number(m.first_violation_time)}};
  }
  return out;
}

json to_json(const BoundCheck& check) {
  return {{"holds", check.holds},
          {"first_violation_time", optional_number(check.first_violation_time)},
          {"max_excess", check.max_excess}};
}

}  // namespace agestruct
