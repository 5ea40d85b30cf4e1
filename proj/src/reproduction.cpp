#include "agestruct/reproduction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "agestruct/errors.hpp"
#include "agestruct/format.hpp"
#include "agestruct/moment_system.hpp"

namespace agestruct {

std::string_view to_string(Regime regime) {
  switch (regime) {
    case Regime::Subcritical:
      return "subcritical";
    case Regime::Critical:
      return "critical";
    case Regime::Supercritical:
      return "supercritical";
  }
  return "unknown";
}

std::vector<double> factorial_weights(double kappa, std::size_t n) {
  std::vector<double> w(n + 1);
  w[0] = 1.0 / kappa;
  for (std::size_t i = 1; i <= n; ++i) w[i] = w[i - 1] * static_cast<double>(i) / kappa;
  return w;
}

double net_reproduction_rate(const ModelSpec& model, double x) {
  if (!(x >= 0.0)) throw DomainError("population size must be >= 0");
  const double mu = model.eval_mu(x);
  const std::size_t n = model.order();
  double r = 0.0;
  if (model.is_polynomial()) {
    const auto w = factorial_weights(model.decay(0) + mu, n);
    for (std::size_t i = 0; i <= n; ++i) r += model.eval_beta(i, x) * w[i];
  } else {
    for (std::size_t i = 0; i <= n; ++i) r += model.eval_beta(i, x) / (model.decay(i) + mu);
  }
  return r;
}

double rn_derivative(const ModelSpec& model, double x) {
  if (!(x >= 0.0)) throw DomainError("population size must be >= 0");
  const double mu = model.eval_mu(x);
  const double dmu = model.mu().derivative(x);
  const std::size_t n = model.order();
  double fertility_part = 0.0;
  double mortality_part = 0.0;
  if (model.is_polynomial()) {
    const double kappa = model.decay(0) + mu;
    const auto w = factorial_weights(kappa, n);
    for (std::size_t i = 0; i <= n; ++i) {
      fertility_part += model.beta()[i].derivative(x) * w[i];
      // d/dmu of i!/kappa^{i+1} is -(i+1) i!/kappa^{i+2}
      mortality_part += static_cast<double>(i + 1) * model.eval_beta(i, x) * w[i] / kappa * dmu;
    }
  } else {
    for (std::size_t i = 0; i <= n; ++i) {
      const double kappa = model.decay(i) + mu;
      fertility_part += model.beta()[i].derivative(x) / kappa;
      mortality_part += model.eval_beta(i, x) * dmu / (kappa * kappa);
    }
  }
  return fertility_part - mortality_part;
}

double rn_inverse(const ModelSpec& model, double y) {
  if (!(y > 0.0)) throw DomainError("R_n^{-1} is defined on (0, R0]; got y = " + format_double(y));
  const double r0 = net_reproduction_rate(model, 0.0);
  if (std::abs(r0 - y) <= kInverseTolerance * std::max(1.0, y)) return 0.0;
  if (y > r0)
    throw NoSolutionError("R_n(x) = " + format_double(y) + " has no solution: range of R_n is (0, " +
                          format_double(r0) + "]");

  double lo = 0.0;
  double hi = 1.0;
  int doublings = 0;
  while (net_reproduction_rate(model, hi) >= y) {
    lo = hi;
    hi *= 2.0;
    if (++doublings > kMaxBracketDoublings)
      throw NumericalFailure("rn_inverse: no bracket after " +
                             std::to_string(kMaxBracketDoublings) + " doublings");
  }

  // invariant: R_n(lo) >= y > R_n(hi); stop on bracket width since R_n may be
  // flat to working precision long before the bracket closes
  while (hi - lo > kInverseTolerance * 1e-2 * std::max(1.0, lo)) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    const double r = net_reproduction_rate(model, mid);
    if (r == y) return mid;
    (r > y ? lo : hi) = mid;
  }
  return lo + 0.5 * (hi - lo);
}

ReproductionSummary classify(const ModelSpec& model) {
  const double r0 = net_reproduction_rate(model, 0.0);
  Regime regime = Regime::Critical;
  if (r0 > 1.0 + kCriticalBand) regime = Regime::Supercritical;
  else if (r0 < 1.0 - kCriticalBand) regime = Regime::Subcritical;
  return {r0, regime};
}

EquilibriumReport nontrivial_equilibrium(const ModelSpec& model) {
  const auto summary = classify(model);
  if (summary.regime != Regime::Supercritical)
    throw PreconditionError("no nontrivial equilibrium: R0 = " + format_double(summary.r0) +
                            " is " + std::string(to_string(summary.regime)) +
                            "; a positive equilibrium exists iff R0 > 1");

  const double p_star = rn_inverse(model, 1.0);
  const double mu = model.eval_mu(p_star);
  const std::size_t n = model.order();

  StateVector state{p_star, std::vector<double>(n + 1)};
  if (model.is_polynomial()) {
    const double kappa = model.decay(0) + mu;
    state.moments[0] = mu * p_star / kappa;
    for (std::size_t i = 1; i <= n; ++i)
      state.moments[i] = state.moments[i - 1] * static_cast<double>(i) / kappa;
  } else {
    const double births = mu * p_star;
    for (std::size_t i = 0; i <= n; ++i) state.moments[i] = births / (model.decay(i) + mu);
  }

  const auto residual = equilibrium_residual(model, state);
  double norm = 0.0;
  for (double r : residual) norm = std::max(norm, std::abs(r));
  if (norm > 1e-8 * (1.0 + p_star))
    throw NumericalFailure("equilibrium residual " + format_double(norm) + " exceeds tolerance");
  return {summary.regime, summary.r0, std::move(state), norm};
}

EquilibriumReport equilibrium(const ModelSpec& model) {
  const auto summary = classify(model);
  if (summary.regime == Regime::Supercritical) return nontrivial_equilibrium(model);
  StateVector zero{0.0, std::vector<double>(model.order() + 1, 0.0)};
  return {summary.regime, summary.r0, std::move(zero), 0.0};
}

std::vector<double> equilibrium_residual(const ModelSpec& model, const StateVector& state) {
  return rhs(model, state).flatten();
}

}  // namespace agestruct
