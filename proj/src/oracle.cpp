#include "agestruct/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <stdexcept>

#include "agestruct/errors.hpp"
#include "agestruct/format.hpp"

namespace agestruct {

namespace {

std::size_t integral_ratio(double num, double den, const char* field) {
  const double r = num / den;
  const double k = std::round(r);
  if (k < 1.0 || std::abs(r - k) > 1e-9 * std::max(1.0, r))
    throw ConfigError(field, format_double(num) + " is not an integer multiple of dt = " +
                                 format_double(den));
  return static_cast<std::size_t>(k);
}

constexpr int kPdeMaxCorrections = 50;

double trapezoid_uniform(const std::vector<double>& y, double h) {
  double s = 0.5 * (y.front() + y.back());
  for (std::size_t j = 1; j + 1 < y.size(); ++j) s += y[j];
  return s * h;
}

}  // namespace

PdeRun pde_solve(const ModelSpec& model, const InitialDensity& p0, double a_max, double dt,
                 double t_end, std::size_t snapshot_stride) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt", "must be finite and > 0");
  if (!(t_end >= 0.0)) throw ConfigError("t_end", "must be >= 0");
  p0.check();
  const std::size_t cells = integral_ratio(a_max, dt, "a_max");
  const std::size_t steps = t_end == 0.0 ? 0 : integral_ratio(t_end, dt, "t_end");
  const std::size_t n = model.order();

  PdeRun run;
  run.dt = dt;
  run.ages.resize(cells + 1);
  for (std::size_t j = 0; j <= cells; ++j) run.ages[j] = static_cast<double>(j) * dt;

  std::vector<std::vector<double>> weights(n + 1, std::vector<double>(cells + 1));
  for (std::size_t i = 0; i <= n; ++i)
    for (std::size_t j = 0; j <= cells; ++j) weights[i][j] = model.moment_weight(i, run.ages[j]);

  std::vector<double> p(cells + 1);
  for (std::size_t j = 0; j <= cells; ++j) p[j] = p0(run.ages[j]);

  struct RowStats {
    double total;
    std::vector<double> moments;
    double births;
  };
  // The density jumps across the characteristic a = t whenever p0(0) != B(0).
  // That characteristic always sits on node `seam`; the row stores its
  // initial-side value and `seam_left` its birth-side limit. Quadrature uses
  // the mean of both limits there, which keeps the trapezoid rule second order.
  std::size_t seam = 0;
  double seam_left = 0.0;
  std::vector<double> scratch(cells + 1);
  auto stats = [&](const std::vector<double>& row) {
    std::vector<double> eff = row;
    if (seam > 0) eff[seam] = seam == cells ? seam_left : 0.5 * (row[seam] + seam_left);
    RowStats out{trapezoid_uniform(eff, dt), std::vector<double>(n + 1), 0.0};
    for (std::size_t i = 0; i <= n; ++i) {
      for (std::size_t j = 0; j <= cells; ++j) scratch[j] = weights[i][j] * eff[j];
      out.moments[i] = trapezoid_uniform(scratch, dt);
      // beta(a, P) = sum_i beta_i(P) w_i(a) for both kernels
      out.births += model.eval_beta(i, out.total) * out.moments[i];
    }
    return out;
  };
  auto record = [&](std::size_t m, RowStats st) {
    run.times.push_back(static_cast<double>(m) * dt);
    run.totals.push_back(st.total);
    run.moments.push_back(std::move(st.moments));
    run.births.push_back(st.births);
    if ((snapshot_stride > 0 && m % snapshot_stride == 0) || m == steps) {
      run.snapshot_steps.push_back(m);
      run.snapshots.push_back(p);
    }
  };

  RowStats current = stats(p);
  record(0, current);
  std::vector<double> shifted(cells + 1);
  double left_start = current.births;
  for (std::size_t m = 0; m < steps; ++m) {
    // Trapezoidal in time along each characteristic: mortality averaged over the
    // step ends, renewal taken from the new row. The coupling is resolved by
    // fixed-point iteration, which contracts at rate O(dt).
    const double mu_old = model.eval_mu(current.total);
    for (std::size_t j = cells; j > 0; --j) shifted[j] = p[j - 1];
    const std::size_t next_seam = m + 1 <= cells ? m + 1 : 0;
    double mu_new = mu_old;
    double newborn = current.births;
    RowStats next;
    for (int it = 0; it < kPdeMaxCorrections; ++it) {
      const double survival = std::exp(-0.5 * (mu_old + mu_new) * dt);
      for (std::size_t j = 1; j <= cells; ++j) p[j] = shifted[j] * survival;
      p[0] = newborn;
      seam = next_seam;
      seam_left = left_start * survival;
      next = stats(p);
      const double change = std::abs(next.births - newborn) + std::abs(model.eval_mu(next.total) - mu_new);
      newborn = next.births;
      mu_new = model.eval_mu(next.total);
      if (change <= 1e-15 * (1.0 + newborn + mu_new)) break;
    }
    if (newborn < 0.0 || std::any_of(p.begin(), p.end(), [](double v) { return v < 0.0; }))
      throw std::logic_error("pde_solve produced a negative density");
    left_start = seam_left;
    current = std::move(next);
    record(m + 1, current);
  }
  return run;
}

Trajectory comparison_trajectory(const ModelSpec& model, const StateVector& init, double t_end,
                                 IntegratorSettings settings) {
  for (double v : init.flatten())
    if (!(v >= 0.0) || !std::isfinite(v))
      throw DomainError("comparison system initial state must be finite and >= 0");
  settings.extinction_floor = 0.0;
  return integrate_system(MomentSystem::frozen(model, 0.0), init, t_end, settings);
}

std::vector<double> merged_times(const Trajectory& a, const Trajectory& b) {
  std::vector<double> t;
  t.reserve(a.size() + b.size());
  std::merge(a.times().begin(), a.times().end(), b.times().begin(), b.times().end(),
             std::back_inserter(t));
  t.erase(std::unique(t.begin(), t.end()), t.end());
  return t;
}

BoundCheck compare_bound(const Trajectory& nonlinear, const Trajectory& frozen, double slack) {
  const double horizon = std::max(std::abs(nonlinear.end_time()), 1.0);
  if (std::abs(nonlinear.start_time() - frozen.start_time()) > 1e-9 * horizon ||
      std::abs(nonlinear.end_time() - frozen.end_time()) > 1e-9 * horizon)
    throw RangeError("trajectories cover different horizons: [" +
                     format_double(nonlinear.start_time()) + ", " +
                     format_double(nonlinear.end_time()) + "] vs [" +
                     format_double(frozen.start_time()) + ", " + format_double(frozen.end_time()) +
                     "]");
  BoundCheck out{true, std::nullopt, -std::numeric_limits<double>::infinity()};
  const double t_max = std::min(nonlinear.end_time(), frozen.end_time());
  for (double t : merged_times(nonlinear, frozen)) {
    const double tc = std::min(t, t_max);
    const double excess = nonlinear.total_at(tc) - frozen.total_at(tc);
    out.max_excess = std::max(out.max_excess, excess);
    if (out.holds && excess > slack) {
      out.holds = false;
      out.first_violation_time = t;
    }
  }
  return out;
}

}  // namespace agestruct
