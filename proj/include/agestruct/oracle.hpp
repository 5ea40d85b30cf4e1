#pragma once

// Independent cross-checks of the moment reduction: a direct solver for the
// age-structured transport equation and the frozen-coefficient linear system
// that dominates the nonlinear dynamics.

#include <cstddef>
#include <optional>
#include <vector>

#include "agestruct/dynamics.hpp"
#include "agestruct/model.hpp"

namespace agestruct {

struct PdeRun {
  double dt;
  std::vector<double> ages;    // j * dt, j = 0..J
  std::vector<double> times;   // m * dt, m = 0..steps
  std::vector<double> totals;  // trapezoid P^m
  std::vector<std::vector<double>> moments;  // trapezoid P_i^m
  std::vector<double> births;  // renewal integral at row m
  /// Density rows kept every `snapshot_stride` steps (plus the final row).
  std::vector<std::size_t> snapshot_steps;
  std::vector<std::vector<double>> snapshots;
};

/// Semi-Lagrangian scheme with da = dt: each step shifts the density one
/// age cell and applies survival exp(-dt (mu(P^m) + mu(P^{m+1})) / 2); the
/// newborn cell is the renewal integral of the new row. Totals, moments and
/// the renewal integral use the trapezoid rule, with the jump along a = t
/// resolved by its two one-sided limits. Both a_max/dt and t_end/dt must be
/// integers (ConfigError otherwise).
PdeRun pde_solve(const ModelSpec& model, const InitialDensity& p0, double a_max, double dt,
                 double t_end, std::size_t snapshot_stride = 0);

/// The linear system with coefficients frozen at mu(0), beta_i(0), from the
/// same initial state. Runs to t_end without an extinction cutoff.
Trajectory comparison_trajectory(const ModelSpec& model, const StateVector& init, double t_end,
                                 IntegratorSettings settings = {});

struct BoundCheck {
  bool holds;
  std::optional<double> first_violation_time;
  double max_excess;  // max over nodes of P - P_bar
};

inline constexpr double kComparisonSlack = 1e-10;

/// Checks P(t) <= P_bar(t) + slack on the union of both node grids.
/// Throws RangeError when the trajectories cover different horizons.
BoundCheck compare_bound(const Trajectory& nonlinear, const Trajectory& frozen,
                         double slack = kComparisonSlack);

/// Sorted union of both trajectories' node times.
std::vector<double> merged_times(const Trajectory& a, const Trajectory& b);

}  // namespace agestruct
