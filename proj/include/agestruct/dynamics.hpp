#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "agestruct/model.hpp"
#include "agestruct/moment_system.hpp"
#include "agestruct/state.hpp"

namespace agestruct {

struct IntegratorSettings {
  double rtol = 1e-8;
  double atol = 1e-12;
  double initial_step = 1e-4;
  double safety = 0.9;
  /// Consecutive halvings allowed after a step produced a negative component.
  int max_positivity_retries = 60;
  /// Stop early once P drops below this value; 0 disables the check.
  double extinction_floor = 1e-12;
  std::size_t max_steps = 50'000'000;
};

/// Accepted integrator nodes with cubic Hermite dense output.
///
/// Each node stores the augmented state (P, P_0, ..., P_n, M) where
/// M(t) = int_0^t mu(P(s)) ds, its time derivative, and the birth rate.
class Trajectory {
 public:
  Trajectory(std::vector<double> times, std::vector<std::vector<double>> augmented,
             std::vector<std::vector<double>> derivatives, std::vector<double> births,
             bool extinct);

  std::size_t size() const { return times_.size(); }
  std::size_t order() const { return augmented_.front().size() - 3; }
  const std::vector<double>& times() const { return times_; }
  double start_time() const { return times_.front(); }
  double end_time() const { return times_.back(); }
  /// True when integration stopped at the extinction floor before t_end.
  bool extinct() const { return extinct_; }

  StateVector state(std::size_t node) const;
  double total(std::size_t node) const { return augmented_[node][0]; }
  double births(std::size_t node) const { return births_[node]; }
  double cumulative_mortality(std::size_t node) const { return augmented_[node].back(); }

  /// Dense output; throws RangeError outside [start_time, end_time].
  StateVector state_at(double t) const;
  double total_at(double t) const;
  double cumulative_mortality_at(double t) const;

  std::size_t rejected_steps = 0;

 private:
  std::vector<double> interpolate(double t) const;
  double interpolate_component(double t, std::size_t c) const;
  std::size_t segment(double t) const;

  std::vector<double> times_;
  std::vector<std::vector<double>> augmented_;
  std::vector<std::vector<double>> derivatives_;
  std::vector<double> births_;
  bool extinct_;
};

/// Adaptive Dormand-Prince 5(4) integration of the moment system, with M
/// carried as an extra component. Throws NumericalFailure on step-size
/// underflow or when positivity cannot be restored by step halving.
Trajectory integrate_system(const MomentSystem& system, const StateVector& init, double t_end,
                            const IntegratorSettings& settings = {});

/// Integrates the nonlinear moment system; every initial entry must be > 0.
Trajectory integrate(const ModelSpec& model, const StateVector& init, double t_end,
                     const IntegratorSettings& settings = {});

struct MonitorResult {
  std::string name;
  bool hypothesis_held = false;
  /// Only set when the hypothesis held on the computed window.
  std::optional<bool> conclusion_held;
  std::optional<double> first_violation_time;
};

struct MonitorReport {
  MonitorResult positivity;
  MonitorResult ordering;
  /// R0 > 1 and R_n(P(t)) <= 1 throughout  =>  P(t) >= P*.
  MonitorResult lower_bound;
  /// R_n(P(t)) >= 1 throughout  =>  P(t) <= P* and R0 > 1.
  MonitorResult upper_bound;

  std::vector<MonitorResult> all() const { return {positivity, ordering, lower_bound, upper_bound}; }
};

/// Slack applied to strict inequalities: 1e-10 * (1 + |value|).
inline double monitor_slack(double value) { return 1e-10 * (1.0 + std::abs(value)); }

MonitorReport run_monitors(const ModelSpec& model, const Trajectory& traj);

}  // namespace agestruct
