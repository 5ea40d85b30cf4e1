#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "agestruct/dynamics.hpp"
#include "agestruct/model.hpp"

namespace agestruct {

/// The characteristic a = t through the origin, where the birth-cohort and
/// initial-cohort formulas meet. Values are the one-sided limits.
struct Seam {
  double age;
  double birth_side;    // a -> t from below
  double initial_side;  // a -> t from above
  double jump() const { return std::abs(birth_side - initial_side); }
};

struct AgeDensityGrid {
  double t;
  std::vector<double> ages;
  std::vector<double> density;
  std::vector<double> profile;
  double total;  // interpolated P(t)
  std::optional<Seam> seam;
};

/// Uniform grid of `points` ages on [0, a_max].
std::vector<double> uniform_age_grid(double a_max = 50.0, std::size_t points = 2001);

/// Density by characteristics:
///   p(a,t) = B(t-a) exp(-(M(t) - M(t-a)))  for a <= t,
///   p(a,t) = p0(a-t) exp(-M(t))            for a > t,
/// and p(a,0) = p0(a). Throws RangeError when t is outside the trajectory and
/// DegenerateProfileError when P(t) is below the extinction floor.
AgeDensityGrid reconstruct_density(const ModelSpec& model, const Trajectory& traj,
                                   const InitialDensity& p0, std::span<const double> ages, double t);

/// Composite Simpson over tabulated samples (3/8 rule closes an odd panel
/// count; a single interval falls back to the trapezoid rule).
double integrate_samples(std::span<const double> x, std::span<const double> y);

/// Relative errors between age-grid quadratures of the reconstructed density
/// and the interpolated moment state: (P, P_0, ..., P_n).
std::vector<double> moment_consistency(const ModelSpec& model, const AgeDensityGrid& grid,
                                       const Trajectory& traj);

}  // namespace agestruct
