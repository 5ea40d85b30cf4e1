#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "agestruct/model.hpp"
#include "agestruct/state.hpp"

namespace agestruct {

struct QuadratureSettings {
  double a_max = 50.0;
  double abs_tol = 1e-10;
  std::size_t max_subdivisions = 1u << 20;
};

/// Adaptive composite Simpson with Richardson correction. The interval is
/// split into 2^min_depth panels before any convergence test so that sharply
/// decaying integrands are not accepted on a single coarse sample.
/// Throws NumericalFailure once more than `max_subdivisions` splits are needed.
double adaptive_simpson(const std::function<double(double)>& f, double lo, double hi,
                        double abs_tol, std::size_t max_subdivisions, int min_depth = 6);

struct InitialMoments {
  StateVector state;
  /// Closed-form bound on the neglected mass beyond a_max, per component (P, P_0..P_n).
  std::vector<double> tail_bounds;
};

/// Truncated moment integrals of p0 over [0, a_max]:
/// P = int p0, P_i = int w_i(a) p0(a) da with the kernel's moment weight.
/// Throws AssumptionError for an inadmissible p0, TruncationError when a
/// tail bound exceeds 1e3 * abs_tol.
InitialMoments moments_from_density(const InitialDensity& p0, const ModelSpec& model,
                                    const QuadratureSettings& settings = {});

}  // namespace agestruct
