#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "agestruct/model.hpp"
#include "agestruct/state.hpp"

namespace agestruct {

enum class Regime { Subcritical, Critical, Supercritical };

std::string_view to_string(Regime regime);

/// |R0 - 1| within this band is Critical.
inline constexpr double kCriticalBand = 1e-9;
/// Values of y within this relative distance of R0 invert to 0; the bisection
/// bracket is closed to 1e-2 of this, relative to max(1, x).
inline constexpr double kInverseTolerance = 1e-12;
inline constexpr int kMaxBracketDoublings = 200;

struct ReproductionSummary {
  double r0;
  Regime regime;
};

struct EquilibriumReport {
  Regime regime;
  double r0;
  /// (P*, P_0*, ..., P_n*); all zero for the trivial equilibrium.
  StateVector state;
  double residual_inf_norm;
  bool nontrivial() const { return state.total > 0.0; }
};

/// w_i = i! / kappa^{i+1}, by the recursion w_0 = 1/kappa, w_i = w_{i-1} i / kappa.
std::vector<double> factorial_weights(double kappa, std::size_t n);

/// R_n(x): expected lifetime offspring per individual at frozen population size x.
double net_reproduction_rate(const ModelSpec& model, double x);

/// Closed-form dR_n/dx. Throws UnsupportedOperation for custom families
/// without derivatives.
double rn_derivative(const ModelSpec& model, double x);

/// Unique x >= 0 with R_n(x) = y for y in (0, R0], by bracket doubling and bisection.
/// Throws DomainError for y <= 0 and NoSolutionError for y > R0.
double rn_inverse(const ModelSpec& model, double y);

ReproductionSummary classify(const ModelSpec& model);

/// The positive equilibrium; requires a supercritical model (PreconditionError otherwise).
EquilibriumReport nontrivial_equilibrium(const ModelSpec& model);

/// Nontrivial equilibrium when supercritical, otherwise the trivial one.
EquilibriumReport equilibrium(const ModelSpec& model);

/// Right-hand side of the equilibrium equations at `state` (length n+2).
std::vector<double> equilibrium_residual(const ModelSpec& model, const StateVector& state);

}  // namespace agestruct
