#include "agestruct/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "agestruct/errors.hpp"
#include "agestruct/format.hpp"

namespace agestruct {

namespace {

struct Simpson {
  const std::function<double(double)>& f;
  std::size_t max_subdivisions;
  int min_depth;
  std::size_t splits = 0;

  double recurse(double a, double b, double fa, double fm, double fb, double whole, double tol,
                 int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth >= min_depth && (std::abs(delta) <= 15.0 * tol || depth > 60))
      return left + right + delta / 15.0;
    if (++splits > max_subdivisions)
      throw NumericalFailure("adaptive Simpson exceeded " + std::to_string(max_subdivisions) +
                             " subdivisions");
    return recurse(a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
           recurse(m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
  }
};

double integrate_piecewise(const std::function<double(double)>& f, std::vector<double> cuts,
                           double abs_tol, std::size_t max_subdivisions) {
  const double lo = cuts.front();
  const double hi = cuts.back();
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double share = abs_tol * (cuts[k + 1] - cuts[k]) / (hi - lo);
    total += adaptive_simpson(f, cuts[k], cuts[k + 1], share, max_subdivisions);
  }
  return total;
}

// int_0^inf (A + s)^i e^{-kappa s} ds = sum_k i!/(i-k)! A^{i-k} / kappa^{k+1}
double shifted_power_exp_integral(std::size_t i, double a, double kappa) {
  double sum = 0.0;
  double falling = 1.0;  // i!/(i-k)!
  for (std::size_t k = 0; k <= i; ++k) {
    sum += falling * std::pow(a, static_cast<double>(i - k)) / std::pow(kappa, k + 1.0);
    falling *= static_cast<double>(i - k);
  }
  return sum;
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double lo, double hi,
                        double abs_tol, std::size_t max_subdivisions, int min_depth) {
  if (!(abs_tol > 0.0)) throw DomainError("quadrature tolerance must be > 0");
  if (hi == lo) return 0.0;
  Simpson s{f, max_subdivisions, min_depth};
  const double fa = f(lo);
  const double fb = f(hi);
  const double fm = f(0.5 * (lo + hi));
  const double whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
  return s.recurse(lo, hi, fa, fm, fb, whole, abs_tol, 0);
}

InitialMoments moments_from_density(const InitialDensity& p0, const ModelSpec& model,
                                    const QuadratureSettings& settings) {
  p0.check();
  if (!(settings.a_max > 0.0) || !std::isfinite(settings.a_max))
    throw DomainError("truncation age must be finite and > 0");
  if (!(settings.abs_tol > 0.0)) throw DomainError("quadrature tolerance must be > 0");

  std::vector<double> cuts{0.0};
  for (double b : p0.breakpoints())
    if (b > 0.0 && b < settings.a_max) cuts.push_back(b);
  cuts.push_back(settings.a_max);

  const std::size_t n = model.order();
  InitialMoments out;
  out.state.moments.resize(n + 1);
  out.tail_bounds.resize(n + 2);

  const std::function<double(double)> mass = [&p0](double a) { return p0(a); };
  out.state.total = integrate_piecewise(mass, cuts, settings.abs_tol, settings.max_subdivisions);
  for (std::size_t i = 0; i <= n; ++i) {
    const std::function<double(double)> g = [&, i](double a) {
      return model.moment_weight(i, a) * p0(a);
    };
    out.state.moments[i] = integrate_piecewise(g, cuts, settings.abs_tol, settings.max_subdivisions);
  }

  // p0(a) <= p0(A) e^{-lambda (a - A)} beyond A
  const double a = settings.a_max;
  const double lambda = p0.declared_tail_rate();
  const double edge = p0(a);
  out.tail_bounds[0] = edge / lambda;
  for (std::size_t i = 0; i <= n; ++i) {
    const double rho = model.decay(i);
    const double kappa = rho + lambda;
    out.tail_bounds[i + 1] =
        model.is_polynomial()
            ? edge * std::exp(-rho * a) * shifted_power_exp_integral(i, a, kappa)
            : edge * std::exp(-rho * a) / kappa;
  }
  const double budget = settings.abs_tol * 1e3;
  for (std::size_t k = 0; k < out.tail_bounds.size(); ++k)
    if (out.tail_bounds[k] > budget)
      throw TruncationError("tail bound " + format_double(out.tail_bounds[k]) +
                            " beyond a_max = " + format_double(a) + " exceeds budget " +
                            format_double(budget) + " (component " + std::to_string(k) + ")");
  return out;
}

}  // namespace agestruct
