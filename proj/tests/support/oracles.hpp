#pragma once

// Independent reference computations used by the test suites. Nothing here
// calls into the library's numerics; models are described by plain lambdas.

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <unsupported/Eigen/MatrixFunctions>

namespace oracle {

/// Reference description of a model: fertility kernel beta(a, x) and mortality mu(x).
struct RefModel {
  std::function<double(double, double)> fertility;  // (age, x)
  std::function<double(double)> mu;
  std::vector<std::function<double(double)>> beta;   // beta_i(x)
  std::function<double(std::size_t, double)> weight; // moment weight w_i(a)
  std::size_t n() const { return beta.size() - 1; }
};

/// The reference logistic example: n = 1, rho = 2, beta_0 = e^{-x},
/// beta_1 = 4.5 e^{-x}, mu = 1 + x^2, all multiplied by `scale`.
inline RefModel baseline(double scale = 1.0) {
  RefModel m;
  m.beta = {[scale](double x) { return scale * std::exp(-x); },
            [scale](double x) { return scale * 4.5 * std::exp(-x); }};
  m.mu = [](double x) { return 1.0 + x * x; };
  m.fertility = [scale](double a, double x) {
    return scale * (1.0 + 4.5 * a) * std::exp(-x) * std::exp(-2.0 * a);
  };
  m.weight = [](std::size_t i, double a) { return std::pow(a, static_cast<double>(i)) * std::exp(-2.0 * a); };
  return m;
}

/// int_lo^hi f by adaptive Gauss-Kronrod.
inline double integrate(const std::function<double(double)>& f, double lo, double hi) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, lo, hi, 25, 1e-14);
}

/// Non-adaptive 30-point Gauss-Legendre; exact for polynomials up to degree 59.
inline double integrate_gauss(const std::function<double(double)>& f, double lo, double hi) {
  return boost::math::quadrature::gauss<double, 30>::integrate(f, lo, hi);
}

/// int_0^inf f by the exp-sinh rule.
inline double integrate_half_line(const std::function<double(double)>& f) {
  boost::math::quadrature::exp_sinh<double> q;
  return q.integrate(f, 0.0, std::numeric_limits<double>::infinity(), 1e-15);
}

/// Lifetime offspring at frozen x: int_0^inf beta(a, x) e^{-mu(x) a} da.
inline double net_reproduction(const RefModel& m, double x) {
  const double mu = m.mu(x);
  return integrate_half_line([&](double a) { return m.fertility(a, x) * std::exp(-mu * a); });
}

/// Root of a sign-changing f on [lo, hi] by TOMS 748.
inline double root(const std::function<double(double)>& f, double lo, double hi) {
  boost::uintmax_t iters = 500;
  auto tol = [](double a, double b) { return std::abs(b - a) <= 1e-15 * std::max(1.0, std::abs(a)); };
  const auto r = boost::math::tools::toms748_solve(f, lo, hi, tol, iters);
  return 0.5 * (r.first + r.second);
}

/// Central difference with step h.
inline double central_difference(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

/// Right-hand side of the moment system for a polynomial age kernel,
/// written out component by component.
inline std::vector<double> moment_rhs(const RefModel& m, double rho, const std::vector<double>& g) {
  const double P = g[0];
  const double mu = m.mu(P);
  double B = 0.0;
  for (std::size_t i = 0; i <= m.n(); ++i) B += m.beta[i](P) * g[i + 1];
  std::vector<double> d(g.size());
  d[0] = B - mu * P;
  d[1] = B - (rho + mu) * g[1];
  for (std::size_t i = 1; i <= m.n(); ++i) d[i + 1] = static_cast<double>(i) * g[i] - (rho + mu) * g[i + 1];
  return d;
}

/// Classical fixed-step RK4 for y' = f(y).
inline std::vector<double> rk4(const std::function<std::vector<double>(const std::vector<double>&)>& f,
                               std::vector<double> y, double t_end, std::size_t steps) {
  const double h = t_end / static_cast<double>(steps);
  auto axpy = [](const std::vector<double>& y0, const std::vector<double>& k, double s) {
    std::vector<double> out(y0);
    for (std::size_t c = 0; c < out.size(); ++c) out[c] += s * k[c];
    return out;
  };
  for (std::size_t s = 0; s < steps; ++s) {
    const auto k1 = f(y);
    const auto k2 = f(axpy(y, k1, h / 2));
    const auto k3 = f(axpy(y, k2, h / 2));
    const auto k4 = f(axpy(y, k3, h));
    for (std::size_t c = 0; c < y.size(); ++c) y[c] += h / 6 * (k1[c] + 2 * k2[c] + 2 * k3[c] + k4[c]);
  }
  return y;
}

/// exp(A t) g0 for a constant matrix.
inline Eigen::VectorXd linear_flow(const Eigen::MatrixXd& A, const Eigen::VectorXd& g0, double t) {
  const Eigen::MatrixXd E = (A * t).exp();
  return E * g0;
}

/// Frozen-coefficient matrix of the polynomial-kernel moment system at x = 0.
inline Eigen::MatrixXd frozen_matrix(const RefModel& m, double rho) {
  const std::size_t d = m.n() + 2;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  const double mu = m.mu(0.0);
  A(0, 0) = -mu;
  for (std::size_t j = 0; j <= m.n(); ++j) {
    A(0, static_cast<Eigen::Index>(j + 1)) = m.beta[j](0.0);
    A(1, static_cast<Eigen::Index>(j + 1)) = m.beta[j](0.0);
  }
  A(1, 1) -= rho + mu;
  for (std::size_t i = 1; i <= m.n(); ++i) {
    const auto r = static_cast<Eigen::Index>(i + 1);
    A(r, r - 1) = static_cast<double>(i);
    A(r, r) = -(rho + mu);
  }
  return A;
}

}  // namespace oracle
