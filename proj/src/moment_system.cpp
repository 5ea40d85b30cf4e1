#include "agestruct/moment_system.hpp"

namespace agestruct {

std::vector<double> RateMatrix::apply(std::span<const double> g) const {
  std::vector<double> out(dim_, 0.0);
  for (std::size_t r = 0; r < dim_; ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < dim_; ++c) acc += (*this)(r, c) * g[c];
    out[r] = acc;
  }
  return out;
}

RateMatrix assemble_matrix(const ModelSpec& model, double population) {
  const std::size_t n = model.order();
  RateMatrix a(n + 2);
  const double mu = model.eval_mu(population);
  std::vector<double> beta(n + 1);
  for (std::size_t i = 0; i <= n; ++i) beta[i] = model.eval_beta(i, population);

  a(0, 0) = -mu;
  for (std::size_t i = 0; i <= n; ++i) a(0, i + 1) = beta[i];

  if (model.is_polynomial()) {
    const double rho = model.decay(0);
    for (std::size_t j = 0; j <= n; ++j) a(1, j + 1) = beta[j];
    a(1, 1) += -rho - mu;
    for (std::size_t i = 1; i <= n; ++i) {
      a(i + 1, i) = static_cast<double>(i);
      a(i + 1, i + 1) = -rho - mu;
    }
  } else {
    // every moment row receives all births
    for (std::size_t i = 0; i <= n; ++i) {
      for (std::size_t j = 0; j <= n; ++j) a(i + 1, j + 1) = beta[j];
      a(i + 1, i + 1) += -model.decay(i) - mu;
    }
  }
  return a;
}

double birth_rate(const ModelSpec& model, const StateVector& state) {
  double b = 0.0;
  for (std::size_t i = 0; i < state.moments.size(); ++i)
    b += model.eval_beta(i, state.total) * state.moments[i];
  return b;
}

StateVector rhs(const ModelSpec& model, const StateVector& state) {
  const auto g = state.flatten();
  std::vector<double> dg(g.size());
  MomentSystem(model).derivative(g, dg);
  return StateVector::from_flat(dg);
}

double MomentSystem::births(std::span<const double> g) const {
  const double x = coefficient_population(g[0]);
  double b = 0.0;
  for (std::size_t i = 0; i + 1 < g.size(); ++i) b += model_->eval_beta(i, x) * g[i + 1];
  return b;
}

void MomentSystem::derivative(std::span<const double> g, std::span<double> dg) const {
  const ModelSpec& m = *model_;
  const double x = coefficient_population(g[0]);
  const double mu = m.eval_mu(x);
  const double b = births(g);
  const std::size_t n = m.order();

  dg[0] = b - mu * g[0];
  if (m.is_polynomial()) {
    const double loss = m.decay(0) + mu;
    dg[1] = b - loss * g[1];
    for (std::size_t i = 1; i <= n; ++i)
      dg[i + 1] = static_cast<double>(i) * g[i] - loss * g[i + 1];
  } else {
    for (std::size_t i = 0; i <= n; ++i) dg[i + 1] = b - (m.decay(i) + mu) * g[i + 1];
  }
}

}  // namespace agestruct
