#pragma once

// The closed ODE system for (P, P_0, ..., P_n) obtained by taking age moments
// of the transport equation. Both fertility kernels are supported.

#include <cstddef>
#include <span>
#include <vector>

#include "agestruct/model.hpp"
#include "agestruct/state.hpp"

namespace agestruct {

/// Dense (n+2) x (n+2) coefficient matrix A(P), row-major.
class RateMatrix {
 public:
  explicit RateMatrix(std::size_t dim) : dim_(dim), data_(dim * dim, 0.0) {}

  std::size_t dim() const { return dim_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * dim_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * dim_ + c]; }

  std::vector<double> apply(std::span<const double> g) const;

 private:
  std::size_t dim_;
  std::vector<double> data_;
};

RateMatrix assemble_matrix(const ModelSpec& model, double population);

/// Total birth rate B = sum_i beta_i(P) P_i.
double birth_rate(const ModelSpec& model, const StateVector& state);

/// G' = A(P) G evaluated directly (not through the matrix).
StateVector rhs(const ModelSpec& model, const StateVector& state);

/// The moment system with coefficients either following the state's own P or
/// frozen at a fixed population size (the linear comparison system).
class MomentSystem {
 public:
  explicit MomentSystem(const ModelSpec& model) : model_(&model) {}
  static MomentSystem frozen(const ModelSpec& model, double population) {
    MomentSystem s(model);
    s.frozen_ = true;
    s.frozen_at_ = population;
    return s;
  }

  const ModelSpec& model() const { return *model_; }
  std::size_t dim() const { return model_->state_size(); }
  bool is_frozen() const { return frozen_; }

  /// Population size at which beta_i and mu are evaluated.
  double coefficient_population(double total) const { return frozen_ ? frozen_at_ : total; }
  double mortality(double total) const { return model_->eval_mu(coefficient_population(total)); }
  double births(std::span<const double> g) const;

  /// dg = A(.) g for flat state g of size n+2.
  void derivative(std::span<const double> g, std::span<double> dg) const;

 private:
  const ModelSpec* model_;
  bool frozen_ = false;
  double frozen_at_ = 0.0;
};

}  // namespace agestruct
