#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "agestruct/model.hpp"
#include "agestruct/quadrature.hpp"
#include "agestruct/reproduction.hpp"

namespace fixtures {

using agestruct::InitialDensity;
using agestruct::ModelSpec;
using agestruct::RateFunction;

inline ModelSpec baseline_model(double scale = 1.0) {
  ModelSpec m(agestruct::PolynomialAgeKernel{2.0},
              {RateFunction::exp_decay(1.0, 1.0), RateFunction::exp_decay(4.5, 1.0)},
              RateFunction::power_growth(1.0, 1.0, 2.0));
  return scale == 1.0 ? m : m.with_fertility_scale(scale);
}

inline InitialDensity unit_exponential() { return InitialDensity::exp_decay(1.0, 1.0); }

inline agestruct::StateVector baseline_initial_moments(const ModelSpec& model) {
  return agestruct::moments_from_density(unit_exponential(), model).state;
}

/// A randomly drawn model together with an exponential initial density.
struct Draw {
  ModelSpec model;
  InitialDensity p0;
  std::uint64_t seed;
};

/// Admissible random models with R0 in [r0_lo, r0_hi].
///
/// Orders 1..3, polynomial kernel with rho in [0.5, 4] (or a multi-exponential
/// kernel when `allow_multi`), fertility coefficients from either built-in
/// decreasing family, mortality m0 + c x^p with p in {1, 2}, and
/// p0 = s e^{-lambda a}. Amplitudes are rescaled afterwards to hit a target R0.
class ModelGenerator {
 public:
  ModelGenerator(std::uint64_t seed, double r0_lo, double r0_hi, bool allow_multi = false)
      : rng_(seed), r0_lo_(r0_lo), r0_hi_(r0_hi), allow_multi_(allow_multi) {}

  Draw next() {
    const std::uint64_t seed = rng_();
    std::mt19937_64 g(seed);
    auto uni = [&g](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(g); };
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 3)(g);
    const bool multi = allow_multi_ && uni(0, 1) < 0.3;

    agestruct::Kernel kernel;
    if (multi) {
      std::vector<double> rho(n + 1);
      for (auto& r : rho) r = uni(0.5, 4.0);
      kernel = agestruct::MultiExponentialKernel{rho};
    } else {
      kernel = agestruct::PolynomialAgeKernel{uni(0.5, 4.0)};
    }
    std::vector<RateFunction> beta;
    for (std::size_t i = 0; i <= n; ++i) {
      const double b = uni(0.1, 1.0);
      if (uni(0, 1) < 0.5) beta.push_back(RateFunction::exp_decay(b, uni(0.5, 2.0)));
      else beta.push_back(RateFunction::power_decay(b, uni(0.5, 2.0)));
    }
    const double p = uni(0, 1) < 0.5 ? 1.0 : 2.0;
    ModelSpec raw(kernel, beta, RateFunction::power_growth(uni(0.5, 2.0), uni(0.5, 2.0), p));
    const double target = uni(r0_lo_, r0_hi_);
    ModelSpec model = raw.with_fertility_scale(target / agestruct::net_reproduction_rate(raw, 0.0));
    return Draw{std::move(model), InitialDensity::exp_decay(uni(0.5, 2.0), uni(0.5, 3.0)), seed};
  }

 private:
  std::mt19937_64 rng_;
  double r0_lo_;
  double r0_hi_;
  bool allow_multi_;
};

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("agestruct_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace fixtures
