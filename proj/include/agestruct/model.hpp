#pragma once

// Demographic model: population-size dependent fertility coefficients,
// mortality, the age kernel that weights fertility, and the initial age
// density. Everything here is immutable once constructed.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace agestruct {

inline constexpr std::size_t kMaxOrder = 20;

/// Monotone trend of a rate function on [0, inf), when it is known in closed form.
enum class Trend { Increasing, Decreasing, Constant, Unknown };

/// A scalar rate as a function of total population size x >= 0.
///
/// Built-in families have closed-form derivatives and analytically known
/// shape, which lets validation decide the standing conditions exactly.
/// Custom functions are validated numerically on a sample grid.
class RateFunction {
 public:
  /// b * exp(-k x)
  struct ExpDecay {
    double b;
    double k;
  };
  /// b * (1 + x)^(-q)
  struct PowerDecay {
    double b;
    double q;
  };
  /// m0 + c * x^p
  struct PowerGrowth {
    double m0;
    double c;
    double p;
  };
  struct Custom {
    std::string name;
    std::function<double(double)> value;
    std::function<double(double)> derivative;  // may be empty
  };

  static RateFunction exp_decay(double b, double k) { return RateFunction(ExpDecay{b, k}); }
  static RateFunction power_decay(double b, double q) { return RateFunction(PowerDecay{b, q}); }
  static RateFunction power_growth(double m0, double c, double p) {
    return RateFunction(PowerGrowth{m0, c, p});
  }
  static RateFunction custom(std::string name, std::function<double(double)> value,
                             std::function<double(double)> derivative = {}) {
    return RateFunction(Custom{std::move(name), std::move(value), std::move(derivative)});
  }

  double operator()(double x) const;
  bool has_derivative() const;
  /// Throws UnsupportedOperation for custom functions without a derivative.
  double derivative(double x) const;

  Trend trend() const;
  /// True when the function is provably > 0 on [0, inf).
  bool provably_positive() const;
  /// Value of lim_{x->inf}, when known in closed form (may be +inf).
  std::optional<double> limit_at_infinity() const;
  /// Amplitude parameter identically zero: the coefficient is absent.
  bool is_absent() const;

  /// Same family with its amplitude multiplied by `factor`.
  RateFunction scaled(double factor) const;
  bool is_builtin() const { return !std::holds_alternative<Custom>(rep_); }
  std::string describe() const;

 private:
  using Rep = std::variant<ExpDecay, PowerDecay, PowerGrowth, Custom>;
  explicit RateFunction(Rep rep) : rep_(std::move(rep)) {}
  Rep rep_;
};

/// Fertility age kernel e^{-rho a} * sum_i beta_i(P) a^i.
struct PolynomialAgeKernel {
  double rho;
};

/// Fertility age kernel sum_i beta_i(P) e^{-rho_i a}.
struct MultiExponentialKernel {
  std::vector<double> rho;
};

using Kernel = std::variant<PolynomialAgeKernel, MultiExponentialKernel>;

class ModelSpec {
 public:
  /// Checks structure only (counts, rho > 0, order cap, finite parameters);
  /// the standing assumptions are checked by validate_assumptions().
  ModelSpec(Kernel kernel, std::vector<RateFunction> beta, RateFunction mu);

  std::size_t order() const { return beta_.size() - 1; }
  /// Number of moment-system components, n + 2.
  std::size_t state_size() const { return beta_.size() + 1; }

  const Kernel& kernel() const { return kernel_; }
  bool is_polynomial() const { return std::holds_alternative<PolynomialAgeKernel>(kernel_); }
  /// Age decay of moment i: rho for the polynomial kernel, rho_i otherwise.
  double decay(std::size_t i) const;

  const std::vector<RateFunction>& beta() const { return beta_; }
  const RateFunction& mu() const { return mu_; }

  /// Throws std::out_of_range when i > n.
  double eval_beta(std::size_t i, double x) const;
  double eval_mu(double x) const { return mu_(x); }

  /// Fertility beta(a, x) at age a.
  double fertility(double age, double x) const;

  /// Moment weight at age a for moment i: a^i e^{-rho a} or e^{-rho_i a}.
  double moment_weight(std::size_t i, double age) const;

  ModelSpec with_fertility_scale(double factor) const;

 private:
  Kernel kernel_;
  std::vector<RateFunction> beta_;
  RateFunction mu_;
};

struct Violation {
  std::string condition;  // e.g. "cb", "cb-limit", "cm", "cmd", "li"
  std::string subject;    // "beta[1]", "mu", "rho[0]"
  double x;
  std::vector<double> observed;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool passed() const { return violations.empty(); }
};

/// {0} followed by `count` log-spaced points in [lo, hi].
std::vector<double> default_validation_grid(std::size_t count = 32, double lo = 1e-3,
                                            double hi = 1e3);

inline constexpr double kMonotoneTolerance = 1e-12;
/// Grid points at or beyond this size are used for the vanishing-limit check.
inline constexpr double kLargePopulation = 50.0;
inline constexpr double kVanishingTolerance = 1e-3;

/// Grid must be finite, strictly increasing and start at 0; throws DomainError otherwise.
ValidationReport validate_assumptions(const ModelSpec& model,
                                      std::span<const double> grid);
inline ValidationReport validate_assumptions(const ModelSpec& model) {
  auto grid = default_validation_grid();
  return validate_assumptions(model, grid);
}

/// Initial age density p0(a).
class InitialDensity {
 public:
  struct ExpDecay {
    double scale;
    double rate;
  };
  /// Piecewise linear on the table, exponential tail beyond the last age.
  struct Table {
    std::vector<double> ages;
    std::vector<double> values;
  };

  static InitialDensity exp_decay(double scale, double rate);
  /// `tail_rate` bounds p0 beyond the last tabulated age.
  static InitialDensity table(std::vector<double> ages, std::vector<double> values,
                              double tail_rate);

  double operator()(double age) const;
  double declared_tail_rate() const { return tail_rate_; }
  /// Ages where the density has kinks (table nodes); empty for smooth families.
  std::vector<double> breakpoints() const;
  InitialDensity scaled(double factor) const;

  /// Throws AssumptionError when p0 is not positive on its support or has
  /// infinite mass.
  void check() const;

 private:
  using Rep = std::variant<ExpDecay, Table>;
  InitialDensity(Rep rep, double tail_rate) : rep_(std::move(rep)), tail_rate_(tail_rate) {}
  Rep rep_;
  double tail_rate_;
};

}  // namespace agestruct
