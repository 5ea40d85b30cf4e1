#include "agestruct/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "agestruct/errors.hpp"
#include "agestruct/format.hpp"

namespace agestruct {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kInf = std::numeric_limits<double>::infinity();

Trend sign_trend(double amplitude, double rate, bool growth) {
  if (amplitude == 0.0 || rate == 0.0) return Trend::Constant;
  const bool up = (amplitude > 0.0) == (rate > 0.0);
  // decay families are decreasing when amplitude and rate share a sign
  if (growth) return up ? Trend::Increasing : Trend::Decreasing;
  return up ? Trend::Decreasing : Trend::Increasing;
}

}  // namespace

double RateFunction::operator()(double x) const {
  return std::visit(
      overloaded{
          [x](const ExpDecay& f) { return f.b * std::exp(-f.k * x); },
          [x](const PowerDecay& f) { return f.b * std::pow(1.0 + x, -f.q); },
          [x](const PowerGrowth& f) { return f.m0 + f.c * std::pow(x, f.p); },
          [x](const Custom& f) { return f.value(x); },
      },
      rep_);
}

bool RateFunction::has_derivative() const {
  if (const auto* c = std::get_if<Custom>(&rep_)) return static_cast<bool>(c->derivative);
  return true;
}

double RateFunction::derivative(double x) const {
  return std::visit(
      overloaded{
          [x](const ExpDecay& f) { return -f.k * f.b * std::exp(-f.k * x); },
          [x](const PowerDecay& f) { return -f.q * f.b * std::pow(1.0 + x, -f.q - 1.0); },
          [x](const PowerGrowth& f) {
            if (f.p == 0.0 || f.c == 0.0) return 0.0;
            return f.c * f.p * std::pow(x, f.p - 1.0);
          },
          [x](const Custom& f) {
            if (!f.derivative)
              throw UnsupportedOperation("rate function '" + f.name +
                                         "' has no closed-form derivative");
            return f.derivative(x);
          },
      },
      rep_);
}

Trend RateFunction::trend() const {
  return std::visit(overloaded{
                        [](const ExpDecay& f) { return sign_trend(f.b, f.k, false); },
                        [](const PowerDecay& f) { return sign_trend(f.b, f.q, false); },
                        [](const PowerGrowth& f) {
                          if (f.p < 0.0) return Trend::Unknown;
                          return sign_trend(f.c, f.p, true);
                        },
                        [](const Custom&) { return Trend::Unknown; },
                    },
                    rep_);
}

bool RateFunction::provably_positive() const {
  return std::visit(overloaded{
                        [](const ExpDecay& f) { return f.b > 0.0; },
                        [](const PowerDecay& f) { return f.b > 0.0; },
                        [](const PowerGrowth& f) {
                          if (f.p == 0.0) return f.m0 + f.c > 0.0;
                          return f.m0 > 0.0 && f.c >= 0.0 && f.p > 0.0;
                        },
                        [](const Custom&) { return false; },
                    },
                    rep_);
}

std::optional<double> RateFunction::limit_at_infinity() const {
  using R = std::optional<double>;
  return std::visit(overloaded{
                        [](const ExpDecay& f) -> R {
                          if (f.b == 0.0 || f.k > 0.0) return 0.0;
                          if (f.k == 0.0) return f.b;
                          return f.b > 0.0 ? kInf : -kInf;
                        },
                        [](const PowerDecay& f) -> R {
                          if (f.b == 0.0 || f.q > 0.0) return 0.0;
                          if (f.q == 0.0) return f.b;
                          return f.b > 0.0 ? kInf : -kInf;
                        },
                        [](const PowerGrowth& f) -> R {
                          if (f.c == 0.0) return f.m0;
                          if (f.p == 0.0) return f.m0 + f.c;
                          if (f.p < 0.0) return f.m0;
                          return f.c > 0.0 ? kInf : -kInf;
                        },
                        [](const Custom&) -> R { return std::nullopt; },
                    },
                    rep_);
}

bool RateFunction::is_absent() const {
  return std::visit(overloaded{
                        [](const ExpDecay& f) { return f.b == 0.0; },
                        [](const PowerDecay& f) { return f.b == 0.0; },
                        [](const PowerGrowth& f) { return f.m0 == 0.0 && f.c == 0.0; },
                        [](const Custom&) { return false; },
                    },
                    rep_);
}

RateFunction RateFunction::scaled(double factor) const {
  return std::visit(
      overloaded{
          [factor](const ExpDecay& f) { return exp_decay(f.b * factor, f.k); },
          [factor](const PowerDecay& f) { return power_decay(f.b * factor, f.q); },
          [factor](const PowerGrowth& f) {
            return power_growth(f.m0 * factor, f.c * factor, f.p);
          },
          [factor](const Custom& f) {
            std::function<double(double)> d;
            if (f.derivative) d = [g = f.derivative, factor](double x) { return factor * g(x); };
            return custom(f.name, [g = f.value, factor](double x) { return factor * g(x); },
                          std::move(d));
          },
      },
      rep_);
}

std::string RateFunction::describe() const {
  return std::visit(
      overloaded{
          [](const ExpDecay& f) {
            return "exp_decay(b=" + format_double(f.b) + ", k=" + format_double(f.k) + ")";
          },
          [](const PowerDecay& f) {
            return "power_decay(b=" + format_double(f.b) + ", q=" + format_double(f.q) + ")";
          },
          [](const PowerGrowth& f) {
            return "power(m0=" + format_double(f.m0) + ", c=" + format_double(f.c) +
                   ", p=" + format_double(f.p) + ")";
          },
          [](const Custom& f) { return "custom(" + f.name + ")"; },
      },
      rep_);
}

namespace {

void require_finite_params(const RateFunction& f, const std::string& field) {
  if (!f.is_builtin()) return;
  if (std::isnan(f(0.0)) || !std::isfinite(f(1.0)))
    throw ConfigError(field, "non-finite parameter in " + f.describe());
}

}  // namespace

ModelSpec::ModelSpec(Kernel kernel, std::vector<RateFunction> beta, RateFunction mu)
    : kernel_(std::move(kernel)), beta_(std::move(beta)), mu_(std::move(mu)) {
  if (beta_.empty()) throw ConfigError("model.beta", "at least one fertility coefficient required");
  if (beta_.size() > kMaxOrder + 1)
    throw ConfigError("model.n", "order " + std::to_string(beta_.size() - 1) +
                                     " exceeds the cap of " + std::to_string(kMaxOrder));
  if (const auto* poly = std::get_if<PolynomialAgeKernel>(&kernel_)) {
    if (!std::isfinite(poly->rho) || poly->rho <= 0.0)
      throw ConfigError("model.rho", "must be finite and > 0, got " + format_double(poly->rho));
  } else {
    const auto& rho = std::get<MultiExponentialKernel>(kernel_).rho;
    if (rho.size() != beta_.size())
      throw ConfigError("model.rho", "multi-exponential kernel needs n+1 = " +
                                         std::to_string(beta_.size()) + " decay rates, got " +
                                         std::to_string(rho.size()));
    for (std::size_t i = 0; i < rho.size(); ++i)
      if (!std::isfinite(rho[i]) || rho[i] <= 0.0)
        throw ConfigError("model.rho[" + std::to_string(i) + "]",
                          "must be finite and > 0, got " + format_double(rho[i]));
  }
  for (std::size_t i = 0; i < beta_.size(); ++i)
    require_finite_params(beta_[i], "model.beta[" + std::to_string(i) + "]");
  require_finite_params(mu_, "model.mu");
}

double ModelSpec::decay(std::size_t i) const {
  if (const auto* poly = std::get_if<PolynomialAgeKernel>(&kernel_)) return poly->rho;
  return std::get<MultiExponentialKernel>(kernel_).rho.at(i);
}

double ModelSpec::eval_beta(std::size_t i, double x) const {
  if (i >= beta_.size())
    throw std::out_of_range("fertility coefficient index " + std::to_string(i) +
                            " out of range for order " + std::to_string(order()));
  return beta_[i](x);
}

double ModelSpec::fertility(double age, double x) const {
  if (const auto* poly = std::get_if<PolynomialAgeKernel>(&kernel_)) {
    double acc = 0.0;
    for (std::size_t i = beta_.size(); i-- > 0;) acc = acc * age + beta_[i](x);
    return std::exp(-poly->rho * age) * acc;
  }
  const auto& rho = std::get<MultiExponentialKernel>(kernel_).rho;
  double acc = 0.0;
  for (std::size_t i = 0; i < beta_.size(); ++i) acc += beta_[i](x) * std::exp(-rho[i] * age);
  return acc;
}

double ModelSpec::moment_weight(std::size_t i, double age) const {
  if (const auto* poly = std::get_if<PolynomialAgeKernel>(&kernel_))
    return std::pow(age, static_cast<double>(i)) * std::exp(-poly->rho * age);
  return std::exp(-std::get<MultiExponentialKernel>(kernel_).rho.at(i) * age);
}

ModelSpec ModelSpec::with_fertility_scale(double factor) const {
  std::vector<RateFunction> scaled;
  scaled.reserve(beta_.size());
  for (const auto& b : beta_) scaled.push_back(b.scaled(factor));
  return ModelSpec(kernel_, std::move(scaled), mu_);
}

std::vector<double> default_validation_grid(std::size_t count, double lo, double hi) {
  std::vector<double> grid{0.0};
  const double l0 = std::log10(lo);
  const double l1 = std::log10(hi);
  for (std::size_t k = 0; k < count; ++k) {
    const double s = count == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(count - 1);
    grid.push_back(std::pow(10.0, l0 + s * (l1 - l0)));
  }
  return grid;
}

namespace {

class Checker {
 public:
  Checker(std::span<const double> grid, ValidationReport& report)
      : grid_(grid), report_(report) {}

  void positivity(const RateFunction& f, const std::string& condition,
                  const std::string& subject) {
    if (f.provably_positive()) return;
    for (double x : grid_) {
      const double v = f(x);
      // an exact zero far out is treated as underflow of a decaying function
      const bool bad = f.is_builtin() ? !(v > 0.0) : (v < 0.0 || (v == 0.0 && x < kLargePopulation));
      if (bad || std::isnan(v)) add(condition, subject, x, {v});
    }
  }

  void monotone(const RateFunction& f, Trend want, const std::string& condition,
                const std::string& subject) {
    const Trend t = f.trend();
    if (t != Trend::Unknown) {
      if (t == want) return;
      for (std::size_t k = 0; k + 1 < grid_.size(); ++k)
        add(condition, subject, grid_[k], {f(grid_[k]), f(grid_[k + 1])});
      return;
    }
    for (std::size_t k = 0; k + 1 < grid_.size(); ++k) {
      const double a = f(grid_[k]);
      const double b = f(grid_[k + 1]);
      bool bad;
      if (want == Trend::Increasing) {
        bad = !(b - a >= kMonotoneTolerance);
      } else {
        if (std::abs(a) <= kMonotoneTolerance) continue;  // already vanished
        bad = !(a - b >= kMonotoneTolerance);
      }
      if (bad) add(condition, subject, grid_[k], {a, b});
    }
    if (!f.has_derivative()) return;
    for (double x : grid_) {
      // mu'(0) = 0 is admitted (the quadratic mortality of the reference example)
      if (x == 0.0) continue;
      const double d = f.derivative(x);
      if (want == Trend::Increasing ? !(d > 0.0) : (std::abs(f(x)) > kMonotoneTolerance && !(d < 0.0)))
        add(condition, subject, x, {d});
    }
  }

  void vanishes(const RateFunction& f, const std::string& subject) {
    const auto lim = f.limit_at_infinity();
    if (lim && *lim == 0.0) return;
    bool any_large = false;
    for (double x : grid_) {
      if (x < kLargePopulation) continue;
      any_large = true;
      const double v = f(x);
      if (lim || std::abs(v) > kVanishingTolerance) add("cb-limit", subject, x, {v});
    }
    if (!any_large) {
      const double x = grid_.back();
      const double v = f(x);
      if (lim || std::abs(v) > kVanishingTolerance) add("cb-limit", subject, x, {v});
    }
  }

  void unbounded(const RateFunction& f, const std::string& subject) {
    const double x = grid_.back();
    const double v = f(x);
    if (const auto lim = f.limit_at_infinity()) {
      if (!std::isinf(*lim) || *lim < 0.0) add("li", subject, x, {v});
      return;
    }
    const double floor = 10.0 * std::max(1.0, std::abs(f(grid_.front())));
    if (!(v >= floor)) add("li", subject, x, {v});
  }

  void add(const std::string& condition, const std::string& subject, double x,
           std::vector<double> observed) {
    report_.violations.push_back({condition, subject, x, std::move(observed)});
  }

 private:
  std::span<const double> grid_;
  ValidationReport& report_;
};

}  // namespace

ValidationReport validate_assumptions(const ModelSpec& model, std::span<const double> grid) {
  if (grid.empty() || grid.front() != 0.0)
    throw DomainError("validation grid must start at 0");
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!std::isfinite(grid[k])) throw DomainError("validation grid must be finite");
    if (k > 0 && !(grid[k] > grid[k - 1]))
      throw DomainError("validation grid must be strictly increasing");
  }

  ValidationReport report;
  Checker check(grid, report);

  const auto& beta = model.beta();
  if (!(beta[0](0.0) > 0.0)) check.add("cb0", "beta[0]", 0.0, {beta[0](0.0)});

  for (std::size_t i = 0; i < beta.size(); ++i) {
    const auto& f = beta[i];
    if (f.is_absent()) continue;
    const std::string subject = "beta[" + std::to_string(i) + "]";
    check.positivity(f, "cb", subject);
    check.monotone(f, Trend::Decreasing, "cb", subject);
    check.vanishes(f, subject);
  }

  const auto& mu = model.mu();
  check.positivity(mu, "cm", "mu");
  check.monotone(mu, Trend::Increasing, "cmd", "mu");
  check.unbounded(mu, "mu");
  // x^p with 0 < p < 1 has an unbounded derivative at the origin
  if (mu.is_builtin() && !std::isfinite(mu.derivative(0.0)))
    check.add("C1", "mu", 0.0, {mu.derivative(0.0)});
  return report;
}

InitialDensity InitialDensity::exp_decay(double scale, double rate) {
  return InitialDensity(ExpDecay{scale, rate}, rate);
}

InitialDensity InitialDensity::table(std::vector<double> ages, std::vector<double> values,
                                     double tail_rate) {
  return InitialDensity(Table{std::move(ages), std::move(values)}, tail_rate);
}

double InitialDensity::operator()(double age) const {
  return std::visit(
      overloaded{
          [age](const ExpDecay& d) { return d.scale * std::exp(-d.rate * age); },
          [age, this](const Table& t) {
            if (age <= t.ages.front()) return t.values.front();
            if (age >= t.ages.back())
              return t.values.back() * std::exp(-tail_rate_ * (age - t.ages.back()));
            const auto it = std::upper_bound(t.ages.begin(), t.ages.end(), age);
            const auto j = static_cast<std::size_t>(it - t.ages.begin());
            const double w = (age - t.ages[j - 1]) / (t.ages[j] - t.ages[j - 1]);
            return (1.0 - w) * t.values[j - 1] + w * t.values[j];
          },
      },
      rep_);
}

std::vector<double> InitialDensity::breakpoints() const {
  if (const auto* t = std::get_if<Table>(&rep_)) return t->ages;
  return {};
}

InitialDensity InitialDensity::scaled(double factor) const {
  return std::visit(overloaded{
                        [&](const ExpDecay& d) { return exp_decay(d.scale * factor, d.rate); },
                        [&](const Table& t) {
                          auto v = t.values;
                          for (auto& x : v) x *= factor;
                          return table(t.ages, std::move(v), tail_rate_);
                        },
                    },
                    rep_);
}

void InitialDensity::check() const {
  if (!std::isfinite(tail_rate_) || tail_rate_ <= 0.0)
    throw AssumptionError("(pn) initial density needs a positive declared tail rate");
  std::visit(overloaded{
                 [](const ExpDecay& d) {
                   if (!(d.scale > 0.0) || !std::isfinite(d.scale))
                     throw AssumptionError("(in) initial density scale must be > 0");
                   if (!(d.rate > 0.0) || !std::isfinite(d.rate))
                     throw AssumptionError("(pn) initial density rate must be > 0 for finite mass");
                 },
                 [](const Table& t) {
                   if (t.ages.size() < 2 || t.ages.size() != t.values.size())
                     throw AssumptionError("initial density table needs >= 2 matching ages/values");
                   if (t.ages.front() != 0.0)
                     throw AssumptionError("initial density table must start at age 0");
                   for (std::size_t k = 0; k < t.ages.size(); ++k) {
                     if (k > 0 && !(t.ages[k] > t.ages[k - 1]))
                       throw AssumptionError("initial density ages must be strictly increasing");
                     if (!(t.values[k] > 0.0) || !std::isfinite(t.values[k])) {
                       std::ostringstream os;
                       os << "(in) initial density must be positive; p0(" << format_double(t.ages[k])
                          << ") = " << format_double(t.values[k]);
                       throw AssumptionError(os.str());
                     }
                   }
                 },
             },
             rep_);
}

}  // namespace agestruct
