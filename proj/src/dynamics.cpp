#include "agestruct/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "agestruct/errors.hpp"
#include "agestruct/format.hpp"
#include "agestruct/reproduction.hpp"

namespace agestruct {

Trajectory::Trajectory(std::vector<double> times, std::vector<std::vector<double>> augmented,
                       std::vector<std::vector<double>> derivatives, std::vector<double> births,
                       bool extinct)
    : times_(std::move(times)),
      augmented_(std::move(augmented)),
      derivatives_(std::move(derivatives)),
      births_(std::move(births)),
      extinct_(extinct) {
  if (times_.empty()) throw DomainError("trajectory needs at least one node");
  if (augmented_.size() != times_.size() || derivatives_.size() != times_.size() ||
      births_.size() != times_.size())
    throw DomainError("trajectory node arrays differ in length");
}

StateVector Trajectory::state(std::size_t node) const {
  const auto& a = augmented_[node];
  return StateVector{a[0], std::vector<double>(a.begin() + 1, a.end() - 1)};
}

std::size_t Trajectory::segment(double t) const {
  const double lo = times_.front();
  const double hi = times_.back();
  const double eps = 1e-12 * std::max(1.0, std::abs(hi));
  if (!(t >= lo - eps && t <= hi + eps))
    throw RangeError("time " + format_double(t) + " outside trajectory [" + format_double(lo) +
                     ", " + format_double(hi) + "]");
  if (times_.size() == 1) return 0;
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  std::size_t k = it == times_.begin() ? 0 : static_cast<std::size_t>(it - times_.begin()) - 1;
  return std::min(k, times_.size() - 2);
}

double Trajectory::interpolate_component(double t, std::size_t c) const {
  const std::size_t k = segment(t);
  if (times_.size() == 1) return augmented_[0][c];
  const double t0 = times_[k];
  const double h = times_[k + 1] - t0;
  const double s = std::clamp((t - t0) / h, 0.0, 1.0);
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
  const double h10 = s3 - 2.0 * s2 + s;
  const double h01 = -2.0 * s3 + 3.0 * s2;
  const double h11 = s3 - s2;
  return h00 * augmented_[k][c] + h10 * h * derivatives_[k][c] + h01 * augmented_[k + 1][c] +
         h11 * h * derivatives_[k + 1][c];
}

std::vector<double> Trajectory::interpolate(double t) const {
  std::vector<double> out(augmented_.front().size());
  for (std::size_t c = 0; c < out.size(); ++c) out[c] = interpolate_component(t, c);
  return out;
}

StateVector Trajectory::state_at(double t) const {
  const auto a = interpolate(t);
  return StateVector{a[0], std::vector<double>(a.begin() + 1, a.end() - 1)};
}

double Trajectory::total_at(double t) const { return interpolate_component(t, 0); }

double Trajectory::cumulative_mortality_at(double t) const {
  return interpolate_component(t, augmented_.front().size() - 1);
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

// Error-controller exponents (PI control).
constexpr double kAlpha = 0.17;
constexpr double kBeta = 0.04;
constexpr double kMinFactor = 0.2;
constexpr double kMaxFactor = 5.0;

class Augmented {
 public:
  explicit Augmented(const MomentSystem& system) : system_(system), dim_(system.dim()) {}

  std::size_t dim() const { return dim_ + 1; }

  void operator()(std::span<const double> y, std::span<double> dy) const {
    system_.derivative(y.first(dim_), dy.first(dim_));
    dy[dim_] = system_.mortality(y[0]);
  }

 private:
  const MomentSystem& system_;
  std::size_t dim_;
};

}  // namespace

Trajectory integrate_system(const MomentSystem& system, const StateVector& init, double t_end,
                            const IntegratorSettings& settings) {
  if (init.size() != system.dim())
    throw DomainError("initial state has " + std::to_string(init.size()) +
                      " components, model needs " + std::to_string(system.dim()));
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw DomainError("t_end must be finite and >= 0");
  if (!(settings.rtol > 0.0) || !(settings.atol > 0.0))
    throw DomainError("integrator tolerances must be > 0");

  const Augmented f(system);
  const std::size_t d = f.dim();
  const std::size_t state_dim = d - 1;

  std::vector<double> y = init.flatten();
  y.push_back(0.0);
  std::vector<double> k1(d), k2(d), k3(d), k4(d), k5(d), k6(d), k7(d), tmp(d), y_new(d), err(d);
  f(y, k1);

  std::vector<double> times{0.0};
  std::vector<std::vector<double>> nodes{y};
  std::vector<std::vector<double>> derivs{k1};
  std::vector<double> births{system.births(std::span<const double>(y).first(state_dim))};

  bool extinct = settings.extinction_floor > 0.0 && y[0] < settings.extinction_floor;
  double t = 0.0;
  double h = std::min(settings.initial_step, t_end);
  double err_prev = 1e-4;
  bool rejected_last = false;
  int positivity_retries = 0;
  std::size_t rejected = 0;
  const double h_min = 1e-14 * t_end;

  auto stage = [&](std::span<double> out, std::initializer_list<std::pair<double, const std::vector<double>*>> terms,
                   double hh) {
    for (std::size_t i = 0; i < d; ++i) {
      double acc = 0.0;
      for (const auto& [c, k] : terms) acc += c * (*k)[i];
      out[i] = y[i] + hh * acc;
    }
  };

  std::size_t steps = 0;
  while (!extinct && t < t_end) {
    if (++steps > settings.max_steps) throw NumericalFailure("integrator exceeded max_steps");
    if (h < h_min)
      throw NumericalFailure("step size underflow at t = " + format_double(t) + " (h = " +
                             format_double(h) + ")");
    const bool last = t + h >= t_end;
    const double hh = last ? t_end - t : h;

    stage(tmp, {{a21, &k1}}, hh);
    f(tmp, k2);
    stage(tmp, {{a31, &k1}, {a32, &k2}}, hh);
    f(tmp, k3);
    stage(tmp, {{a41, &k1}, {a42, &k2}, {a43, &k3}}, hh);
    f(tmp, k4);
    stage(tmp, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}, hh);
    f(tmp, k5);
    stage(tmp, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}, hh);
    f(tmp, k6);
    stage(y_new, {{a71, &k1}, {a73, &k3}, {a74, &k4}, {a75, &k5}, {a76, &k6}}, hh);
    f(y_new, k7);

    double err_norm = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double e = hh * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                             e7 * k7[i]);
      const double scale = settings.atol + settings.rtol * std::max(std::abs(y[i]), std::abs(y_new[i]));
      err_norm = std::max(err_norm, std::abs(e) / scale);
    }
    if (!std::isfinite(err_norm)) err_norm = std::numeric_limits<double>::infinity();

    if (err_norm > 1.0) {
      ++rejected;
      rejected_last = true;
      h = hh * std::max(kMinFactor, settings.safety * std::pow(err_norm, -0.2));
      continue;
    }

    const bool negative =
        std::any_of(y_new.begin(), y_new.begin() + static_cast<std::ptrdiff_t>(state_dim),
                    [](double v) { return v < 0.0; });
    if (negative) {
      if (++positivity_retries > settings.max_positivity_retries)
        throw NumericalFailure("negative moment at t = " + format_double(t) + " after " +
                               std::to_string(settings.max_positivity_retries) +
                               " halvings; tolerances too loose");
      ++rejected;
      rejected_last = true;
      h = 0.5 * hh;
      continue;
    }
    positivity_retries = 0;

    t = last ? t_end : t + hh;
    y.swap(y_new);
    k1.swap(k7);
    times.push_back(t);
    nodes.push_back(y);
    derivs.push_back(k1);
    births.push_back(system.births(std::span<const double>(y).first(state_dim)));

    double factor = err_norm == 0.0
                        ? kMaxFactor
                        : settings.safety * std::pow(err_norm, -kAlpha) * std::pow(err_prev, kBeta);
    factor = std::clamp(factor, kMinFactor, kMaxFactor);
    if (rejected_last) factor = std::min(factor, 1.0);
    err_prev = std::max(err_norm, 1e-4);
    rejected_last = false;
    h = hh * factor;

    if (settings.extinction_floor > 0.0 && y[0] < settings.extinction_floor) extinct = true;
  }

  Trajectory traj(std::move(times), std::move(nodes), std::move(derivs), std::move(births), extinct);
  traj.rejected_steps = rejected;
  return traj;
}

Trajectory integrate(const ModelSpec& model, const StateVector& init, double t_end,
                     const IntegratorSettings& settings) {
  const auto g = init.flatten();
  for (double v : g)
    if (!(v > 0.0) || !std::isfinite(v))
      throw DomainError("initial moments must be finite and > 0");
  return integrate_system(MomentSystem(model), init, t_end, settings);
}

MonitorReport run_monitors(const ModelSpec& model, const Trajectory& traj) {
  MonitorReport report;
  const auto& times = traj.times();

  report.positivity.name = "positivity";
  report.positivity.hypothesis_held = true;
  report.positivity.conclusion_held = true;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const auto s = traj.state(k);
    bool ok = s.total > 0.0;
    for (double m : s.moments) ok = ok && m > 0.0;
    if (!ok) {
      report.positivity.conclusion_held = false;
      report.positivity.first_violation_time = times[k];
      break;
    }
  }

  const auto summary = classify(model);

  // P_n < ... < P_0 < P, as a list ordered from smallest to largest.
  auto chain = [](const StateVector& s) {
    std::vector<double> c(s.moments.rbegin(), s.moments.rend());
    c.push_back(s.total);
    return c;
  };

  report.ordering.name = "ordering";
  {
    const auto c0 = chain(traj.state(0));
    bool ordered = true;
    for (std::size_t j = 0; j + 1 < c0.size(); ++j) ordered = ordered && c0[j] < c0[j + 1];
    report.ordering.hypothesis_held = ordered && summary.r0 < 1.0;
  }
  if (report.ordering.hypothesis_held) {
    report.ordering.conclusion_held = true;
    for (std::size_t k = 0; k < traj.size() && *report.ordering.conclusion_held; ++k) {
      const auto c = chain(traj.state(k));
      for (std::size_t j = 0; j + 1 < c.size(); ++j) {
        if (!(c[j] < c[j + 1] + monitor_slack(c[j + 1]))) {
          report.ordering.conclusion_held = false;
          report.ordering.first_violation_time = times[k];
          break;
        }
      }
    }
  }

  std::vector<double> rn(traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k)
    rn[k] = net_reproduction_rate(model, std::max(0.0, traj.total(k)));
  const double p_star = equilibrium(model).state.total;

  report.lower_bound.name = "lower_bound";
  report.lower_bound.hypothesis_held =
      summary.r0 > 1.0 && std::all_of(rn.begin(), rn.end(), [](double r) { return r <= 1.0; });
  if (report.lower_bound.hypothesis_held) {
    report.lower_bound.conclusion_held = true;
    for (std::size_t k = 0; k < traj.size(); ++k) {
      if (!(traj.total(k) >= p_star - monitor_slack(p_star))) {
        report.lower_bound.conclusion_held = false;
        report.lower_bound.first_violation_time = times[k];
        break;
      }
    }
  }

  report.upper_bound.name = "upper_bound";
  report.upper_bound.hypothesis_held =
      std::all_of(rn.begin(), rn.end(), [](double r) { return r >= 1.0; });
  if (report.upper_bound.hypothesis_held) {
    report.upper_bound.conclusion_held = summary.r0 > 1.0;
    if (!*report.upper_bound.conclusion_held) report.upper_bound.first_violation_time = times[0];
    for (std::size_t k = 0; k < traj.size() && *report.upper_bound.conclusion_held; ++k) {
      const double p = traj.total(k);
      if (!(p > 0.0 && p <= p_star + monitor_slack(p_star))) {
        report.upper_bound.conclusion_held = false;
        report.upper_bound.first_violation_time = times[k];
      }
    }
  }
  return report;
}

}  // namespace agestruct
