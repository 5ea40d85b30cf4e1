#include "agestruct/reconstruction.hpp"

#include <algorithm>
#include <cmath>

#include "agestruct/errors.hpp"
#include "agestruct/format.hpp"
#include "agestruct/moment_system.hpp"

namespace agestruct {

namespace {

constexpr double kExtinctionFloor = 1e-12;

bool is_uniform(std::span<const double> x) {
  if (x.size() < 3) return true;
  const double h = x[1] - x[0];
  for (std::size_t k = 2; k < x.size(); ++k)
    if (std::abs((x[k] - x[k - 1]) - h) > 1e-9 * std::abs(h)) return false;
  return true;
}

double trapezoid(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t k = 0; k + 1 < x.size(); ++k) s += 0.5 * (x[k + 1] - x[k]) * (y[k] + y[k + 1]);
  return s;
}

}  // namespace

std::vector<double> uniform_age_grid(double a_max, std::size_t points) {
  if (points < 2 || !(a_max > 0.0)) throw DomainError("age grid needs >= 2 points and a_max > 0");
  std::vector<double> ages(points);
  for (std::size_t k = 0; k < points; ++k)
    ages[k] = a_max * static_cast<double>(k) / static_cast<double>(points - 1);
  return ages;
}

double integrate_samples(std::span<const double> x, std::span<const double> y) {
  const std::size_t m = x.size() < 2 ? 0 : x.size() - 1;  // interval count
  if (m == 0) return 0.0;
  if (m == 1 || !is_uniform(x)) return trapezoid(x, y);
  const double h = (x.back() - x.front()) / static_cast<double>(m);
  const std::size_t simpson_intervals = (m % 2 == 0) ? m : m - 3;
  double s = 0.0;
  for (std::size_t k = 0; k + 1 < simpson_intervals; k += 2)
    s += h / 3.0 * (y[k] + 4.0 * y[k + 1] + y[k + 2]);
  if (m % 2 == 1) {
    const std::size_t k = simpson_intervals;
    s += 3.0 * h / 8.0 * (y[k] + 3.0 * y[k + 1] + 3.0 * y[k + 2] + y[k + 3]);
  }
  return s;
}

AgeDensityGrid reconstruct_density(const ModelSpec& model, const Trajectory& traj,
                                   const InitialDensity& p0, std::span<const double> ages,
                                   double t) {
  if (ages.empty()) throw DomainError("age grid is empty");
  for (std::size_t k = 0; k < ages.size(); ++k)
    if (!(ages[k] >= 0.0) || (k > 0 && !(ages[k] > ages[k - 1])))
      throw DomainError("ages must be >= 0 and strictly increasing");

  const double total = traj.total_at(t);  // range-checks t
  if (total < kExtinctionFloor)
    throw DegenerateProfileError("P(" + format_double(t) + ") = " + format_double(total) +
                                 " is below the extinction floor; profile undefined");

  AgeDensityGrid grid{t, std::vector<double>(ages.begin(), ages.end()), {}, {}, total, std::nullopt};
  grid.density.resize(ages.size());
  grid.profile.resize(ages.size());

  const double m_t = traj.cumulative_mortality_at(t);
  auto birth_branch = [&](double a) {
    const double origin = t - a;
    const double b = birth_rate(model, traj.state_at(origin));
    return b * std::exp(-(m_t - traj.cumulative_mortality_at(origin)));
  };
  auto initial_branch = [&](double a) { return p0(a - t) * std::exp(-m_t); };

  for (std::size_t k = 0; k < ages.size(); ++k) {
    const double a = ages[k];
    if (t == 0.0) grid.density[k] = p0(a);
    else grid.density[k] = a <= t ? birth_branch(a) : initial_branch(a);
    grid.profile[k] = grid.density[k] / total;
  }
  if (t > 0.0 && t < ages.back()) grid.seam = Seam{t, birth_branch(t), initial_branch(t)};
  return grid;
}

std::vector<double> moment_consistency(const ModelSpec& model, const AgeDensityGrid& grid,
                                       const Trajectory& traj) {
  const auto& ages = grid.ages;
  const std::size_t n = model.order();
  const auto target = traj.state_at(grid.t).flatten();

  // weight(c, a): 1 for P, moment weight for P_i
  auto weight = [&](std::size_t c, double a) {
    return c == 0 ? 1.0 : model.moment_weight(c - 1, a);
  };

  auto quadrature = [&](std::size_t c) {
    std::vector<double> y(ages.size());
    for (std::size_t k = 0; k < ages.size(); ++k) y[k] = weight(c, ages[k]) * grid.density[k];
    if (!grid.seam) return integrate_samples(ages, y);

    // integrate each smooth side of the seam separately
    const Seam& s = *grid.seam;
    const auto it = std::upper_bound(ages.begin(), ages.end(), s.age);
    const std::size_t k = static_cast<std::size_t>(it - ages.begin()) - 1;  // ages[k] <= s.age
    const double spacing = ages.size() > 1 ? ages[1] - ages[0] : 1.0;
    const std::span<const double> x(ages);
    const std::span<const double> v(y);
    if (std::abs(ages[k] - s.age) <= 1e-9 * spacing) {
      std::vector<double> right(v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
      right.front() = weight(c, s.age) * s.initial_side;
      return integrate_samples(x.first(k + 1), v.first(k + 1)) +
             integrate_samples(x.subspan(k), right);
    }
    const double ws = weight(c, s.age);
    const double left_cell = 0.5 * (s.age - ages[k]) * (y[k] + ws * s.birth_side);
    const double right_cell = 0.5 * (ages[k + 1] - s.age) * (ws * s.initial_side + y[k + 1]);
    return integrate_samples(x.first(k + 1), v.first(k + 1)) + left_cell + right_cell +
           integrate_samples(x.subspan(k + 1), v.subspan(k + 1));
  };

  std::vector<double> errors(n + 2);
  for (std::size_t c = 0; c < n + 2; ++c) {
    const double q = quadrature(c);
    const double ref = target[c];
    errors[c] = ref != 0.0 ? std::abs(q - ref) / std::abs(ref) : std::abs(q);
  }
  return errors;
}

}  // namespace agestruct
