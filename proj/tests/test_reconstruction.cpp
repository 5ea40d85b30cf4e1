#include <algorithm>
#include <cmath>
#include <vector>

#include "agestruct/errors.hpp"
#include "agestruct/moment_system.hpp"
#include "agestruct/reconstruction.hpp"
#include "doctest.h"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace agestruct;

namespace {

struct Run {
  ModelSpec model;
  InitialDensity p0;
  Trajectory traj;
};

Run baseline_run(double t_end = 10.0) {
  auto m = fixtures::baseline_model();
  auto p0 = fixtures::unit_exponential();
  auto traj = integrate(m, moments_from_density(p0, m).state, t_end);
  return {std::move(m), std::move(p0), std::move(traj)};
}

double max_of(const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()); }

}  // namespace

TEST_CASE("reconstruction at time zero is the initial density") {
  const auto run = baseline_run();
  const auto ages = uniform_age_grid();
  const auto g = reconstruct_density(run.model, run.traj, run.p0, ages, 0.0);
  for (std::size_t k = 0; k < ages.size(); ++k) CHECK(g.density[k] == run.p0(ages[k]));
  CHECK_FALSE(g.seam.has_value());
  CHECK(max_of(moment_consistency(run.model, g, run.traj)) < 1e-6);
  // the default grid limits Simpson accuracy; a finer grid reaches the quadrature scale
  const auto fine = uniform_age_grid(50.0, 20001);
  const auto gf = reconstruct_density(run.model, run.traj, run.p0, fine, 0.0);
  CHECK(max_of(moment_consistency(run.model, gf, run.traj)) < 1e-8);
}

TEST_CASE("newborn density is the birth rate") {
  const auto run = baseline_run();
  const std::vector<double> ages{0.0, 0.5, 2.0};
  for (double t : {1.0, 3.0}) {
    const auto g = reconstruct_density(run.model, run.traj, run.p0, ages, t);
    CHECK(g.density[0] == doctest::Approx(birth_rate(run.model, run.traj.state_at(t))).epsilon(1e-12));
  }
}

TEST_CASE("characteristic formulas against direct evaluation") {
  const auto run = baseline_run();
  const double t = 2.0;
  const std::vector<double> ages{0.3, 1.7, 2.5, 7.0};
  const auto g = reconstruct_density(run.model, run.traj, run.p0, ages, t);
  const double Mt = run.traj.cumulative_mortality_at(t);
  for (std::size_t k = 0; k < ages.size(); ++k) {
    const double a = ages[k];
    double want;
    if (a <= t) {
      const double s = t - a;
      want = birth_rate(run.model, run.traj.state_at(s)) * std::exp(-(Mt - run.traj.cumulative_mortality_at(s)));
    } else {
      want = std::exp(-(a - t)) * std::exp(-Mt);
    }
    CHECK(g.density[k] == doctest::Approx(want).epsilon(1e-12));
    CHECK(g.profile[k] == doctest::Approx(g.density[k] / run.traj.total_at(t)).epsilon(1e-14));
  }
}

TEST_CASE("seam jump reflects incompatible initial data") {
  const auto run = baseline_run();
  const double t = 1.0;
  const auto g = reconstruct_density(run.model, run.traj, run.p0, uniform_age_grid(), t);
  REQUIRE(g.seam.has_value());
  CHECK(g.seam->age == t);
  const double b0 = birth_rate(run.model, run.traj.state(0));
  const double want = std::exp(-run.traj.cumulative_mortality_at(t)) * std::abs(run.p0(0.0) - b0);
  CHECK(g.seam->jump() == doctest::Approx(want).epsilon(1e-8));
  CHECK(g.seam->initial_side == doctest::Approx(std::exp(-run.traj.cumulative_mortality_at(t))).epsilon(1e-12));
}

TEST_CASE("seam is continuous for compatible initial data") {
  // p0 = c e^{-a} with c = B(0) on the doubled model: c = (5/3) c e^{-c}
  const auto m = fixtures::baseline_model(2.0);
  const auto p0 = InitialDensity::exp_decay(std::log(5.0 / 3.0), 1.0);
  const auto traj = integrate(m, moments_from_density(p0, m).state, 5.0);
  for (double t : {0.5, 1.0, 3.0}) {
    const auto g = reconstruct_density(m, traj, p0, uniform_age_grid(), t);
    REQUIRE(g.seam.has_value());
    CHECK(g.seam->jump() <= 1e-6 * g.seam->initial_side);
  }
}

TEST_CASE("moment consistency on the baseline run") {
  const auto run = baseline_run();
  for (double t : {1.0, 2.0, 5.0}) {
    const auto coarse = reconstruct_density(run.model, run.traj, run.p0, uniform_age_grid(50.0, 1001), t);
    const auto dflt = reconstruct_density(run.model, run.traj, run.p0, uniform_age_grid(), t);
    const double e_coarse = max_of(moment_consistency(run.model, coarse, run.traj));
    const double e_default = max_of(moment_consistency(run.model, dflt, run.traj));
    CHECK(e_default < 5e-3);
    CHECK(e_default < e_coarse);
  }
}

TEST_CASE("under-truncated age grid exceeds the consistency budget") {
  const auto run = baseline_run();
  const auto g = reconstruct_density(run.model, run.traj, run.p0, uniform_age_grid(5.0, 2001), 2.0);
  CHECK(max_of(moment_consistency(run.model, g, run.traj)) > 5e-3);
}

TEST_CASE("profile is a probability density") {
  const auto run = baseline_run();
  const auto ages = uniform_age_grid();
  for (double t : {0.0, 1.0, 2.0, 5.0}) {
    const auto g = reconstruct_density(run.model, run.traj, run.p0, ages, t);
    for (double v : g.density) CHECK(v >= 0.0);
    const double mass = integrate_samples(g.ages, g.profile);
    CHECK(mass > 1 - 1e-2);
    CHECK(mass < 1 + 1e-2);
  }
}

TEST_CASE("reconstruction errors") {
  const auto run = baseline_run(5.0);
  const auto ages = uniform_age_grid();
  CHECK_THROWS_AS(reconstruct_density(run.model, run.traj, run.p0, ages, 6.0), RangeError);
  CHECK_THROWS_AS(reconstruct_density(run.model, run.traj, run.p0, ages, -1.0), RangeError);

  const auto m = fixtures::baseline_model();
  const auto extinct = integrate(m, fixtures::baseline_initial_moments(m), 200.0);
  REQUIRE(extinct.extinct());
  CHECK_THROWS_AS(reconstruct_density(m, extinct, run.p0, ages, extinct.end_time()), DegenerateProfileError);
}

TEST_CASE("multi-exponential reconstruction is consistent") {
  const ModelSpec m(MultiExponentialKernel{{2.0, 3.0}},
                    {RateFunction::exp_decay(2.0, 1.0), RateFunction::exp_decay(9.0, 1.0)},
                    RateFunction::power_growth(1, 1, 2));
  const auto p0 = fixtures::unit_exponential();
  const auto traj = integrate(m, moments_from_density(p0, m).state, 5.0);
  for (double t : {1.0, 4.0}) {
    const auto g = reconstruct_density(m, traj, p0, uniform_age_grid(), t);
    CHECK(max_of(moment_consistency(m, g, traj)) < 5e-3);
  }
}

TEST_CASE("sample integration rules") {
  std::vector<double> x, y;
  for (int k = 0; k <= 10; ++k) {
    x.push_back(0.1 * k);
    y.push_back(std::pow(x.back(), 3));
  }
  CHECK(integrate_samples(x, y) == doctest::Approx(0.25).epsilon(1e-14));
  x.pop_back();
  y.pop_back();  // 9 panels: Simpson plus a closing 3/8 panel, still exact for cubics
  CHECK(integrate_samples(x, y) == doctest::Approx(std::pow(0.9, 4) / 4).epsilon(1e-14));
  CHECK(integrate_samples(std::vector<double>{0, 2}, std::vector<double>{1, 3}) == 4.0);
  CHECK(integrate_samples(std::vector<double>{0, 1, 3}, std::vector<double>{0, 1, 3}) == doctest::Approx(4.5));
}
