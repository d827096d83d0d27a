#include <cmath>
#include <numbers>

#include "doctest.h"
#include "fixtures.hpp"
#include "quasibohm/errors.hpp"
#include "quasibohm/lyapunov.hpp"

using namespace quasibohm;

namespace {

double max_gap(const std::vector<double>& a, const std::vector<double>& b) {
  REQUIRE(a.size() == b.size());
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

}  // namespace

TEST_CASE("stationary state has zero exponent for every estimator") {
  const SuperpositionState s(fixture::double_well_basis(), {Complex(1)});
  const auto grid = uniform_times(100.0, 1.0);
  const Trajectory tr = evolve_ode(s, 3.0, grid);
  const auto r = lyapunov_ratio(s, tr);
  const auto v = lyapunov_variational(s, 3.0, grid);
  const auto w = lyapunov_two_trajectory(s, 3.0, grid);
  for (const auto* e : {&r, &v, &w}) {
    REQUIRE(e->lambda_hat.size() == grid.size() - 1);
    for (double l : e->lambda_hat) CHECK(std::abs(l) < 1e-12);
  }
  CHECK(w.method == LyapunovMethod::TwoTrajectory);
  CHECK(w.separation_collapses == 0);
}

TEST_CASE("density ratio and variational equation agree") {
  for (const auto& s : {fixture::two_mode_box(), fixture::harmonic_three(), fixture::doublewell_five()}) {
    const double x0 = 0.5 * (s.domain().lo + s.domain().hi) + 0.13;
    const auto grid = uniform_times(100.0, 0.5);
    const auto r = lyapunov_ratio(s, evolve_ode(s, x0, grid));
    const auto v = lyapunov_variational(s, x0, grid);
    CHECK(max_gap(r.log_stretch, v.log_stretch) < 1e-5);
    CHECK(r.horizons == v.horizons);
  }
}

TEST_CASE("estimate bookkeeping") {
  const SuperpositionState s = fixture::doublewell_five();
  const auto grid = uniform_times(50.0, 0.5);
  const auto r = lyapunov_ratio(s, evolve_cdf(s, 2.0, grid));
  for (std::size_t k = 0; k < r.horizons.size(); ++k) {
    CHECK(r.horizons[k] == grid[k + 1]);
    CHECK(r.lambda_hat[k] == doctest::Approx(r.log_stretch[k] / r.horizons[k]).epsilon(1e-15));
  }
  double sup = 0.0;
  for (double v : r.log_stretch) sup = std::max(sup, std::abs(v));
  CHECK(r.sup_log_stretch() == sup);
}

TEST_CASE("log stretch is bounded by the density range") {
  const SuperpositionState s = fixture::harmonic_three();
  const auto grid = uniform_times(100.0, 0.25);
  const Trajectory tr = evolve_cdf(s, 0.2, grid);
  const auto r = lyapunov_ratio(s, tr);
  double lo = INFINITY, hi = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double rho = s.density(tr.positions[k], grid[k]);
    lo = std::min(lo, rho);
    hi = std::max(hi, rho);
  }
  CHECK(r.sup_log_stretch() <= std::log(hi / lo) + 1e-12);
}

TEST_CASE("two-mode box stretch is periodic") {
  const SuperpositionState s = fixture::two_mode_box();
  const double period = 2 * std::numbers::pi / 1.5;
  std::vector<double> grid;
  for (int k = 0; k <= 192; ++k) grid.push_back(k * period / 64);
  const auto v = lyapunov_variational(s, 1.0, grid);
  // Entry k corresponds to grid[k + 1]; ln delta(0) = 0 pairs with the end of each period.
  for (std::size_t k = 0; k + 64 < v.log_stretch.size(); ++k)
    CHECK(std::abs(v.log_stretch[k + 64] - v.log_stretch[k]) < 1e-5);
  CHECK(std::abs(v.log_stretch[63]) < 1e-5);
  CHECK(std::abs(v.log_stretch[127]) < 1e-5);
}

TEST_CASE("finite-separation estimator tracks the variational one") {
  const SuperpositionState s = fixture::doublewell_five();
  const auto grid = uniform_times(100.0, 1.0);
  const auto v = lyapunov_variational(s, 2.5, grid);
  const auto w = lyapunov_two_trajectory(s, 2.5, grid);
  CHECK(std::abs(w.lambda_hat.back() - v.lambda_hat.back()) < 1e-3);

  TwoTrajectoryOptions half;
  half.d0 = 0.5e-8;
  const auto w2 = lyapunov_two_trajectory(s, 2.5, grid, half);
  CHECK(std::abs(w2.lambda_hat.back() - w.lambda_hat.back()) < 1e-4);

  TwoTrajectoryOptions sparse;
  sparse.renorm_every = 5.0;
  const auto w5 = lyapunov_two_trajectory(s, 2.5, grid, sparse);
  CHECK(std::abs(w5.lambda_hat.back() - v.lambda_hat.back()) < 1e-3);
}

TEST_CASE("inverse-horizon fit recovers a synthetic law") {
  LyapunovEstimate e;
  for (int k = 1; k <= 1000; ++k) {
    e.horizons.push_back(k);
    e.lambda_hat.push_back(0.002 + 3.0 / k);
    e.log_stretch.push_back(e.lambda_hat.back() * k);
  }
  const auto fit = fit_inverse_horizon(e, 100.0, 1000.0);
  CHECK(fit.intercept == doctest::Approx(0.002).epsilon(1e-10));
  CHECK(fit.slope == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(fit.samples == 901);
  CHECK_THROWS_AS(fit_inverse_horizon(e, 2000.0, 3000.0), InvalidParameter);
}

TEST_CASE("argument validation") {
  const SuperpositionState s = fixture::two_mode_box();
  const std::vector<double> one{0.0};
  CHECK_THROWS_AS(lyapunov_variational(s, 1.0, one), InvalidParameter);
  CHECK_THROWS_AS(lyapunov_two_trajectory(s, 1.0, one), InvalidParameter);
  TwoTrajectoryOptions bad;
  bad.d0 = 0.0;
  CHECK_THROWS_AS(lyapunov_two_trajectory(s, 1.0, uniform_times(1.0, 0.5), bad), InvalidParameter);
  CHECK_THROWS_AS(lyapunov_variational(s, 0.0, uniform_times(1.0, 0.5)), NodeProximity);
  CHECK(to_string(LyapunovMethod::Variational) == "variational");
}

TEST_CASE("stretch is a function on the phase torus along the orbit") {
  // log_stretch(t) = ln rho(x0, 0) - ln |psi(F(p0, y), y)|^2 with y = omega t.
  const SuperpositionState s = fixture::doublewell_five();
  const double x0 = 2.5;
  const double p0 = s.cdf(x0, 0.0);
  const auto grid = uniform_times(1000.0, 7.0);
  const auto r = lyapunov_ratio(s, evolve_cdf(s, x0, grid));
  const double ln_rho0 = std::log(s.density(x0, 0.0));
  for (std::size_t k = 0; k < r.horizons.size(); ++k) {
    const PhaseVector y = s.phases_at(r.horizons[k]);
    const double rho = std::norm(s.psi_phases(quasiperiodic_F(s, p0, y), y));
    CHECK(std::abs(r.log_stretch[k] - (ln_rho0 - std::log(rho))) < 1e-10);
  }
}
