#include <cmath>
#include <numbers>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "quasibohm/errors.hpp"
#include "quasibohm/ode.hpp"
#include "quasibohm/trajectory.hpp"

using namespace quasibohm;

TEST_CASE("uniform_times") {
  const auto t = uniform_times(1.0, 0.25);
  REQUIRE(t.size() == 5);
  CHECK(t.front() == 0.0);
  CHECK(t.back() == 1.0);
  const auto u = uniform_times(1.0, 0.3);
  CHECK(u.size() == 5);
  CHECK(u.back() == 1.0);
  CHECK(uniform_times(100.0, 0.1).size() == 1001);
  CHECK_THROWS_AS(uniform_times(0.0, 0.1), InvalidParameter);
  CHECK_THROWS_AS(uniform_times(1.0, 0.0), InvalidParameter);
}

TEST_CASE("dense-output integrator on problems with known solutions") {
  // y' = -y and the rotation x' = -y, y' = x sampled off the step grid.
  const auto times = uniform_times(10.0, 0.137);
  double worst = 0.0;
  integrate_dopri5<1>([](double, const std::array<double, 1>& y) { return std::array<double, 1>{-y[0]}; },
                      std::array<double, 1>{1.0}, times,
                      [&](std::size_t k, const std::array<double, 1>& y) {
                        worst = std::max(worst, std::abs(y[0] - std::exp(-times[k])));
                      },
                      OdeOptions{});
  CHECK(worst < 1e-9);
  worst = 0.0;
  const StepStatistics st = integrate_dopri5<2>(
      [](double, const std::array<double, 2>& y) { return std::array<double, 2>{-y[1], y[0]}; },
      std::array<double, 2>{1.0, 0.0}, times,
      [&](std::size_t k, const std::array<double, 2>& y) {
        worst = std::max({worst, std::abs(y[0] - std::cos(times[k])), std::abs(y[1] - std::sin(times[k]))});
      },
      OdeOptions{});
  CHECK(worst < 1e-8);
  CHECK(st.accepted > 0);
  CHECK(st.rhs_evaluations >= 6 * st.accepted);
}

TEST_CASE("integrator halves steps through a singular region and reports persistent singularities") {
  // A right-hand side that refuses to be evaluated beyond y = 1 forces retries;
  // the solution y = t reaches the wall at t = 1 and cannot continue.
  const std::vector<double> times{0.0, 0.5, 2.0};
  OdeOptions opt;
  auto rhs = [](double t, const std::array<double, 1>& y) {
    if (y[0] > 1.0) throw NodeProximity(y[0], t, 0.0);
    return std::array<double, 1>{1.0};
  };
  CHECK_THROWS_AS(integrate_dopri5<1>(rhs, std::array<double, 1>{0.0}, times,
                                      [](std::size_t, const std::array<double, 1>&) {}, opt),
                  TrajectorySingularity);
}

TEST_CASE("stationary state trajectories do not move") {
  const SuperpositionState s(fixture::double_well_basis(), {Complex(1)});
  const auto grid = uniform_times(100.0, 0.5);
  for (double x0 : {1.0, 2.5, 7.0}) {
    const Trajectory o = evolve_ode(s, x0, grid);
    const Trajectory c = evolve_cdf(s, x0, grid);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      CHECK(std::abs(o.positions[k] - x0) < 1e-12);
      CHECK(std::abs(c.positions[k] - x0) < 1e-12);
    }
    CHECK(o.method == Method::Ode);
    CHECK(c.method == Method::Cdf);
  }
}

TEST_CASE("two-mode box at t = 1 agrees with an independent CDF oracle") {
  const SuperpositionState s = fixture::two_mode_box();
  StateOptions fine;
  fine.cdf_panels = std::size_t{1} << 16;
  const SuperpositionState f(s.basis(), {s.coefficients().begin(), s.coefficients().end()}, fine);
  const std::vector<double> grid{0.0, 1.0};
  const Trajectory o = evolve_ode(s, 1.0, grid);
  const double p0 = f.cdf(1.0, 0.0);
  const double expected = f.cdf_inverse(p0, 1.0);
  CHECK(std::abs(o.positions[1] - expected) < 1e-8);
  // Same answer from bisection on adaptive quadrature.
  const double quad = oracle::cdf_inverse(s, oracle::cdf(s, 1.0, 0.0, 1e-14), 1.0);
  CHECK(std::abs(o.positions[1] - quad) < 1e-8);
}

TEST_CASE("time reversal about a real instant") {
  // With real coefficients psi(x, -t) = conj psi(x, t), so x(-t) = x(t).
  const SuperpositionState s(fixture::double_well_basis(), {Complex(0.8), Complex(0.5), Complex(-0.3)});
  const double x0 = 3.1;
  const double p0 = s.cdf(x0, 0.0);
  for (double t : {0.7, 5.0, 23.0}) {
    const Trajectory fwd = evolve_ode(s, x0, std::vector<double>{0.0, t});
    const double back_start = s.cdf_inverse(p0, -t);
    CHECK(std::abs(fwd.positions[1] - back_start) < 1e-7);
    // Integrating from -t forward to 0 lands on x0.
    const Trajectory from_past = evolve_ode(s, back_start, std::vector<double>{-t, 0.0});
    CHECK(std::abs(from_past.positions[1] - x0) < 1e-7);
  }
}

TEST_CASE("median of a parity-symmetric density stays at the midpoint") {
  // phi_1 and phi_3 are both even about the centre of the box. Unequal
  // weights keep psi away from zero at the midpoint.
  const SuperpositionState s(build_infinite_well(2.0, 3), {Complex(1), Complex(0), Complex(0.0, 0.5)});
  const auto grid = uniform_times(20.0, 0.5);
  const Trajectory c = evolve_cdf(s, 1.0, grid);
  for (double x : c.positions) CHECK(std::abs(x - 1.0) < 1e-12);
  // Local stretching amplifies step errors near the midpoint, so tighten the integrator.
  OdeTolerances tight;
  tight.rel_tol = 1e-12;
  tight.abs_tol = 1e-14;
  const Trajectory o = evolve_ode(s, 1.0, grid, tight);
  for (double x : o.positions) CHECK(std::abs(x - 1.0) < 1e-10);
}

TEST_CASE("ODE and CDF transport agree on the two-mode box") {
  const SuperpositionState s = fixture::two_mode_box();
  const auto grid = uniform_times(100.0, 0.1);
  const Trajectory o = evolve_ode(s, 1.0, grid);
  const Trajectory c = evolve_cdf(s, 1.0, grid);
  double sup = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) sup = std::max(sup, std::abs(o.positions[k] - c.positions[k]));
  CHECK(sup < 1e-6);
  CHECK(o.diagnostics.max_cdf_drift < 1e-6);
  CHECK(c.diagnostics.max_cdf_drift < 1e-12);
  CHECK(o.diagnostics.min_density > 0.0);
  CHECK(o.diagnostics.steps.accepted > 0);
  for (double x : o.positions) CHECK(s.domain().contains(x));
}

TEST_CASE("quasiperiodic map") {
  const SuperpositionState s = fixture::doublewell_five();
  const double x0 = 2.5;
  const double p0 = s.cdf(x0, 0.0);
  CHECK(std::abs(quasiperiodic_F(s, p0, PhaseVector(std::vector<double>(4, 0.0))) - x0) < 1e-12);

  // 2 pi periodicity in each angle.
  const std::vector<double> y{0.3, 1.7, 4.0, 5.9};
  const double base = quasiperiodic_F(s, p0, PhaseVector(y));
  for (std::size_t j = 0; j < 4; ++j) {
    std::vector<double> shifted = y;
    shifted[j] += 2 * std::numbers::pi;
    CHECK(std::abs(quasiperiodic_F(s, p0, PhaseVector(shifted)) - base) < 1e-13);
  }

  // Along the orbit the map reproduces CDF transport.
  auto g = oracle::rng(21);
  std::vector<double> times;
  for (int k = 0; k < 50; ++k) times.push_back(oracle::uniform(g, 0.0, 1000.0));
  std::sort(times.begin(), times.end());
  times.insert(times.begin(), 0.0);
  const Trajectory c = evolve_cdf(s, x0, times);
  for (std::size_t k = 0; k < times.size(); ++k) {
    CHECK(std::abs(c.positions[k] - quasiperiodic_F(s, p0, s.phases_at(times[k]))) < 1e-10);
  }

  // Monotone in p0 at a fixed phase point.
  double prev = s.domain().lo;
  for (double p = 0.01; p < 1.0; p += 0.01) {
    const double x = quasiperiodic_F(s, p, PhaseVector(y));
    CHECK(x >= prev);
    prev = x;
  }
  CHECK_THROWS_AS((void)quasiperiodic_F(s, 1.5, PhaseVector(y)), InvalidParameter);
}

TEST_CASE("two-mode map at half a period matches the ODE") {
  const SuperpositionState s = fixture::two_mode_box();
  const double t = std::numbers::pi / 1.5;
  const Trajectory o = evolve_ode(s, 1.0, std::vector<double>{0.0, t});
  CHECK(std::abs(quasiperiodic_F(s, s.cdf(1.0, 0.0), PhaseVector({std::numbers::pi})) - o.positions[1]) < 1e-6);
}

TEST_CASE("invalid grids and starting points") {
  const SuperpositionState s = fixture::two_mode_box();
  CHECK_THROWS_AS(evolve_ode(s, 1.0, std::vector<double>{}), InvalidParameter);
  CHECK_THROWS_AS(evolve_cdf(s, 1.0, std::vector<double>{0.0, 1.0, 1.0}), InvalidParameter);
  CHECK_THROWS_AS(evolve_ode(s, 1.0, std::vector<double>{0.0, -1.0}), InvalidParameter);
  CHECK_THROWS_AS(evolve_ode(s, 4.0, std::vector<double>{0.0, 1.0}), DomainError);
  // Starting on the wall, where psi vanishes.
  CHECK_THROWS_AS(evolve_ode(s, 0.0, std::vector<double>{0.0, 1.0}), NodeProximity);
  CHECK_THROWS_AS(evolve_cdf(s, 0.0, std::vector<double>{0.0, 1.0}), NodeProximity);
  const SuperpositionState noded(s.basis(), {Complex(1), Complex(-1)});
  CHECK_THROWS_AS(evolve_ode(noded, std::numbers::pi / 3, std::vector<double>{0.0, 1.0}), NodeProximity);
}
