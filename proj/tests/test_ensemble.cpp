#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <numbers>
#include <stdexcept>
#include <string>

#include "doctest.h"
#include "fixtures.hpp"
#include "quasibohm/ensemble.hpp"
#include "quasibohm/errors.hpp"
#include "quasibohm/parallel.hpp"

using namespace quasibohm;

TEST_CASE("equilibrium quantiles") {
  const SuperpositionState s = fixture::harmonic_three();
  const auto q = equilibrium_quantiles(s, 200);
  REQUIRE(q.size() == 200);
  CHECK(std::is_sorted(q.begin(), q.end()));
  for (std::size_t j = 0; j < q.size(); ++j) CHECK(std::abs(s.cdf(q[j], 0.0) - (j + 0.5) / 200) < 1e-10);
  CHECK_THROWS_AS(equilibrium_quantiles(s, 0), InvalidParameter);
}

TEST_CASE("quantile ensemble stays on the quantiles of the evolving density") {
  const SuperpositionState s = fixture::doublewell_five();
  const std::size_t n = 64;
  const auto x0 = equilibrium_quantiles(s, n);
  const auto grid = uniform_times(40.0, 4.0);
  for (Method m : {Method::Cdf, Method::Ode}) {
    const EnsembleRun run = evolve_ensemble(s, x0, grid, m);
    CHECK(run.method == m);
    CHECK(run.order_inversions == 0);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const auto q = equilibrium_quantiles(s, n, grid[k]);
      for (std::size_t j = 0; j < n; ++j) {
        if (m == Method::Cdf) {
          CHECK(std::abs(run.position(k, j) - q[j]) < 1e-6);
        } else {
          // ODE error in x is divided by a small density in the tails; the
          // transported CDF value is the quantity it controls.
          CHECK(std::abs(s.cdf(run.position(k, j), grid[k]) - (j + 0.5) / n) < 1e-6);
        }
      }
      // Quantiles of H_t sit exactly at Kolmogorov distance 1 / (2N).
      CHECK(run.ks_distance[k] <= 0.5 / n + 1e-6);
    }
  }
}

TEST_CASE("stationary ensemble is frozen") {
  const SuperpositionState s(fixture::double_well_basis(), {Complex(0, 1)});
  const auto x0 = stratified_uniform(s.domain(), 50, 3);
  const auto grid = uniform_times(100.0, 10.0);
  const EnsembleRun run = evolve_ensemble(s, x0, grid, Method::Ode);
  for (std::size_t k = 0; k < grid.size(); ++k)
    for (std::size_t j = 0; j < x0.size(); ++j) CHECK(std::abs(run.position(k, j) - x0[j]) < 1e-12);
  for (double d : run.ks_distance) CHECK(d == doctest::Approx(run.ks_distance.front()).epsilon(1e-12));
}

TEST_CASE("Kolmogorov distance of a single point") {
  const SuperpositionState s = fixture::two_mode_box();
  const std::vector<double> x0{1.2};
  const std::vector<double> grid{0.0, 0.5};
  const EnsembleRun run = evolve_ensemble(s, x0, grid, Method::Cdf);
  const double p = s.cdf(1.2, 0.0);
  CHECK(run.ks_distance[0] == doctest::Approx(std::max(p, 1 - p)).epsilon(1e-12));
  CHECK(run.ks_distance[1] == doctest::Approx(std::max(p, 1 - p)).epsilon(1e-9));
  CHECK(equilibrium_distance(run, s) == run.ks_distance);
}

TEST_CASE("order is preserved and results do not depend on the thread count") {
  const SuperpositionState s = fixture::doublewell_five();
  const auto x0 = stratified_uniform(s.domain(), 300, 11);
  const auto grid = uniform_times(30.0, 1.0);
  for (Method m : {Method::Cdf, Method::Ode}) {
    const EnsembleRun one = evolve_ensemble(s, x0, grid, m, 1);
    const EnsembleRun many = evolve_ensemble(s, x0, grid, m, 7);
    CHECK(one.order_inversions == 0);
    REQUIRE(one.positions.size() == many.positions.size());
    CHECK(std::memcmp(one.positions.data(), many.positions.data(), one.positions.size() * sizeof(double)) == 0);
    CHECK(one.ks_distance == many.ks_distance);
    CHECK(one.steps.accepted == many.steps.accepted);
    CHECK(equilibrium_distance(one, s, 4) == one.ks_distance);
  }
}

TEST_CASE("stratified uniform sampling") {
  const Interval dom{2.0, 12.0};
  const auto a = stratified_uniform(dom, 1000, 42);
  const auto b = stratified_uniform(dom, 1000, 42);
  const auto c = stratified_uniform(dom, 1000, 43);
  CHECK(a == b);
  CHECK(a != c);
  REQUIRE(a.size() == 1000);
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double lo = dom.lo + 0.01 * j;
    CHECK(a[j] >= lo + 0.25 * 0.01);
    CHECK(a[j] <= lo + 0.75 * 0.01);
  }
  CHECK(std::is_sorted(a.begin(), a.end()));
  CHECK_THROWS_AS(stratified_uniform(dom, 0, 1), InvalidParameter);
}

TEST_CASE("a failing member is named by its starting point") {
  const SuperpositionState s(fixture::two_mode_box().basis(), {Complex(1), Complex(-1)});
  const std::vector<double> x0{0.5, std::numbers::pi / 3, 2.0};
  const std::vector<double> grid{0.0, 1.0};
  for (unsigned threads : {1u, 3u}) {
    try {
      (void)evolve_ensemble(s, x0, grid, Method::Ode, threads);
      FAIL("expected a singularity");
    } catch (const TrajectorySingularity& e) {
      const std::string what = e.what();
      CHECK(what.find("ensemble member 1") != std::string::npos);
      CHECK(what.find("1.047") != std::string::npos);
    }
  }
}

TEST_CASE("parallel_for covers every index and rethrows the lowest failure") {
  std::vector<int> hit(1000, 0);
  parallel_for(hit.size(), 8, [&](std::size_t i) { hit[i] += 1; });
  CHECK(std::all_of(hit.begin(), hit.end(), [](int h) { return h == 1; }));

  std::atomic<int> calls{0};
  parallel_for(0, 4, [&](std::size_t) { ++calls; });
  CHECK(calls == 0);

  for (unsigned threads : {1u, 2u, 5u}) {
    try {
      parallel_for(100, threads, [](std::size_t i) {
        if (i == 37 || i == 90) throw std::runtime_error(std::to_string(i));
      });
      FAIL("expected a throw");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()) == "37");
    }
  }
}
