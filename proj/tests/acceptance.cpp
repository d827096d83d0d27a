// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "quasibohm/ensemble.hpp"
#include "quasibohm/lyapunov.hpp"
#include "quasibohm/spectrum.hpp"
#include "quasibohm/trajectory.hpp"
#include "quasibohm_app/app.hpp"

using namespace quasibohm;

namespace {

const std::vector<std::string> kPresets{"two-mode-box", "harmonic-three", "doublewell-five"};

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[fail] ";
    }
    detail << what << "; ";
  }
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

app::RunConfig config_for(const std::string& name) {
  app::RunConfig c;
  c.scenario = app::preset(name);
  return c;
}

SuperpositionState state_for(const std::string& name) { return app::build_state(config_for(name)); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double sup_gap(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

void stationary(Verdict& v) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto grid = uniform_times(100.0, 0.1);
  for (const std::string& name : {std::string("two-mode-box"), std::string("doublewell-five")}) {
    app::RunConfig c = config_for(name);
    c.scenario.coefficients = {{1.0, 0.0}};
    const SuperpositionState s = app::build_state(c);
    const double x0 = c.scenario.x0;
    const Trajectory o = evolve_ode(s, x0, grid);
    const Trajectory q = evolve_cdf(s, x0, grid);
    double dx = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k)
      dx = std::max({dx, std::abs(o.positions[k] - x0), std::abs(q.positions[k] - x0)});
    double lam = 0.0;
    for (const LyapunovEstimate& e :
         {lyapunov_ratio(s, o), lyapunov_variational(s, x0, grid), lyapunov_two_trajectory(s, x0, grid)}) {
      for (double l : e.lambda_hat) lam = std::max(lam, std::abs(l));
    }
    v.require(dx < 1e-9, name + " ground state max|x - x0| = " + num(dx));
    v.require(lam < 1e-12, "max|lambda_hat| = " + num(lam));
  }
  const double secs = seconds_since(t0);
  v.require(secs < 1.0, "runtime " + num(secs) + " s");
}

void equivariance(Verdict& v) {
  const auto grid = uniform_times(100.0, 0.1);
  for (const std::string& name : kPresets) {
    const app::RunConfig c = config_for(name);
    const SuperpositionState s = app::build_state(c);
    const Trajectory o = evolve_ode(s, c.scenario.x0, grid);
    const double p0 = s.cdf(c.scenario.x0, 0.0);
    double drift = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) drift = std::max(drift, std::abs(s.cdf(o.positions[k], grid[k]) - p0));
    v.require(drift < 1e-6, name + " drift " + num(drift));
  }
}

void cross_method(Verdict& v) {
  const auto grid = uniform_times(100.0, 0.1);
  for (const std::string& name : kPresets) {
    const app::RunConfig c = config_for(name);
    const SuperpositionState s = app::build_state(c);
    const double gap = sup_gap(evolve_ode(s, c.scenario.x0, grid).positions,
                               evolve_cdf(s, c.scenario.x0, grid).positions);
    v.require(gap < 1e-6, name + " sup|x_ode - x_cdf| = " + num(gap));
  }
}

void periodicity(Verdict& v) {
  const app::RunConfig c = config_for("two-mode-box");
  const SuperpositionState s = app::build_state(c);
  const double period = 4 * std::numbers::pi / 3;
  std::vector<double> grid;
  for (int k = 0; k * period / 64 <= 100.0 + period + 1e-9; ++k) grid.push_back(k * period / 64);
  for (Method m : {Method::Ode, Method::Cdf}) {
    const Trajectory tr = m == Method::Ode ? evolve_ode(s, c.scenario.x0, grid) : evolve_cdf(s, c.scenario.x0, grid);
    double worst = 0.0;
    for (std::size_t k = 0; k + 64 < grid.size() && grid[k] <= 100.0; ++k)
      worst = std::max(worst, std::abs(tr.positions[k + 64] - tr.positions[k]));
    v.require(worst < 1e-6, std::string(to_string(m)) + " max|x(t+T) - x(t)| = " + num(worst));
  }
}

void quasiperiodic_map(Verdict& v) {
  const app::RunConfig c = config_for("doublewell-five");
  const SuperpositionState s = app::build_state(c);
  auto g = oracle::rng(2024);
  std::vector<double> times;
  for (int k = 0; k < 100; ++k) times.push_back(oracle::uniform(g, 0.0, 1000.0));
  std::sort(times.begin(), times.end());
  times.insert(times.begin(), 0.0);
  const Trajectory tr = evolve_cdf(s, c.scenario.x0, times);
  const double p0 = s.cdf(c.scenario.x0, 0.0);
  double worst = 0.0;
  for (std::size_t k = 1; k < times.size(); ++k)
    worst = std::max(worst, std::abs(tr.positions[k] - quasiperiodic_F(s, p0, s.phases_at(times[k]))));
  v.require(worst < 1e-10, "max|x_cdf - F| over 100 times = " + num(worst));
}

void zero_exponent(Verdict& v) {
  const auto t0 = std::chrono::steady_clock::now();
  const app::RunConfig c = config_for("doublewell-five");
  const SuperpositionState s = app::build_state(c);
  const auto grid = uniform_times(1000.0, 1.0);
  const double x0 = c.scenario.x0;
  const LyapunovEstimate est[] = {lyapunov_ratio(s, evolve_cdf(s, x0, grid)), lyapunov_variational(s, x0, grid),
                                  lyapunov_two_trajectory(s, x0, grid)};
  for (const LyapunovEstimate& e : est) {
    const std::string name(to_string(e.method));
    const double sup = e.sup_log_stretch();
    const double last = e.lambda_hat.back();
    const InverseHorizonFit fit = fit_inverse_horizon(e, 100.0, 1000.0);
    v.require(std::isfinite(sup), name + " sup|log stretch| = " + num(sup));
    v.require(std::abs(last) < 1e-2, "lambda_hat(1000) = " + num(last));
    v.require(std::abs(fit.intercept) <= 1e-3, "fit intercept = " + num(fit.intercept));
  }
  const double secs = seconds_since(t0);
  v.require(secs < 60.0, "runtime " + num(secs) + " s");
}

void stretch_identity(Verdict& v) {
  const auto grid = uniform_times(100.0, 0.1);
  for (const std::string& name : kPresets) {
    const app::RunConfig c = config_for(name);
    const SuperpositionState s = app::build_state(c);
    const LyapunovEstimate var = lyapunov_variational(s, c.scenario.x0, grid);
    const LyapunovEstimate ratio = lyapunov_ratio(s, evolve_ode(s, c.scenario.x0, grid));
    const double gap = sup_gap(var.log_stretch, ratio.log_stretch);
    v.require(gap < 1e-5, name + " max|ln delta - ln rho ratio| = " + num(gap));
  }
}

void spectral(Verdict& v) {
  const double dt = 0.05;
  const auto n = static_cast<std::size_t>(std::floor(2000.0 / dt + 1e-9));
  std::vector<double> grid(n);
  for (std::size_t k = 0; k < n; ++k) grid[k] = static_cast<double>(k) * dt;
  for (const std::string& name : kPresets) {
    const app::RunConfig c = config_for(name);
    const SuperpositionState s = app::build_state(c);
    const Trajectory tr = evolve_cdf(s, c.scenario.x0, grid);
    const PowerSpectrum ps = power_spectrum(tr.positions, dt);
    const std::vector<double> w(s.frequencies().begin(), s.frequencies().end());
    const SpectrumReport r = match_combinations(ps.peaks, w, 4, 2 * ps.resolution, 0.01, ps.resolution);
    std::string what = name + " " + std::to_string(r.peaks.size()) + " peaks, " +
                       std::to_string(r.unmatched_count()) + " unmatched";
    for (const MatchedPeak& p : r.peaks)
      if (!p.matched) what += " (" + num(p.frequency) + " at " + num(p.amplitude / r.peaks.front().amplitude) + ")";
    if (r.unmatched_count() > 0) {
      // Informational only: the same peaks against a wider lattice.
      const SpectrumReport wide = match_combinations(ps.peaks, w, 12, 2 * ps.resolution, 0.01, ps.resolution);
      what += ", " + std::to_string(wide.unmatched_count()) + " unmatched with |k_i| <= 12";
    }
    v.require(r.unmatched_count() == 0, what);
  }
}

void order(Verdict& v) {
  const auto grid = uniform_times(100.0, 1.0);
  for (const std::string& name : kPresets) {
    const SuperpositionState s = state_for(name);
    const auto x0 = equilibrium_quantiles(s, 1000);
    for (Method m : {Method::Cdf, Method::Ode}) {
      const EnsembleRun run = evolve_ensemble(s, x0, grid, m);
      v.require(run.order_inversions == 0,
                name + " " + std::string(to_string(m)) + " inversions " + std::to_string(run.order_inversions));
    }
  }
}

void non_convergence(Verdict& v) {
  const SuperpositionState s = state_for("doublewell-five");
  const auto x0 = stratified_uniform(s.domain(), 10000, 1);
  const std::vector<double> grid{0.0, 500.0};
  const EnsembleRun run = evolve_ensemble(s, x0, grid, Method::Cdf);
  const double d0 = run.ks_distance.front(), d1 = run.ks_distance.back();
  v.require(d1 > 0.5 * d0, "D(0) = " + num(d0) + ", D(500) = " + num(d1));
}

void hygiene(Verdict& v) {
  auto g = oracle::rng(99);
  double worst = 0.0;
  for (const std::string& name : kPresets) {
    const SuperpositionState s = state_for(name);
    const Interval d = s.domain();
    const double lo = std::max(d.lo, -6.0), hi = std::min(d.hi, 6.0);
    int checked = 0;
    while (checked < 100) {
      const double x = oracle::uniform(g, lo, hi);
      const double t = oracle::uniform(g, 0.0, 100.0);
      if (s.density(x, t) < 1e-3) continue;
      bool near_jump = false;
      for (double bp : s.basis().breakpoints()) near_jump = near_jump || std::abs(x - bp) < 1e-4;
      if (near_jump) continue;
      const double grad = s.velocity_gradient(x, t);
      const double fd = oracle::central_difference([&](double y) { return s.velocity(y, t); }, x, 1e-5);
      worst = std::max(worst, std::abs(grad - fd) / std::max(std::abs(grad), 1e-2));
      ++checked;
    }
  }
  v.require(worst < 1e-4, "gradient max relative error " + num(worst));

  const app::RunConfig c = config_for("doublewell-five");
  const auto& box = std::get<PiecewiseBox>(c.scenario.potential);
  const EigenBasis coarse = build_numeric(box, 1001, 5), fine = build_numeric(box, 2001, 5);
  const EigenBasis finer = build_numeric(box, 4001, 5);
  double rmin = INFINITY, rmax = 0.0;
  for (std::size_t k = 0; k < 5; ++k) {
    const double e1 = std::abs(coarse.finite_difference()->energies[k] - finer.energy(k));
    const double e2 = std::abs(fine.finite_difference()->energies[k] - finer.energy(k));
    const double e3 = std::abs(finer.finite_difference()->energies[k] - finer.energy(k));
    rmin = std::min({rmin, e1 / e2, e2 / e3});
    rmax = std::max({rmax, e1 / e2, e2 / e3});
  }
  v.require(rmin > 3.4 && rmax < 4.6, "grid-doubling error ratios in [" + num(rmin) + ", " + num(rmax) + "]");
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<void(Verdict&)>>> criteria{
      {"stationary state", stationary},
      {"CDF conservation along ODE paths", equivariance},
      {"ODE and CDF transport agree", cross_method},
      {"single-frequency periodicity", periodicity},
      {"quasiperiodic map reproduces the orbit", quasiperiodic_map},
      {"zero Lyapunov exponent", zero_exponent},
      {"stretch equals density ratio", stretch_identity},
      {"spectrum on the frequency lattice", spectral},
      {"ensemble order preserved", order},
      {"no relaxation to equilibrium", non_convergence},
      {"numerics hygiene", hygiene},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      criteria[i].second(v);
    } catch (const std::exception& e) {
      v.require(false, std::string("exception: ") + e.what());
    }
    failures += v.pass ? 0 : 1;
    std::printf("criterion %2zu %s: %s  %s(%.2f s)\n", i + 1, v.pass ? "PASS" : "FAIL", criteria[i].first,
                v.detail.str().c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
