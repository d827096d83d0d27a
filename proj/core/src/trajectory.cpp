#include "quasibohm/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "quasibohm/errors.hpp"

namespace quasibohm {
namespace {

void check_grid(std::span<const double> t_grid) {
  if (t_grid.empty()) throw InvalidParameter("time grid is empty");
  for (std::size_t k = 0; k < t_grid.size(); ++k) {
    if (!std::isfinite(t_grid[k])) throw InvalidParameter("time grid has a non-finite entry");
    if (k > 0 && !(t_grid[k] > t_grid[k - 1])) {
      throw InvalidParameter("time grid must be strictly increasing");
    }
  }
}

void check_start(const SuperpositionState& state, double x0, double t0) {
  const double rho = state.density(x0, t0);
  if (!(rho > state.options().node_epsilon)) throw NodeProximity(x0, t0, rho);
}

void fill_diagnostics(const SuperpositionState& state, Trajectory& traj, double p0) {
  double drift = 0.0;
  double min_rho = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    const Snapshot snap = state.at(traj.times[k]);
    drift = std::max(drift, std::abs(snap.cdf(traj.positions[k]) - p0));
    min_rho = std::min(min_rho, snap.density(traj.positions[k]));
  }
  traj.diagnostics.max_cdf_drift = drift;
  traj.diagnostics.min_density = min_rho;
}

}  // namespace

std::string_view to_string(Method m) noexcept { return m == Method::Ode ? "ode" : "cdf"; }

Trajectory evolve_ode(const SuperpositionState& state, double x0, std::span<const double> t_grid,
                      OdeTolerances tolerances) {
  check_grid(t_grid);
  check_start(state, x0, t_grid.front());
  Trajectory traj;
  traj.method = Method::Ode;
  traj.times.assign(t_grid.begin(), t_grid.end());
  traj.positions.resize(t_grid.size());

  OdeOptions opt;
  opt.rel_tol = tolerances.rel_tol;
  opt.abs_tol = tolerances.abs_tol;
  traj.diagnostics.steps = integrate_dopri5<1>(
      [&](double t, const std::array<double, 1>& y) {
        return std::array<double, 1>{state.at(t).velocity(y[0])};
      },
      std::array<double, 1>{x0}, t_grid,
      [&](std::size_t k, const std::array<double, 1>& y) { traj.positions[k] = y[0]; }, opt);

  fill_diagnostics(state, traj, state.cdf(x0, t_grid.front()));
  return traj;
}

Trajectory evolve_cdf(const SuperpositionState& state, double x0, std::span<const double> t_grid) {
  check_grid(t_grid);
  check_start(state, x0, t_grid.front());
  Trajectory traj;
  traj.method = Method::Cdf;
  traj.times.assign(t_grid.begin(), t_grid.end());
  traj.positions.resize(t_grid.size());
  const double p0 = state.cdf(x0, t_grid.front());
  traj.positions[0] = x0;
  for (std::size_t k = 1; k < t_grid.size(); ++k) {
    try {
      traj.positions[k] = state.cdf_inverse(p0, t_grid[k]);
    } catch (const Error& e) {
      throw NumericError("cdf inversion failed at t = " + std::to_string(t_grid[k]) +
                         ", p0 = " + std::to_string(p0) + ": " + e.what());
    }
  }
  fill_diagnostics(state, traj, p0);
  return traj;
}

double quasiperiodic_F(const SuperpositionState& state, double p0, const PhaseVector& phases) {
  return state.at(phases).cdf_inverse(p0);
}

std::vector<double> uniform_times(double t_max, double dt, double t0) {
  if (!(dt > 0.0) || !(t_max > t0)) throw InvalidParameter("need dt > 0 and t_max > t0");
  const auto steps = static_cast<std::size_t>(std::floor((t_max - t0) / dt + 1e-9));
  std::vector<double> t;
  t.reserve(steps + 2);
  for (std::size_t k = 0; k <= steps; ++k) t.push_back(t0 + static_cast<double>(k) * dt);
  if (t_max - t.back() > 1e-9 * dt) {
    t.push_back(t_max);
  } else {
    t.back() = std::min(t.back(), t_max);
  }
  return t;
}

}  // namespace quasibohm
