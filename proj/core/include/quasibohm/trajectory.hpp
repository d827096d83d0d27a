#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "quasibohm/ode.hpp"
#include "quasibohm/state.hpp"

namespace quasibohm {

enum class Method { Ode, Cdf };

std::string_view to_string(Method m) noexcept;

struct TrajectoryDiagnostics {
  /// max_k |H_{t_k}(x(t_k)) - H_{t_0}(x_0)|
  double max_cdf_drift = 0.0;
  /// Smallest |psi|^2 at the sampled positions.
  double min_density = 0.0;
  StepStatistics steps;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<double> positions;
  Method method = Method::Cdf;
  TrajectoryDiagnostics diagnostics;
};

struct OdeTolerances {
  double rel_tol = 1e-9;
  double abs_tol = 1e-11;
};

/// Integrates dx/dt = v(x, t) with adaptive Dormand-Prince 5(4), sampling the
/// dense output on t_grid.
Trajectory evolve_ode(const SuperpositionState& state, double x0, std::span<const double> t_grid,
                      OdeTolerances tolerances = {});

/// Solves H_t(x(t)) = H_{t_0}(x0) at every grid time.
Trajectory evolve_cdf(const SuperpositionState& state, double x0, std::span<const double> t_grid);

/// Inverse CDF of |psi_{y_1..y_n}|^2 at p0. Along a trajectory,
/// x(t) = quasiperiodic_F(state, H_0(x0), phases_at(t)).
double quasiperiodic_F(const SuperpositionState& state, double p0, const PhaseVector& phases);

/// {0, dt, 2dt, ...} up to t_max; t_max is appended when dt does not divide it.
std::vector<double> uniform_times(double t_max, double dt, double t0 = 0.0);

}  // namespace quasibohm
