#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "quasibohm/trajectory.hpp"

namespace quasibohm {

enum class LyapunovMethod { Ratio, Variational, TwoTrajectory };

std::string_view to_string(LyapunovMethod m) noexcept;

/// lambda_hat(T_k) = log_stretch[k] / (T_k - t_0) at every horizon T_k > t_0,
/// where log_stretch approximates ln(dx(T)/dx(t_0)).
struct LyapunovEstimate {
  std::vector<double> horizons;
  std::vector<double> lambda_hat;
  std::vector<double> log_stretch;
  LyapunovMethod method = LyapunovMethod::Ratio;
  StepStatistics steps;
  /// Two-trajectory estimator only: renormalization intervals whose
  /// separation fell below 1e-15 and had to be re-seeded.
  long separation_collapses = 0;

  /// max_k |log_stretch[k]|
  double sup_log_stretch() const;
};

/// Closed form in one dimension: dx(t)/dx(0) = rho(x(0), 0) / rho(x(t), t).
LyapunovEstimate lyapunov_ratio(const SuperpositionState& state, const Trajectory& trajectory);

/// Integrates (x, ln delta) with d(ln delta)/dt = dv/dx(x(t), t), delta(t_0) = 1.
LyapunovEstimate lyapunov_variational(const SuperpositionState& state, double x0,
                                      std::span<const double> t_grid, OdeTolerances tolerances = {});

struct TwoTrajectoryOptions {
  double d0 = 1e-8;
  double renorm_every = 1.0;
  OdeTolerances tolerances{};
};

/// Finite-separation estimator: integrates a reference and a companion
/// trajectory as one system, rescaling the separation to d0 at every
/// renormalization time and accumulating ln(d / d0).
LyapunovEstimate lyapunov_two_trajectory(const SuperpositionState& state, double x0,
                                         std::span<const double> t_grid,
                                         TwoTrajectoryOptions options = {});

struct InverseHorizonFit {
  double intercept;
  double slope;
  std::size_t samples;
};

/// Least-squares fit lambda_hat = intercept + slope / T over horizons in [t_lo, t_hi].
InverseHorizonFit fit_inverse_horizon(const LyapunovEstimate& estimate, double t_lo, double t_hi);

}  // namespace quasibohm
