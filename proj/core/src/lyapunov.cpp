#include "quasibohm/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "quasibohm/errors.hpp"

namespace quasibohm {
namespace {

constexpr double kCollapse = 1e-15;

void require_grid(std::span<const double> t_grid) {
  if (t_grid.size() < 2) throw InvalidParameter("Lyapunov estimate needs at least two sample times");
}

}  // namespace

std::string_view to_string(LyapunovMethod m) noexcept {
  switch (m) {
    case LyapunovMethod::Ratio:
      return "ratio";
    case LyapunovMethod::Variational:
      return "variational";
    case LyapunovMethod::TwoTrajectory:
      return "two_trajectory";
  }
  return "unknown";
}

double LyapunovEstimate::sup_log_stretch() const {
  double s = 0.0;
  for (double v : log_stretch) s = std::max(s, std::abs(v));
  return s;
}

LyapunovEstimate lyapunov_ratio(const SuperpositionState& state, const Trajectory& trajectory) {
  require_grid(trajectory.times);
  LyapunovEstimate est;
  est.method = LyapunovMethod::Ratio;
  est.steps = trajectory.diagnostics.steps;
  const double t0 = trajectory.times.front();
  const double eps = state.options().node_epsilon;
  const double rho0 = state.density(trajectory.positions.front(), t0);
  if (!(rho0 >= eps)) throw NodeProximity(trajectory.positions.front(), t0, rho0);
  if (state.frequency_count() == 0) {
    for (std::size_t k = 1; k < trajectory.times.size(); ++k) {
      est.horizons.push_back(trajectory.times[k]);
      est.log_stretch.push_back(0.0);
      est.lambda_hat.push_back(0.0);
    }
    return est;
  }
  const double log_rho0 = std::log(rho0);
  for (std::size_t k = 1; k < trajectory.times.size(); ++k) {
    const double t = trajectory.times[k];
    const double x = trajectory.positions[k];
    const double rho = state.density(x, t);
    if (!(rho >= eps)) throw NodeProximity(x, t, rho);
    const double s = log_rho0 - std::log(rho);
    est.horizons.push_back(t);
    est.log_stretch.push_back(s);
    est.lambda_hat.push_back(s / (t - t0));
  }
  return est;
}

LyapunovEstimate lyapunov_variational(const SuperpositionState& state, double x0,
                                      std::span<const double> t_grid, OdeTolerances tolerances) {
  require_grid(t_grid);
  const double t0 = t_grid.front();
  const double rho0 = state.density(x0, t0);
  if (!(rho0 > state.options().node_epsilon)) throw NodeProximity(x0, t0, rho0);

  LyapunovEstimate est;
  est.method = LyapunovMethod::Variational;
  est.horizons.assign(t_grid.begin() + 1, t_grid.end());
  est.log_stretch.resize(est.horizons.size());
  est.lambda_hat.resize(est.horizons.size());

  OdeOptions opt;
  opt.rel_tol = tolerances.rel_tol;
  opt.abs_tol = tolerances.abs_tol;
  est.steps = integrate_dopri5<2>(
      [&](double t, const std::array<double, 2>& y) {
        const FlowJet f = state.at(t).flow(y[0]);
        return std::array<double, 2>{f.velocity, f.gradient};
      },
      std::array<double, 2>{x0, 0.0}, t_grid,
      [&](std::size_t k, const std::array<double, 2>& y) {
        if (k == 0) return;
        est.log_stretch[k - 1] = y[1];
        est.lambda_hat[k - 1] = y[1] / (t_grid[k] - t0);
      },
      opt);
  return est;
}

LyapunovEstimate lyapunov_two_trajectory(const SuperpositionState& state, double x0,
                                         std::span<const double> t_grid,
                                         TwoTrajectoryOptions options) {
  require_grid(t_grid);
  if (!(options.d0 > 0.0) || !(options.renorm_every > 0.0)) {
    throw InvalidParameter("separation and renormalization interval must be positive");
  }
  for (std::size_t k = 1; k < t_grid.size(); ++k) {
    if (!(t_grid[k] > t_grid[k - 1])) throw InvalidParameter("time grid must be strictly increasing");
  }
  const double t0 = t_grid.front();
  const double rho0 = state.density(x0, t0);
  if (!(rho0 > state.options().node_epsilon)) throw NodeProximity(x0, t0, rho0);

  LyapunovEstimate est;
  est.method = LyapunovMethod::TwoTrajectory;
  est.horizons.assign(t_grid.begin() + 1, t_grid.end());
  est.log_stretch.resize(est.horizons.size());
  est.lambda_hat.resize(est.horizons.size());

  OdeOptions opt;
  opt.rel_tol = options.tolerances.rel_tol;
  opt.abs_tol = options.tolerances.abs_tol;
  const Interval& dom = state.domain();
  auto rhs = [&](double t, const std::array<double, 2>& y) {
    const Snapshot snap = state.at(t);
    return std::array<double, 2>{snap.velocity(y[0]), snap.velocity(y[1])};
  };

  double x = x0;
  double accumulated = 0.0;
  std::size_t next = 1;  // next t_grid index to record
  const double t_end = t_grid.back();
  std::vector<double> sub;
  std::vector<long> sub_index;
  for (long interval = 0;; ++interval) {
    const double a = t0 + static_cast<double>(interval) * options.renorm_every;
    if (a >= t_end) break;
    const double b = std::min(t0 + static_cast<double>(interval + 1) * options.renorm_every, t_end);
    sub.assign(1, a);
    sub_index.assign(1, -1);
    while (next < t_grid.size() && t_grid[next] <= b) {
      if (t_grid[next] > a) {
        sub.push_back(t_grid[next]);
        sub_index.push_back(static_cast<long>(next));
      }
      ++next;
    }
    if (sub.back() < b) {
      sub.push_back(b);
      sub_index.push_back(-1);
    }

    const double direction = x + options.d0 <= dom.hi ? 1.0 : -1.0;
    // Measure against the separation actually representable, not d0 itself.
    const double companion = x + direction * options.d0;
    const double d_start = std::abs(companion - x);
    std::array<double, 2> end{x, x};
    const StepStatistics s = integrate_dopri5<2>(
        rhs, std::array<double, 2>{x, companion}, sub,
        [&](std::size_t k, const std::array<double, 2>& y) {
          const double d = std::abs(y[1] - y[0]);
          if (sub_index[k] >= 0) {
            const auto g = static_cast<std::size_t>(sub_index[k]);
            const double stretch = accumulated + std::log(std::max(d, kCollapse) / d_start);
            est.log_stretch[g - 1] = stretch;
            est.lambda_hat[g - 1] = stretch / (t_grid[g] - t0);
          }
          if (k + 1 == sub.size()) end = y;
        },
        opt);
    est.steps.merge(s);
    const double d = std::abs(end[1] - end[0]);
    if (d < kCollapse) {
      ++est.separation_collapses;
      accumulated += std::log(kCollapse / d_start);
    } else {
      accumulated += std::log(d / d_start);
    }
    x = end[0];
  }
  return est;
}

InverseHorizonFit fit_inverse_horizon(const LyapunovEstimate& estimate, double t_lo, double t_hi) {
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t n = 0;
  for (std::size_t k = 0; k < estimate.horizons.size(); ++k) {
    const double t = estimate.horizons[k];
    if (t < t_lo || t > t_hi || !(t > 0.0)) continue;
    const double x = 1.0 / t;
    const double y = estimate.lambda_hat[k];
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) throw InvalidParameter("inverse-horizon fit needs at least two horizons in range");
  const double nd = static_cast<double>(n);
  const double denom = nd * sxx - sx * sx;
  if (!(std::abs(denom) > 0.0)) throw NumericError("degenerate inverse-horizon fit");
  const double slope = (nd * sxy - sx * sy) / denom;
  return {(sy - slope * sx) / nd, slope, n};
}

}  // namespace quasibohm
