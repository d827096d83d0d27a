#include "quasibohm/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>

#include "quasibohm/errors.hpp"
#include "quasibohm/parallel.hpp"

namespace quasibohm {
namespace {

std::string member_prefix(std::size_t index, double x0) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "ensemble member %zu (x0 = %.17g): ", index, x0);
  return buf;
}

// Rethrows with the member identified while keeping the error category.
[[noreturn]] void rethrow_for_member(std::size_t index, double x0) {
  const std::string p = member_prefix(index, x0);
  try {
    throw;
  } catch (const NodeProximity& e) {
    throw TrajectorySingularity(p + e.what(), e.t(), e.x());
  } catch (const TrajectorySingularity& e) {
    throw TrajectorySingularity(p + e.what(), e.t(), e.x());
  } catch (const DomainError& e) {
    throw DomainError(p + e.what(), e.x());
  } catch (const InvalidParameter& e) {
    throw InvalidParameter(p + e.what());
  } catch (const CapabilityError& e) {
    throw CapabilityError(p + e.what());
  } catch (const Error& e) {
    throw NumericError(p + e.what());
  }
}

double ks_sorted(std::vector<double>& xs, const Snapshot& snap) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t j = 0; j < xs.size(); ++j) {
    const double h = snap.cdf(xs[j]);
    d = std::max(d, std::max(static_cast<double>(j + 1) / n - h, h - static_cast<double>(j) / n));
  }
  return d;
}

}  // namespace

EnsembleRun evolve_ensemble(const SuperpositionState& state, std::span<const double> initial_points,
                            std::span<const double> t_grid, Method method, unsigned threads,
                            OdeTolerances tolerances) {
  if (initial_points.empty()) throw InvalidParameter("ensemble needs at least one initial point");
  if (t_grid.empty()) throw InvalidParameter("time grid is empty");
  EnsembleRun run;
  run.method = method;
  run.initial_points.assign(initial_points.begin(), initial_points.end());
  run.times.assign(t_grid.begin(), t_grid.end());
  const std::size_t n = initial_points.size();
  const std::size_t nt = t_grid.size();
  run.positions.resize(n * nt);
  std::vector<StepStatistics> stats(n);

  parallel_for(n, threads, [&](std::size_t i) {
    const double x0 = initial_points[i];
    Trajectory traj;
    try {
      traj = method == Method::Ode ? evolve_ode(state, x0, t_grid, tolerances)
                                   : evolve_cdf(state, x0, t_grid);
    } catch (const Error&) {
      rethrow_for_member(i, x0);
    }
    for (std::size_t k = 0; k < nt; ++k) run.positions[k * n + i] = traj.positions[k];
    stats[i] = traj.diagnostics.steps;
  });
  // Merged in index order so the totals do not depend on scheduling.
  for (const StepStatistics& s : stats) run.steps.merge(s);

  for (std::size_t k = 0; k < nt; ++k) {
    const std::span<const double> row = run.slice(k);
    for (std::size_t j = 0; j + 1 < n; ++j) {
      if (row[j] > row[j + 1]) ++run.order_inversions;
    }
  }
  run.ks_distance = equilibrium_distance(run, state, threads);
  return run;
}

std::vector<double> equilibrium_distance(const EnsembleRun& run, const SuperpositionState& state,
                                         unsigned threads) {
  std::vector<double> d(run.times.size());
  parallel_for(run.times.size(), threads, [&](std::size_t k) {
    const std::span<const double> row = run.slice(k);
    std::vector<double> xs(row.begin(), row.end());
    d[k] = ks_sorted(xs, state.at(run.times[k]));
  });
  return d;
}

std::vector<double> equilibrium_quantiles(const SuperpositionState& state, std::size_t count, double t) {
  if (count == 0) throw InvalidParameter("quantile count must be positive");
  const Snapshot snap = state.at(t);
  std::vector<double> x(count);
  for (std::size_t j = 0; j < count; ++j) {
    x[j] = snap.cdf_inverse((static_cast<double>(j) + 0.5) / static_cast<double>(count));
  }
  return x;
}

std::vector<double> stratified_uniform(const Interval& domain, std::size_t count, std::uint64_t seed) {
  if (count == 0) throw InvalidParameter("sample count must be positive");
  std::mt19937_64 rng(seed);
  const double width = domain.width() / static_cast<double>(count);
  std::vector<double> x(count);
  for (std::size_t j = 0; j < count; ++j) {
    // Explicit 53-bit conversion; generate_canonical is not portable bit for bit.
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    x[j] = domain.lo + (static_cast<double>(j) + 0.25 + 0.5 * u) * width;
  }
  return x;
}

}  // namespace quasibohm
