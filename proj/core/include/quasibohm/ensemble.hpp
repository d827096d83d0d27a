#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "quasibohm/trajectory.hpp"

namespace quasibohm {

/// An ordered family of trajectories sampled on a shared time grid.
struct EnsembleRun {
  std::vector<double> initial_points;
  std::vector<double> times;
  /// Row-major [time][point].
  std::vector<double> positions;
  /// Kolmogorov distance to H_t at every time.
  std::vector<double> ks_distance;
  /// Adjacent pairs (summed over all time slices) with positions[j] > positions[j+1].
  std::size_t order_inversions = 0;
  Method method = Method::Cdf;
  StepStatistics steps;

  std::size_t points() const noexcept { return initial_points.size(); }
  double position(std::size_t time_index, std::size_t point) const {
    return positions[time_index * points() + point];
  }
  std::span<const double> slice(std::size_t time_index) const {
    return {positions.data() + time_index * points(), points()};
  }
};

/// Evolves every initial point independently (in parallel when threads > 1)
/// and fills ks_distance and order_inversions. Output does not depend on the
/// thread count. A failing member is reported with its initial point.
EnsembleRun evolve_ensemble(const SuperpositionState& state, std::span<const double> initial_points,
                            std::span<const double> t_grid, Method method, unsigned threads = 1,
                            OdeTolerances tolerances = {});

/// D(t) = sup_x |F_N(x) - H_t(x)| for the empirical distribution of the
/// ensemble at each time, evaluated exactly at the sorted sample points.
std::vector<double> equilibrium_distance(const EnsembleRun& run, const SuperpositionState& state,
                                         unsigned threads = 1);

/// x_j = H_t^{-1}((j - 1/2) / N), j = 1..N.
std::vector<double> equilibrium_quantiles(const SuperpositionState& state, std::size_t count,
                                          double t = 0.0);

/// One point per stratum of [lo, hi], jittered within the middle half of the
/// stratum by a seeded 64-bit Mersenne twister. Ascending.
std::vector<double> stratified_uniform(const Interval& domain, std::size_t count, std::uint64_t seed);

}  // namespace quasibohm
