#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "quasibohm/eigenbasis.hpp"

namespace quasibohm {

using Complex = std::complex<double>;

/// Most eigenstates a superposition may hold.
inline constexpr std::size_t kMaxTerms = 64;

/// Angles y_1..y_n, each reduced into [0, 2pi).
class PhaseVector {
 public:
  PhaseVector() = default;
  explicit PhaseVector(std::vector<double> angles);

  std::size_t size() const noexcept { return angles_.size(); }
  double operator[](std::size_t i) const { return angles_[i]; }
  std::span<const double> angles() const noexcept { return angles_; }

 private:
  std::vector<double> angles_;
};

/// psi together with its first two spatial derivatives.
struct Amplitude {
  Complex value;
  Complex d1;
  Complex d2;
};

/// Velocity field, its spatial derivative and the density at one point.
struct FlowJet {
  double velocity;
  double gradient;
  double density;
};

struct StateOptions {
  double node_epsilon = 1e-12;
  /// Simpson panels of the cumulative density table.
  std::size_t cdf_panels = std::size_t{1} << 14;
};

class SuperpositionState;

/// The wavefunction frozen at one instant, or at one point of the phase torus.
/// Cheap to construct; holds the effective coefficients c_i.
class Snapshot {
 public:
  Complex psi(double x) const;
  Amplitude jet(double x) const;
  double density(double x) const;
  double velocity(double x) const;
  double velocity_gradient(double x) const;
  /// velocity and velocity_gradient from a single evaluation.
  FlowJet flow(double x) const;
  double cdf(double x) const;
  /// Leftmost x with cdf(x) >= p.
  double cdf_inverse(double p) const;

  /// NaN for phase snapshots.
  double time() const noexcept { return time_; }
  std::span<const Complex> coefficients() const noexcept { return {c_.data(), terms_}; }

 private:
  friend class SuperpositionState;
  Snapshot(const SuperpositionState& state, double time) : state_(&state), time_(time) {}

  void check_domain(double x) const;
  double node_guard(double x, const Amplitude& a) const;
  void pair_weights(std::span<double> w) const;
  double panel_mass(std::size_t panel) const;
  double node_density(std::size_t node) const;
  double block_mass(std::size_t block, std::span<const double> w) const;
  double partial_mass(std::size_t panel, double x) const;

  const SuperpositionState* state_;
  std::array<Complex, kMaxTerms> c_{};
  std::size_t terms_ = 0;
  double time_;
};

/// psi(x, t) = sum_i a_i exp(-i E_i t / hbar) phi_i(x) over the leading basis
/// states, with Bohm velocity, density and cumulative distribution.
///
/// Immutable after construction. The cumulative Simpson table stores
/// time-independent pair integrals of phi_i phi_j, so H_t at any t (or any
/// phase point) is a weighted sum of shared data and no per-time cache exists.
class SuperpositionState {
 public:
  /// Uses the first coefficients.size() states of the basis; normalizes the
  /// coefficients. Throws InvalidParameter on a zero vector.
  SuperpositionState(EigenBasis basis, std::vector<Complex> coefficients, StateOptions options = {});

  const EigenBasis& basis() const noexcept { return basis_; }
  const Interval& domain() const noexcept { return basis_.domain(); }
  std::span<const Complex> coefficients() const noexcept { return coefficients_; }
  /// omega_i = (E_i - E_0) / hbar, i = 1..n.
  std::span<const double> frequencies() const noexcept { return frequencies_; }
  std::size_t frequency_count() const noexcept { return frequencies_.size(); }
  std::size_t terms() const noexcept { return coefficients_.size(); }
  const StateOptions& options() const noexcept { return options_; }

  Snapshot at(double t) const;
  Snapshot at(const PhaseVector& phases) const;
  /// omega_i t reduced mod 2pi.
  PhaseVector phases_at(double t) const;

  Complex psi(double x, double t) const { return at(t).psi(x); }
  Amplitude psi_jet(double x, double t) const { return at(t).jet(x); }
  Complex psi_phases(double x, const PhaseVector& phases) const { return at(phases).psi(x); }
  double density(double x, double t) const { return at(t).density(x); }
  double velocity(double x, double t) const { return at(t).velocity(x); }
  double velocity_gradient(double x, double t) const { return at(t).velocity_gradient(x); }
  double cdf(double x, double t) const { return at(t).cdf(x); }
  double cdf_inverse(double p, double t) const { return at(t).cdf_inverse(p); }

 private:
  friend class Snapshot;

  void build_table();

  EigenBasis basis_;
  std::vector<Complex> coefficients_;
  std::vector<double> frequencies_;
  StateOptions options_;

  // Cumulative table: panel edges, Simpson nodes (edges and midpoints),
  // phi values at nodes, and pair integrals at block boundaries.
  std::vector<double> edges_;
  std::vector<double> node_phi_;  // node-major, terms() values per node
  std::vector<double> block_pairs_;
  std::size_t pair_count_ = 0;
};

}  // namespace quasibohm
