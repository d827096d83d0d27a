#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <variant>
#include <vector>

namespace quasibohm {

/// Physical constants; natural units by default.
struct Units {
  double hbar = 1.0;
  double mass = 1.0;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double width() const noexcept { return hi - lo; }
  double midpoint() const noexcept { return 0.5 * (lo + hi); }
  bool contains(double x) const noexcept { return x >= lo && x <= hi; }
};

/// Hard-walled box [0, width] with V = 0 inside.
struct InfiniteWell {
  double width = 0.0;
};

struct Harmonic {
  double mass = 1.0;
  double angular_frequency = 1.0;
};

/// Constant potential on [lo, hi].
struct Segment {
  double lo = 0.0;
  double hi = 0.0;
  double value = 0.0;
};

/// Hard walls at domain.lo and domain.hi; segments tile the domain in order.
struct PiecewiseBox {
  Interval domain;
  std::vector<Segment> segments;
};

using PotentialSpec = std::variant<InfiniteWell, Harmonic, PiecewiseBox>;

/// Finite-difference stage of a numeric basis, kept for inspection and
/// convergence studies. Vectors are sampled on `grid` (walls included, where
/// they vanish) and normalized by the trapezoid rule.
struct FiniteDifferenceSolution {
  std::vector<double> grid;
  std::vector<double> potential;  // cell-averaged, one value per grid node
  std::vector<double> energies;
  std::vector<std::vector<double>> vectors;
  int inverse_iterations = 0;
};

/// Ordered bound states of a 1D potential with real eigenfunctions.
///
/// Immutable after construction. Eigenfunctions are evaluated in closed form
/// (analytic bases) or from the exact piecewise solution of the Schrodinger
/// equation (piecewise-constant bases), so phi'' = (2m/hbar^2)(V - E) phi holds
/// pointwise to rounding.
class EigenBasis {
 public:
  class Impl;

  EigenBasis(std::shared_ptr<const Impl> impl);

  std::size_t size() const noexcept;
  std::span<const double> energies() const noexcept;
  double energy(std::size_t i) const;
  const Interval& domain() const noexcept;
  /// Domain ends plus interior points where V is discontinuous; ascending.
  std::span<const double> breakpoints() const noexcept;
  const PotentialSpec& potential_spec() const noexcept;
  const Units& units() const noexcept;

  double potential(double x) const;

  /// Fills phi[i] = phi_i(x) and dphi[i] = phi_i'(x) for i < phi.size().
  /// x is not range-checked here.
  void evaluate(double x, std::span<double> phi, std::span<double> dphi) const;
  double phi(std::size_t i, double x) const;
  double dphi(std::size_t i, double x) const;
  /// Second derivative from the Schrodinger relation.
  double d2phi(std::size_t i, double x) const;

  /// Present only for bases built by build_numeric.
  const FiniteDifferenceSolution* finite_difference() const noexcept;

 private:
  std::shared_ptr<const Impl> impl_;
};

/// phi_k(x) = sqrt(2/L) sin(k pi x / L), k = 1..count, stored at index k-1.
EigenBasis build_infinite_well(double width, std::size_t count, Units units = {});

/// Hermite functions via the normalized three-term recurrence. Supports
/// count <= kMaxHarmonicStates.
EigenBasis build_harmonic(double mass, double angular_frequency, std::size_t count,
                          double hbar = 1.0);
inline constexpr std::size_t kMaxHarmonicStates = 51;

/// Finite-difference Hamiltonian on `grid_points` uniform nodes (walls
/// included), lowest `count` pairs by Sturm bisection and inverse iteration,
/// then each level refined to the exact eigenvalue of the piecewise-constant
/// problem by bisection on the matching Wronskian.
EigenBasis build_numeric(const PiecewiseBox& box, std::size_t grid_points, std::size_t count,
                         Units units = {});

/// Dispatches on the potential kind. `grid_points` is used by PiecewiseBox only.
EigenBasis build_basis(const PotentialSpec& spec, std::size_t count, Units units,
                       std::size_t grid_points = 4001);

/// Gram matrix of the basis by Gauss-Legendre quadrature over the smooth
/// pieces; row-major, size() x size().
std::vector<double> overlap_matrix(const EigenBasis& basis);

/// Sign changes of phi_i on `samples` uniform interior points.
std::size_t count_nodes(const EigenBasis& basis, std::size_t i, std::size_t samples = 20000);

}  // namespace quasibohm
