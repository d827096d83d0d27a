#include "quasibohm/eigenbasis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>

#include "quasibohm/errors.hpp"
#include "quasibohm/quadrature.hpp"
#include "quasibohm/tridiagonal.hpp"

namespace quasibohm {

class EigenBasis::Impl {
 public:
  virtual ~Impl() = default;
  virtual void evaluate(double x, std::span<double> phi, std::span<double> dphi) const = 0;
  virtual double potential(double x) const = 0;

  std::vector<double> energies;
  Interval domain;
  std::vector<double> breakpoints;
  PotentialSpec spec;
  Units units;
  std::optional<FiniteDifferenceSolution> fd;
};

namespace {

void require_units(const Units& u) {
  if (!(u.hbar > 0.0) || !(u.mass > 0.0) || !std::isfinite(u.hbar) || !std::isfinite(u.mass)) {
    throw InvalidParameter("hbar and mass must be positive and finite");
  }
}

void require_span_sizes(std::span<double> phi, std::span<double> dphi, std::size_t size) {
  if (phi.size() > size || dphi.size() < phi.size()) {
    throw InvalidParameter("evaluation buffer larger than the basis");
  }
}

// ---------------------------------------------------------------------------
// Infinite square well

class WellImpl final : public EigenBasis::Impl {
 public:
  WellImpl(double width, std::size_t count, Units u) : width_(width) {
    spec = InfiniteWell{width};
    units = u;
    domain = {0.0, width};
    breakpoints = {0.0, width};
    const double scale = u.hbar * u.hbar * std::numbers::pi * std::numbers::pi /
                         (2.0 * u.mass * width * width);
    energies.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
      const double k = static_cast<double>(i + 1);
      energies[i] = scale * k * k;
    }
    amplitude_ = std::sqrt(2.0 / width);
  }

  void evaluate(double x, std::span<double> phi, std::span<double> dphi) const override {
    require_span_sizes(phi, dphi, energies.size());
    const double theta = std::numbers::pi * x / width_;
    for (std::size_t i = 0; i < phi.size(); ++i) {
      const double k = static_cast<double>(i + 1);
      const double arg = k * theta;
      phi[i] = amplitude_ * std::sin(arg);
      dphi[i] = amplitude_ * (k * std::numbers::pi / width_) * std::cos(arg);
    }
  }

  double potential(double) const override { return 0.0; }

 private:
  double width_;
  double amplitude_;
};

// ---------------------------------------------------------------------------
// Harmonic oscillator

class HarmonicImpl final : public EigenBasis::Impl {
 public:
  HarmonicImpl(double mass, double omega, std::size_t count, double hbar)
      : mass_(mass), omega_(omega) {
    spec = Harmonic{mass, omega};
    units = Units{hbar, mass};
    length_ = std::sqrt(hbar / (mass * omega));
    // The tail beyond 12 lengths past the outermost turning point carries
    // less than 1e-30 of the probability.
    const double cutoff =
        length_ * (12.0 + std::sqrt(2.0 * static_cast<double>(count) + 1.0));
    domain = {-cutoff, cutoff};
    breakpoints = {-cutoff, cutoff};
    energies.resize(count);
    for (std::size_t k = 0; k < count; ++k) {
      energies[k] = hbar * omega * (static_cast<double>(k) + 0.5);
    }
  }

  void evaluate(double x, std::span<double> phi, std::span<double> dphi) const override {
    require_span_sizes(phi, dphi, energies.size());
    const std::size_t n = phi.size();
    if (n == 0) return;
    std::array<double, kMaxHarmonicStates + 2> h{};
    const double xi = x / length_;
    h[0] = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * xi * xi);
    h[1] = std::numbers::sqrt2 * xi * h[0];
    for (std::size_t k = 1; k < n; ++k) {
      const double kd = static_cast<double>(k);
      h[k + 1] = std::sqrt(2.0 / (kd + 1.0)) * xi * h[k] - std::sqrt(kd / (kd + 1.0)) * h[k - 1];
    }
    const double norm = 1.0 / std::sqrt(length_);
    for (std::size_t k = 0; k < n; ++k) {
      const double kd = static_cast<double>(k);
      // Flip odd states so every phi_k is positive near the left cutoff.
      const double sign = (k % 2 == 0) ? 1.0 : -1.0;
      const double below = k > 0 ? std::sqrt(0.5 * kd) * h[k - 1] : 0.0;
      const double dxi = below - std::sqrt(0.5 * (kd + 1.0)) * h[k + 1];
      phi[k] = sign * norm * h[k];
      dphi[k] = sign * norm * dxi / length_;
    }
  }

  double potential(double x) const override { return 0.5 * mass_ * omega_ * omega_ * x * x; }

 private:
  double mass_;
  double omega_;
  double length_;
};

// ---------------------------------------------------------------------------
// Piecewise-constant box

struct Cauchy {
  double value;
  double slope;
};

enum class Regime { Oscillatory, Evanescent, Flat };

struct Piece {
  double lo;
  double hi;
  double potential;
};

struct LocalWave {
  Regime regime;
  double rate;  // wave number or decay constant
};

LocalWave local_wave(double energy, double potential, const Units& u) {
  const double k2 = 2.0 * u.mass * (energy - potential) / (u.hbar * u.hbar);
  if (k2 > 0.0) return {Regime::Oscillatory, std::sqrt(k2)};
  if (k2 < 0.0) return {Regime::Evanescent, std::sqrt(-k2)};
  return {Regime::Flat, 0.0};
}

// Exact solution of phi'' = -k2 phi over a displacement u.
Cauchy propagate(Cauchy s, LocalWave w, double u) {
  switch (w.regime) {
    case Regime::Oscillatory: {
      const double c = std::cos(w.rate * u);
      const double sn = std::sin(w.rate * u);
      return {s.value * c + s.slope * sn / w.rate, -s.value * w.rate * sn + s.slope * c};
    }
    case Regime::Evanescent: {
      const double c = std::cosh(w.rate * u);
      const double sn = std::sinh(w.rate * u);
      return {s.value * c + s.slope * sn / w.rate, s.value * w.rate * sn + s.slope * c};
    }
    case Regime::Flat:
      break;
  }
  return {s.value + s.slope * u, s.slope};
}

struct PieceState {
  LocalWave wave;
  Cauchy at_lo;
  Cauchy at_hi;
};

class PiecewiseImpl final : public EigenBasis::Impl {
 public:
  PiecewiseImpl(const PiecewiseBox& box, std::size_t grid_points, std::size_t count, Units u);

  void evaluate(double x, std::span<double> phi, std::span<double> dphi) const override {
    require_span_sizes(phi, dphi, energies.size());
    const std::size_t p = locate(x);
    const Piece& piece = pieces_[p];
    for (std::size_t i = 0; i < phi.size(); ++i) {
      const PieceState& st = states_[i][p];
      Cauchy c;
      if (st.wave.regime == Regime::Evanescent && x - piece.lo > piece.hi - x) {
        c = propagate(st.at_hi, st.wave, x - piece.hi);
      } else {
        c = propagate(st.at_lo, st.wave, x - piece.lo);
      }
      phi[i] = c.value;
      dphi[i] = c.slope;
    }
  }

  double potential(double x) const override { return pieces_[locate(x)].potential; }

 private:
  std::size_t locate(double x) const {
    const auto it = std::upper_bound(starts_.begin(), starts_.end(), x);
    const std::size_t idx = it == starts_.begin() ? 0 : static_cast<std::size_t>(it - starts_.begin()) - 1;
    return std::min(idx, pieces_.size() - 1);
  }

  double wronskian(double energy) const;
  void finite_difference_stage(std::size_t grid_points, std::size_t count);
  void refine(std::size_t count);
  std::vector<PieceState> eigenfunction(double energy) const;

  std::vector<Piece> pieces_;
  std::vector<double> starts_;
  std::vector<std::vector<PieceState>> states_;
  std::size_t match_ = 1;  // pieces [0, match_) are shot from the left
};

PiecewiseImpl::PiecewiseImpl(const PiecewiseBox& box, std::size_t grid_points, std::size_t count,
                             Units u) {
  spec = box;
  units = u;
  domain = box.domain;
  breakpoints.push_back(box.domain.lo);
  for (std::size_t s = 0; s + 1 < box.segments.size(); ++s) {
    if (box.segments[s].value != box.segments[s + 1].value) {
      breakpoints.push_back(box.segments[s].hi);
    }
  }
  breakpoints.push_back(box.domain.hi);

  for (const Segment& s : box.segments) pieces_.push_back({s.lo, s.hi, s.value});
  if (pieces_.size() == 1) {
    const Piece whole = pieces_.front();
    const double mid = 0.5 * (whole.lo + whole.hi);
    pieces_ = {{whole.lo, mid, whole.potential}, {mid, whole.hi, whole.potential}};
  }
  for (const Piece& p : pieces_) starts_.push_back(p.lo);
  // Match at the interior boundary nearest the midpoint.
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t s = 1; s < pieces_.size(); ++s) {
    const double d = std::abs(pieces_[s].lo - domain.midpoint());
    if (d < best) {
      best = d;
      match_ = s;
    }
  }

  finite_difference_stage(grid_points, count);
  refine(count);
}

void PiecewiseImpl::finite_difference_stage(std::size_t grid_points, std::size_t count) {
  FiniteDifferenceSolution sol;
  const std::size_t n = grid_points;
  const double h = domain.width() / static_cast<double>(n - 1);
  sol.grid.resize(n);
  for (std::size_t j = 0; j < n; ++j) sol.grid[j] = domain.lo + static_cast<double>(j) * h;
  sol.grid.back() = domain.hi;

  sol.potential.assign(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const double a = std::max(domain.lo, sol.grid[j] - 0.5 * h);
    const double b = std::min(domain.hi, sol.grid[j] + 0.5 * h);
    double acc = 0.0;
    for (const Piece& p : pieces_) {
      const double lo = std::max(a, p.lo);
      const double hi = std::min(b, p.hi);
      if (hi > lo) acc += (hi - lo) * p.potential;
    }
    sol.potential[j] = acc / (b - a);
  }

  const std::size_t m = n - 2;
  const double kinetic = units.hbar * units.hbar / (units.mass * h * h);
  std::vector<double> diag(m);
  std::vector<double> off(m - 1, -0.5 * kinetic);
  for (std::size_t j = 0; j < m; ++j) diag[j] = kinetic + sol.potential[j + 1];

  // One extra level bounds the bracket of the highest requested state.
  const TridiagonalEigenpairs pairs = lowest_eigenpairs(diag, off, std::min(count + 1, m));
  sol.energies = pairs.values;
  sol.inverse_iterations = pairs.max_inverse_iterations;
  for (const auto& v : pairs.vectors) {
    std::vector<double> full(n, 0.0);
    std::copy(v.begin(), v.end(), full.begin() + 1);
    double norm = 0.0;
    for (double y : full) norm += y * y;
    norm = std::sqrt(norm * h);
    const auto first = std::find_if(full.begin(), full.end(), [](double y) { return y != 0.0; });
    const double sign = (first != full.end() && *first < 0.0) ? -1.0 : 1.0;
    for (double& y : full) y *= sign / norm;
    sol.vectors.push_back(std::move(full));
  }
  fd = std::move(sol);
}

double PiecewiseImpl::wronskian(double energy) const {
  Cauchy left{0.0, 1.0};
  for (std::size_t s = 0; s < match_; ++s) {
    left = propagate(left, local_wave(energy, pieces_[s].potential, units), pieces_[s].hi - pieces_[s].lo);
  }
  Cauchy right{0.0, -1.0};
  for (std::size_t s = pieces_.size(); s-- > match_;) {
    right = propagate(right, local_wave(energy, pieces_[s].potential, units), pieces_[s].lo - pieces_[s].hi);
  }
  return left.value * right.slope - left.slope * right.value;
}

std::vector<PieceState> PiecewiseImpl::eigenfunction(double energy) const {
  std::vector<PieceState> st(pieces_.size());
  Cauchy left{0.0, 1.0};
  for (std::size_t s = 0; s < match_; ++s) {
    const LocalWave w = local_wave(energy, pieces_[s].potential, units);
    st[s].wave = w;
    st[s].at_lo = left;
    left = propagate(left, w, pieces_[s].hi - pieces_[s].lo);
    st[s].at_hi = left;
  }
  Cauchy right{0.0, -1.0};
  for (std::size_t s = pieces_.size(); s-- > match_;) {
    const LocalWave w = local_wave(energy, pieces_[s].potential, units);
    st[s].wave = w;
    st[s].at_hi = right;
    right = propagate(right, w, pieces_[s].lo - pieces_[s].hi);
    st[s].at_lo = right;
  }
  // Scale the right branch onto the left one at the matching point.
  const LocalWave wm = local_wave(energy, pieces_[match_].potential, units);
  const double scale = wm.rate + 1.0 / domain.width();
  const double s2 = scale * scale;
  const double ratio = (left.value * right.value + left.slope * right.slope / s2) /
                       (right.value * right.value + right.slope * right.slope / s2);
  for (std::size_t s = match_; s < pieces_.size(); ++s) {
    st[s].at_lo = {st[s].at_lo.value * ratio, st[s].at_lo.slope * ratio};
    st[s].at_hi = {st[s].at_hi.value * ratio, st[s].at_hi.slope * ratio};
  }

  const GaussLegendre rule(20);
  double norm = 0.0;
  for (std::size_t s = 0; s < pieces_.size(); ++s) {
    const Piece& p = pieces_[s];
    const std::size_t sub = 1 + static_cast<std::size_t>(std::ceil((p.hi - p.lo) * st[s].wave.rate));
    const double step = (p.hi - p.lo) / static_cast<double>(sub);
    for (std::size_t q = 0; q < sub; ++q) {
      const double a = p.lo + static_cast<double>(q) * step;
      norm += rule.integrate(
          [&](double x) {
            const double v = propagate(st[s].at_lo, st[s].wave, x - p.lo).value;
            return v * v;
          },
          a, a + step);
    }
  }
  const double inv = 1.0 / std::sqrt(norm);
  for (PieceState& ps : st) {
    ps.at_lo = {ps.at_lo.value * inv, ps.at_lo.slope * inv};
    ps.at_hi = {ps.at_hi.value * inv, ps.at_hi.slope * inv};
  }
  return st;
}

void PiecewiseImpl::refine(std::size_t count) {
  const std::vector<double>& approx = fd->energies;
  energies.resize(count);
  states_.clear();
  for (std::size_t k = 0; k < count; ++k) {
    double gap = std::numeric_limits<double>::infinity();
    if (k > 0) gap = std::min(gap, approx[k] - approx[k - 1]);
    if (k + 1 < approx.size()) gap = std::min(gap, approx[k + 1] - approx[k]);
    if (!std::isfinite(gap)) gap = std::max(1.0, std::abs(approx[k]));
    double lo = approx[k] - 0.45 * gap;
    double hi = approx[k] + 0.45 * gap;
    double wlo = wronskian(lo);
    const double whi = wronskian(hi);
    if (!(wlo * whi < 0.0)) {
      throw NumericError("no sign change of the matching Wronskian around level " +
                         std::to_string(k) + " (finite-difference estimate " +
                         std::to_string(approx[k]) + ")");
    }
    for (int iter = 0; iter < 200; ++iter) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      const double wm = wronskian(mid);
      if (wm == 0.0) {
        lo = hi = mid;
        break;
      }
      if ((wm < 0.0) == (wlo < 0.0)) {
        lo = mid;
        wlo = wm;
      } else {
        hi = mid;
      }
    }
    energies[k] = 0.5 * (lo + hi);
    states_.push_back(eigenfunction(energies[k]));
  }
}

double integrate_pieces(const EigenBasis& basis, double rate,
                        const std::function<double(double)>& f) {
  const GaussLegendre rule(20);
  const auto bp = basis.breakpoints();
  double sum = 0.0;
  for (std::size_t p = 0; p + 1 < bp.size(); ++p) {
    const double len = bp[p + 1] - bp[p];
    const std::size_t sub = 1 + static_cast<std::size_t>(std::ceil(len * rate));
    const double step = len / static_cast<double>(sub);
    for (std::size_t q = 0; q < sub; ++q) {
      const double a = bp[p] + static_cast<double>(q) * step;
      sum += rule.integrate(f, a, a + step);
    }
  }
  return sum;
}

}  // namespace

// ---------------------------------------------------------------------------

EigenBasis::EigenBasis(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

std::size_t EigenBasis::size() const noexcept { return impl_->energies.size(); }
std::span<const double> EigenBasis::energies() const noexcept { return impl_->energies; }
const Interval& EigenBasis::domain() const noexcept { return impl_->domain; }
std::span<const double> EigenBasis::breakpoints() const noexcept { return impl_->breakpoints; }
const PotentialSpec& EigenBasis::potential_spec() const noexcept { return impl_->spec; }
const Units& EigenBasis::units() const noexcept { return impl_->units; }
double EigenBasis::potential(double x) const { return impl_->potential(x); }

double EigenBasis::energy(std::size_t i) const {
  if (i >= size()) throw InvalidParameter("eigenstate index out of range");
  return impl_->energies[i];
}

void EigenBasis::evaluate(double x, std::span<double> phi, std::span<double> dphi) const {
  impl_->evaluate(x, phi, dphi);
}

double EigenBasis::phi(std::size_t i, double x) const {
  if (i >= size()) throw InvalidParameter("eigenstate index out of range");
  std::vector<double> v(i + 1), d(i + 1);
  impl_->evaluate(x, v, d);
  return v[i];
}

double EigenBasis::dphi(std::size_t i, double x) const {
  if (i >= size()) throw InvalidParameter("eigenstate index out of range");
  std::vector<double> v(i + 1), d(i + 1);
  impl_->evaluate(x, v, d);
  return d[i];
}

double EigenBasis::d2phi(std::size_t i, double x) const {
  const Units& u = units();
  return 2.0 * u.mass / (u.hbar * u.hbar) * (potential(x) - energy(i)) * phi(i, x);
}

const FiniteDifferenceSolution* EigenBasis::finite_difference() const noexcept {
  return impl_->fd ? &*impl_->fd : nullptr;
}

EigenBasis build_infinite_well(double width, std::size_t count, Units units) {
  require_units(units);
  if (!(width > 0.0) || !std::isfinite(width)) throw InvalidParameter("well width must be positive");
  if (count == 0) throw InvalidParameter("basis needs at least one state");
  return EigenBasis(std::make_shared<WellImpl>(width, count, units));
}

EigenBasis build_harmonic(double mass, double angular_frequency, std::size_t count, double hbar) {
  require_units({hbar, mass});
  if (!(angular_frequency > 0.0) || !std::isfinite(angular_frequency)) {
    throw InvalidParameter("oscillator frequency must be positive");
  }
  if (count == 0) throw InvalidParameter("basis needs at least one state");
  if (count > kMaxHarmonicStates) {
    throw CapabilityError("harmonic basis supports at most " + std::to_string(kMaxHarmonicStates) +
                          " states, requested " + std::to_string(count));
  }
  return EigenBasis(std::make_shared<HarmonicImpl>(mass, angular_frequency, count, hbar));
}

EigenBasis build_numeric(const PiecewiseBox& box, std::size_t grid_points, std::size_t count,
                         Units units) {
  require_units(units);
  if (!(box.domain.lo < box.domain.hi) || !std::isfinite(box.domain.lo) ||
      !std::isfinite(box.domain.hi)) {
    throw InvalidParameter("piecewise box needs lo < hi");
  }
  if (box.segments.empty()) throw InvalidParameter("piecewise box needs at least one segment");
  double cursor = box.domain.lo;
  for (const Segment& s : box.segments) {
    if (s.lo != cursor) throw InvalidParameter("segments must tile the domain without gaps or overlaps");
    if (!(s.hi > s.lo) || !std::isfinite(s.value)) throw InvalidParameter("invalid segment");
    cursor = s.hi;
  }
  if (cursor != box.domain.hi) throw InvalidParameter("segments must end at the right wall");
  if (grid_points < 512) throw InvalidParameter("numeric basis needs at least 512 grid points");
  if (count == 0) throw InvalidParameter("basis needs at least one state");
  if (count >= grid_points / 8) throw InvalidParameter("state count must be below grid_points / 8");
  return EigenBasis(std::make_shared<PiecewiseImpl>(box, grid_points, count, units));
}

EigenBasis build_basis(const PotentialSpec& spec, std::size_t count, Units units,
                       std::size_t grid_points) {
  return std::visit(
      [&](const auto& p) -> EigenBasis {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, InfiniteWell>) {
          return build_infinite_well(p.width, count, units);
        } else if constexpr (std::is_same_v<T, Harmonic>) {
          return build_harmonic(p.mass, p.angular_frequency, count, units.hbar);
        } else {
          return build_numeric(p, grid_points, count, units);
        }
      },
      spec);
}

std::vector<double> overlap_matrix(const EigenBasis& basis) {
  const std::size_t n = basis.size();
  const Units& u = basis.units();
  double vmin = std::numeric_limits<double>::infinity();
  const auto bp = basis.breakpoints();
  for (std::size_t p = 0; p + 1 < bp.size(); ++p) {
    vmin = std::min(vmin, basis.potential(0.5 * (bp[p] + bp[p + 1])));
  }
  vmin = std::min(vmin, 0.0);
  const double rate =
      std::sqrt(2.0 * u.mass * (basis.energies().back() - vmin)) / u.hbar + 1.0;
  std::vector<double> gram(n * n, 0.0);
  std::vector<double> phi(n), dphi(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double v = integrate_pieces(basis, 2.0 * rate, [&](double x) {
        basis.evaluate(x, phi, dphi);
        return phi[i] * phi[j];
      });
      gram[i * n + j] = v;
      gram[j * n + i] = v;
    }
  }
  return gram;
}

std::size_t count_nodes(const EigenBasis& basis, std::size_t i, std::size_t samples) {
  const Interval d = basis.domain();
  std::vector<double> phi(i + 1), dphi(i + 1);
  std::size_t changes = 0;
  double prev = 0.0;
  for (std::size_t s = 1; s < samples; ++s) {
    const double x = d.lo + d.width() * static_cast<double>(s) / static_cast<double>(samples);
    basis.evaluate(x, phi, dphi);
    const double v = phi[i];
    if (v == 0.0) continue;
    if (prev != 0.0 && (v < 0.0) != (prev < 0.0)) ++changes;
    prev = v;
  }
  return changes;
}

}  // namespace quasibohm
