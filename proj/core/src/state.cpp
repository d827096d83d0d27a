#include "quasibohm/state.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "quasibohm/errors.hpp"

namespace quasibohm {
namespace {

constexpr std::size_t kBlock = 64;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double reduce_angle(double y) {
  double r = std::fmod(y, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

}  // namespace

NodeProximity::NodeProximity(double x, double t, double density)
    : Error("density " + std::to_string(density) + " below node threshold at x = " +
            std::to_string(x) + ", t = " + std::to_string(t)),
      x_(x),
      t_(t),
      density_(density) {}

PhaseVector::PhaseVector(std::vector<double> angles) : angles_(std::move(angles)) {
  for (double& y : angles_) {
    if (!std::isfinite(y)) throw InvalidParameter("phase angles must be finite");
    y = reduce_angle(y);
  }
}

// ---------------------------------------------------------------------------

SuperpositionState::SuperpositionState(EigenBasis basis, std::vector<Complex> coefficients,
                                       StateOptions options)
    : basis_(std::move(basis)), coefficients_(std::move(coefficients)), options_(options) {
  if (coefficients_.empty()) throw InvalidParameter("superposition needs at least one coefficient");
  if (coefficients_.size() > basis_.size()) {
    throw InvalidParameter("superposition has " + std::to_string(coefficients_.size()) +
                           " coefficients but the basis holds " + std::to_string(basis_.size()) +
                           " states");
  }
  if (coefficients_.size() > kMaxTerms) {
    throw CapabilityError("superposition supports at most " + std::to_string(kMaxTerms) + " terms");
  }
  if (!(options_.node_epsilon > 0.0)) throw InvalidParameter("node epsilon must be positive");
  if (options_.cdf_panels < kBlock) {
    throw InvalidParameter("cdf table needs at least " + std::to_string(kBlock) + " panels");
  }
  double norm = 0.0;
  for (const Complex& a : coefficients_) {
    if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) {
      throw InvalidParameter("coefficients must be finite");
    }
    norm += std::norm(a);
  }
  if (!(norm > 0.0)) throw InvalidParameter("coefficient vector must be nonzero");
  const double inv = 1.0 / std::sqrt(norm);
  for (Complex& a : coefficients_) a *= inv;

  const double hbar = basis_.units().hbar;
  const auto energies = basis_.energies();
  for (std::size_t i = 1; i < coefficients_.size(); ++i) {
    frequencies_.push_back((energies[i] - energies[0]) / hbar);
  }
  build_table();
}

void SuperpositionState::build_table() {
  const auto bp = basis_.breakpoints();
  const double width = domain().width();
  const std::size_t target = options_.cdf_panels;
  edges_.clear();
  edges_.push_back(bp.front());
  for (std::size_t p = 0; p + 1 < bp.size(); ++p) {
    const double len = bp[p + 1] - bp[p];
    const auto panels = std::max<std::size_t>(
        2, static_cast<std::size_t>(std::llround(static_cast<double>(target) * len / width)));
    for (std::size_t q = 1; q < panels; ++q) {
      edges_.push_back(bp[p] + len * static_cast<double>(q) / static_cast<double>(panels));
    }
    edges_.push_back(bp[p + 1]);
  }

  const std::size_t n = terms();
  const std::size_t panels = edges_.size() - 1;
  const std::size_t nodes = 2 * panels + 1;
  node_phi_.assign(nodes * n, 0.0);
  std::vector<double> dphi(n);
  for (std::size_t k = 0; k < nodes; ++k) {
    const double x = (k % 2 == 0) ? edges_[k / 2] : 0.5 * (edges_[k / 2] + edges_[k / 2 + 1]);
    basis_.evaluate(x, std::span<double>(node_phi_.data() + k * n, n), dphi);
  }

  pair_count_ = n * (n + 1) / 2;
  const std::size_t blocks = (panels + kBlock - 1) / kBlock;
  block_pairs_.assign((blocks + 1) * pair_count_, 0.0);
  std::vector<double> running(pair_count_, 0.0);
  for (std::size_t q = 0; q < panels; ++q) {
    const double h = edges_[q + 1] - edges_[q];
    const double* f0 = node_phi_.data() + (2 * q) * n;
    const double* fm = f0 + n;
    const double* f1 = fm + n;
    std::size_t pair = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i; j < n; ++j, ++pair) {
        running[pair] += h / 6.0 * (f0[i] * f0[j] + 4.0 * fm[i] * fm[j] + f1[i] * f1[j]);
      }
    }
    if ((q + 1) % kBlock == 0 || q + 1 == panels) {
      const std::size_t b = (q + kBlock) / kBlock;
      std::copy(running.begin(), running.end(), block_pairs_.begin() + b * pair_count_);
    }
  }
}

Snapshot SuperpositionState::at(double t) const {
  if (!std::isfinite(t)) throw InvalidParameter("time must be finite");
  Snapshot s(*this, t);
  s.terms_ = terms();
  const auto energies = basis_.energies();
  const double hbar = basis_.units().hbar;
  for (std::size_t i = 0; i < s.terms_; ++i) {
    const double phase = -energies[i] * t / hbar;
    s.c_[i] = coefficients_[i] * Complex(std::cos(phase), std::sin(phase));
  }
  return s;
}

Snapshot SuperpositionState::at(const PhaseVector& phases) const {
  if (phases.size() != frequency_count()) {
    throw InvalidParameter("phase vector has " + std::to_string(phases.size()) +
                           " angles, state has " + std::to_string(frequency_count()) +
                           " frequencies");
  }
  Snapshot s(*this, std::numeric_limits<double>::quiet_NaN());
  s.terms_ = terms();
  s.c_[0] = coefficients_[0];
  for (std::size_t i = 1; i < s.terms_; ++i) {
    const double y = phases[i - 1];
    s.c_[i] = coefficients_[i] * Complex(std::cos(y), -std::sin(y));
  }
  return s;
}

PhaseVector SuperpositionState::phases_at(double t) const {
  std::vector<double> y(frequencies_.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = frequencies_[i] * t;
  return PhaseVector(std::move(y));
}

// ---------------------------------------------------------------------------

void Snapshot::check_domain(double x) const {
  const Interval& d = state_->domain();
  if (!(x >= d.lo && x <= d.hi)) {
    throw DomainError("x = " + std::to_string(x) + " outside [" + std::to_string(d.lo) + ", " +
                          std::to_string(d.hi) + "]",
                      x);
  }
}

Amplitude Snapshot::jet(double x) const {
  check_domain(x);
  const EigenBasis& basis = state_->basis();
  std::array<double, kMaxTerms> phi{};
  std::array<double, kMaxTerms> dphi{};
  basis.evaluate(x, std::span<double>(phi.data(), terms_), std::span<double>(dphi.data(), terms_));
  const Units& u = basis.units();
  const double curvature = 2.0 * u.mass / (u.hbar * u.hbar);
  const double v = basis.potential(x);
  const auto energies = basis.energies();
  Amplitude a{};
  for (std::size_t i = 0; i < terms_; ++i) {
    a.value += c_[i] * phi[i];
    a.d1 += c_[i] * dphi[i];
    a.d2 += c_[i] * (curvature * (v - energies[i]) * phi[i]);
  }
  return a;
}

Complex Snapshot::psi(double x) const { return jet(x).value; }

double Snapshot::density(double x) const { return std::norm(jet(x).value); }

double Snapshot::node_guard(double x, const Amplitude& a) const {
  const double rho = std::norm(a.value);
  if (!(rho >= state_->options().node_epsilon)) throw NodeProximity(x, time_, rho);
  return rho;
}

double Snapshot::velocity(double x) const {
  const Amplitude a = jet(x);
  const double rho = node_guard(x, a);
  if (terms_ == 1) return 0.0;
  const Units& u = state_->basis().units();
  return u.hbar / u.mass * (a.d1 * std::conj(a.value)).imag() / rho;
}

double Snapshot::velocity_gradient(double x) const {
  const Amplitude a = jet(x);
  node_guard(x, a);
  if (terms_ == 1) return 0.0;
  const Units& u = state_->basis().units();
  const Complex log1 = a.d1 / a.value;
  return u.hbar / u.mass * (a.d2 / a.value - log1 * log1).imag();
}

FlowJet Snapshot::flow(double x) const {
  const Amplitude a = jet(x);
  const double rho = node_guard(x, a);
  if (terms_ == 1) return {0.0, 0.0, rho};
  const Units& u = state_->basis().units();
  const Complex log1 = a.d1 / a.value;
  const double scale = u.hbar / u.mass;
  return {scale * (a.d1 * std::conj(a.value)).imag() / rho, scale * (a.d2 / a.value - log1 * log1).imag(),
          rho};
}

void Snapshot::pair_weights(std::span<double> w) const {
  std::size_t pair = 0;
  for (std::size_t i = 0; i < terms_; ++i) {
    for (std::size_t j = i; j < terms_; ++j, ++pair) {
      const double re = (std::conj(c_[i]) * c_[j]).real();
      w[pair] = i == j ? re : 2.0 * re;
    }
  }
}

double Snapshot::node_density(std::size_t node) const {
  const double* f = state_->node_phi_.data() + node * terms_;
  Complex s{};
  for (std::size_t i = 0; i < terms_; ++i) s += c_[i] * f[i];
  return std::norm(s);
}

double Snapshot::panel_mass(std::size_t panel) const {
  const auto& e = state_->edges_;
  const double h = e[panel + 1] - e[panel];
  return h / 6.0 *
         (node_density(2 * panel) + 4.0 * node_density(2 * panel + 1) + node_density(2 * panel + 2));
}

double Snapshot::block_mass(std::size_t block, std::span<const double> w) const {
  const double* row = state_->block_pairs_.data() + block * state_->pair_count_;
  double s = 0.0;
  for (std::size_t p = 0; p < state_->pair_count_; ++p) s += w[p] * row[p];
  return s;
}

// Simpson over [edge(panel), x] with x inside the panel.
double Snapshot::partial_mass(std::size_t panel, double x) const {
  const double a = state_->edges_[panel];
  if (x <= a) return 0.0;
  const double mid = 0.5 * (a + x);
  return (x - a) / 6.0 * (node_density(2 * panel) + 4.0 * std::norm(jet(mid).value) +
                          std::norm(jet(x).value));
}

double Snapshot::cdf(double x) const {
  check_domain(x);
  const auto& e = state_->edges_;
  const std::size_t panels = e.size() - 1;
  const auto it = std::upper_bound(e.begin(), e.end(), x);
  std::size_t panel = it == e.begin() ? 0 : static_cast<std::size_t>(it - e.begin()) - 1;
  panel = std::min(panel, panels - 1);
  std::array<double, kMaxTerms*(kMaxTerms + 1) / 2> w{};
  pair_weights(w);
  const std::size_t block = panel / kBlock;
  double h = block_mass(block, w);
  for (std::size_t q = block * kBlock; q < panel; ++q) h += panel_mass(q);
  return h + partial_mass(panel, x);
}

double Snapshot::cdf_inverse(double p) const {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw InvalidParameter("probability " + std::to_string(p) + " outside [0, 1]");
  }
  const auto& e = state_->edges_;
  const Interval& d = state_->domain();
  if (p == 0.0) return d.lo;
  const std::size_t panels = e.size() - 1;
  const std::size_t blocks = (panels + kBlock - 1) / kBlock;
  std::array<double, kMaxTerms*(kMaxTerms + 1) / 2> w{};
  pair_weights(w);
  if (p > block_mass(blocks, w)) return d.hi;

  // Largest block boundary with mass < p.
  std::size_t lo = 0;
  std::size_t hi = blocks;
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    if (block_mass(mid, w) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  double acc = block_mass(lo, w);
  const std::size_t first = lo * kBlock;
  const std::size_t last = std::min(panels, first + kBlock);
  std::size_t panel = last - 1;
  double mass = 0.0;
  for (std::size_t q = first; q < last; ++q) {
    mass = panel_mass(q);
    if (acc + mass >= p || q + 1 == last) {
      panel = q;
      break;
    }
    acc += mass;
  }

  const double target = p - acc;
  double a = e[panel];
  double b = e[panel + 1];
  if (!(mass > 0.0) || target >= mass) return target >= mass ? b : a;
  double x = a + (b - a) * (target / mass);
  for (int iter = 0; iter < 100; ++iter) {
    const double g = partial_mass(panel, x) - target;
    if (g < 0.0) {
      a = x;
    } else {
      b = x;
    }
    if (g == 0.0 || b - a <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x))) {
      break;
    }
    const double rho = std::norm(jet(x).value);
    double next = rho > 0.0 ? x - g / rho : 0.5 * (a + b);
    if (!(next > a && next < b)) next = 0.5 * (a + b);
    if (next == x) break;
    x = next;
  }
  return x;
}

}  // namespace quasibohm
