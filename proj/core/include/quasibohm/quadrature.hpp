#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace quasibohm {

/// Gauss-Legendre rule on [-1, 1]; nodes by Newton iteration on P_n.
class GaussLegendre {
 public:
  explicit GaussLegendre(std::size_t points);

  std::size_t size() const noexcept { return nodes_.size(); }
  std::span<const double> nodes() const noexcept { return nodes_; }
  std::span<const double> weights() const noexcept { return weights_; }

  /// Integrates f over [a, b].
  template <class F>
  double integrate(F&& f, double a, double b) const {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    double sum = 0.0;
    for (std::size_t k = 0; k < nodes_.size(); ++k) {
      sum += weights_[k] * f(mid + half * nodes_[k]);
    }
    return half * sum;
  }

 private:
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

}  // namespace quasibohm
