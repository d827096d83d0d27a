#include "quasibohm/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "quasibohm/errors.hpp"

namespace quasibohm {

GaussLegendre::GaussLegendre(std::size_t points) : nodes_(points), weights_(points) {
  if (points == 0) throw InvalidParameter("Gauss-Legendre rule needs at least one point");
  const std::size_t n = points;
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
    // Chebyshev-like initial guess for the i-th root, descending from +1.
    double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = 0.0;
      for (std::size_t k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * static_cast<double>(k) - 1.0) * z * p1 - (static_cast<double>(k) - 1.0) * p2) /
             static_cast<double>(k);
      }
      dp = static_cast<double>(n) * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    nodes_[i] = -z;
    nodes_[n - 1 - i] = z;
    weights_[i] = w;
    weights_[n - 1 - i] = w;
  }
  if (n % 2 == 1) nodes_[n / 2] = 0.0;
}

}  // namespace quasibohm
