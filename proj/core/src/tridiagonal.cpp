#include "quasibohm/tridiagonal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "quasibohm/errors.hpp"

namespace quasibohm {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

struct Gershgorin {
  double lo;
  double hi;
  double norm;
};

Gershgorin gershgorin(std::span<const double> diag, std::span<const double> off) {
  const std::size_t n = diag.size();
  Gershgorin g{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(), 0.0};
  for (std::size_t i = 0; i < n; ++i) {
    double r = 0.0;
    if (i > 0) r += std::abs(off[i - 1]);
    if (i + 1 < n) r += std::abs(off[i]);
    g.lo = std::min(g.lo, diag[i] - r);
    g.hi = std::max(g.hi, diag[i] + r);
    g.norm = std::max(g.norm, std::abs(diag[i]) + r);
  }
  return g;
}

// LU factorization of (T - shift I) with partial pivoting, LAPACK dgttrf layout.
class ShiftedTridiagonalLU {
 public:
  ShiftedTridiagonalLU(std::span<const double> diag, std::span<const double> off, double shift,
                       double pivot_floor)
      : n_(diag.size()),
        dl_(off.begin(), off.end()),
        d_(n_),
        du_(off.begin(), off.end()),
        du2_(n_ > 2 ? n_ - 2 : 0, 0.0),
        swapped_(n_ > 1 ? n_ - 1 : 0, false) {
    for (std::size_t i = 0; i < n_; ++i) d_[i] = diag[i] - shift;
    for (std::size_t i = 0; i + 1 < n_; ++i) {
      if (std::abs(d_[i]) >= std::abs(dl_[i])) {
        if (d_[i] != 0.0) {
          const double fact = dl_[i] / d_[i];
          dl_[i] = fact;
          d_[i + 1] -= fact * du_[i];
        } else {
          dl_[i] = 0.0;
        }
      } else {
        const double fact = d_[i] / dl_[i];
        d_[i] = dl_[i];
        dl_[i] = fact;
        const double temp = du_[i];
        du_[i] = d_[i + 1];
        d_[i + 1] = temp - fact * d_[i + 1];
        if (i + 2 < n_) {
          du2_[i] = du_[i + 1];
          du_[i + 1] = -fact * du_[i + 1];
        }
        swapped_[i] = true;
      }
    }
    // Exact singularity happens when the shift equals an eigenvalue to the bit.
    for (double& p : d_) {
      if (std::abs(p) < pivot_floor) p = std::copysign(pivot_floor, p == 0.0 ? 1.0 : p);
    }
  }

  void solve(std::vector<double>& b) const {
    for (std::size_t i = 0; i + 1 < n_; ++i) {
      if (swapped_[i]) std::swap(b[i], b[i + 1]);
      b[i + 1] -= dl_[i] * b[i];
    }
    b[n_ - 1] /= d_[n_ - 1];
    if (n_ > 1) b[n_ - 2] = (b[n_ - 2] - du_[n_ - 2] * b[n_ - 1]) / d_[n_ - 2];
    for (std::size_t k = n_ >= 2 ? n_ - 2 : 0; k-- > 0;) {
      b[k] = (b[k] - du_[k] * b[k + 1] - du2_[k] * b[k + 2]) / d_[k];
    }
  }

 private:
  std::size_t n_;
  std::vector<double> dl_;
  std::vector<double> d_;
  std::vector<double> du_;
  std::vector<double> du2_;
  std::vector<bool> swapped_;
};

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void normalize(std::vector<double>& v) {
  const double nrm = std::sqrt(dot(v, v));
  for (double& x : v) x /= nrm;
}

double residual_norm(std::span<const double> diag, std::span<const double> off,
                     const std::vector<double>& v, double lambda) {
  const std::size_t n = diag.size();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double r = (diag[i] - lambda) * v[i];
    if (i > 0) r += off[i - 1] * v[i - 1];
    if (i + 1 < n) r += off[i] * v[i + 1];
    s += r * r;
  }
  return std::sqrt(s);
}

}  // namespace

std::size_t sturm_count(std::span<const double> diag, std::span<const double> off, double shift) {
  const double pivmin = std::numeric_limits<double>::min() * 4.0;
  std::size_t count = 0;
  double q = 1.0;
  for (std::size_t i = 0; i < diag.size(); ++i) {
    const double coupling = i == 0 ? 0.0 : off[i - 1] * off[i - 1] / q;
    q = diag[i] - shift - coupling;
    if (std::abs(q) < pivmin) q = -pivmin;
    if (q < 0.0) ++count;
  }
  return count;
}

TridiagonalEigenpairs lowest_eigenpairs(std::span<const double> diag, std::span<const double> off,
                                        std::size_t count) {
  const std::size_t n = diag.size();
  if (n == 0 || off.size() + 1 != n) {
    throw InvalidParameter("tridiagonal matrix needs n diagonal and n-1 off-diagonal entries");
  }
  if (count == 0 || count > n) throw InvalidParameter("eigenpair count must lie in [1, n]");

  const Gershgorin g = gershgorin(diag, off);
  TridiagonalEigenpairs out;
  out.values.reserve(count);
  out.vectors.reserve(count);

  for (std::size_t k = 0; k < count; ++k) {
    double lo = g.lo;
    double hi = g.hi;
    for (int iter = 0; iter < 200; ++iter) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (sturm_count(diag, off, mid) > k) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    out.values.push_back(0.5 * (lo + hi));
  }

  const double ortho_window = 1e-3 * g.norm;
  const double target = 1e-10 * g.norm;
  const int max_iterations = 30;
  for (std::size_t k = 0; k < count; ++k) {
    const double lambda = out.values[k];
    const ShiftedTridiagonalLU lu(diag, off, lambda, kEps * g.norm);
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
      v[i] = 1.0 + 0.5 * std::sin(0.7 * static_cast<double>(i) + static_cast<double>(k));
    }
    normalize(v);
    int iterations = 0;
    double residual = std::numeric_limits<double>::infinity();
    while (iterations < max_iterations) {
      ++iterations;
      lu.solve(v);
      for (std::size_t j = 0; j < k; ++j) {
        if (lambda - out.values[j] > ortho_window) continue;
        const double proj = dot(v, out.vectors[j]);
        for (std::size_t i = 0; i < n; ++i) v[i] -= proj * out.vectors[j][i];
      }
      normalize(v);
      residual = residual_norm(diag, off, v, lambda);
      if (residual <= target && iterations >= 2) break;
    }
    if (residual > target) {
      throw NumericError("inverse iteration did not converge for eigenpair " + std::to_string(k) +
                         " after " + std::to_string(iterations) +
                         " iterations (residual " + std::to_string(residual) + ")");
    }
    out.max_inverse_iterations = std::max(out.max_inverse_iterations, iterations);
    out.vectors.push_back(std::move(v));
  }
  return out;
}

}  // namespace quasibohm
