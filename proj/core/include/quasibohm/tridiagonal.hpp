#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace quasibohm {

/// Lowest eigenpairs of a real symmetric tridiagonal matrix.
struct TridiagonalEigenpairs {
  std::vector<double> values;                // ascending
  std::vector<std::vector<double>> vectors;  // unit 2-norm
  int max_inverse_iterations = 0;            // worst case over the returned vectors
};

/// Number of eigenvalues strictly below `shift` (Sturm sequence count).
std::size_t sturm_count(std::span<const double> diag, std::span<const double> off, double shift);

/// Lowest `count` eigenpairs by Sturm bisection and inverse iteration.
/// `off` has diag.size() - 1 entries. Throws NumericError if inverse
/// iteration fails to reach a residual of 1e-10 * ||T||.
TridiagonalEigenpairs lowest_eigenpairs(std::span<const double> diag, std::span<const double> off,
                                        std::size_t count);

}  // namespace quasibohm
