#pragma once

#include "mcmetrics/matrix.hpp"

#include <cstddef>
#include <vector>

namespace mcmetrics {

struct SymmetricEigen {
  std::size_t n = 0;
  /// Ascending.
  std::vector<double> values;
  /// Row-major n x n; column k is the unit eigenvector for values[k]. Empty
  /// when vectors were not requested.
  std::vector<double> vectors;
  std::size_t sweeps = 0;
};

struct JacobiOptions {
  /// Converged once the off-diagonal Frobenius norm drops below
  /// rel_tol * ||A||_F.
  double rel_tol = 1e-12;
  std::size_t max_sweeps = 100;
  bool want_vectors = true;
};

/// Cyclic Jacobi eigensolver for a symmetric matrix given as row-major data.
/// Only the upper triangle is trusted; it is mirrored before iterating.
/// Deterministic for fixed input. Throws NumericalError if not converged
/// within max_sweeps.
SymmetricEigen symmetric_eigen(std::vector<double> a, std::size_t n, const JacobiOptions& options = {});
SymmetricEigen symmetric_eigen(const Matrix& a, const JacobiOptions& options = {});

/// Singular values (descending) of a row-major rows x cols matrix by
/// one-sided Jacobi: rows are rotated pairwise until every pair is
/// orthogonal to within rel_tol (as a cosine). Small singular values keep
/// absolute accuracy near eps * ||A||_F. Throws NumericalError if not
/// converged within max_sweeps.
std::vector<double> singular_values(std::vector<double> a, std::size_t rows, std::size_t cols,
                                    const JacobiOptions& options = {});

double frobenius_norm(std::span<const double> a) noexcept;

} // namespace mcmetrics
