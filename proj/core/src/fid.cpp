#include "mcmetrics/fid.hpp"

#include "mcmetrics/eigen_sym.hpp"
#include "mcmetrics/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mcmetrics::fid {

namespace {

void require_symmetric(const Matrix& a, double tol, const char* what) {
  if (!a.is_square()) throw InputError(std::string(what) + ": matrix is not square");
  const std::size_t n = a.rows();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (std::abs(a(i, j) - a(j, i)) > tol) {
        throw InputError(std::string(what) + ": matrix is not symmetric");
      }
    }
  }
}

std::vector<double> symmetrized(std::span<const double> a, std::size_t n) {
  std::vector<double> out(a.begin(), a.end());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double m = 0.5 * (out[i * n + j] + out[j * n + i]);
      out[i * n + j] = m;
      out[j * n + i] = m;
    }
  }
  return out;
}

void reject_indefinite(double min_eigenvalue, double norm, const char* what) {
  if (min_eigenvalue < -1e-6 * norm) {
    std::ostringstream msg;
    msg.precision(6);
    msg << what << ": matrix is indefinite (eigenvalue " << min_eigenvalue << ", ||A||_F " << norm
        << ")";
    throw NumericalError(msg.str());
  }
}

// out = a * b for n x n row-major matrices.
std::vector<double> multiply(std::span<const double> a, std::span<const double> b, std::size_t n) {
  std::vector<double> out(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double* row = out.data() + i * n;
    for (std::size_t k = 0; k < n; ++k) {
      const double aik = a[i * n + k];
      if (aik == 0.0) continue;
      const double* brow = b.data() + k * n;
      for (std::size_t j = 0; j < n; ++j) row[j] += aik * brow[j];
    }
  }
  return out;
}

} // namespace

Matrix sqrtm_psd(const Matrix& a, double clamp_tol) {
  require_symmetric(a, 1e-8, "sqrtm_psd");
  const std::size_t n = a.rows();
  auto sym = symmetrized(a.data(), n);
  const double norm = frobenius_norm(sym);
  const auto eig = symmetric_eigen(std::move(sym), n);
  reject_indefinite(eig.values.front(), norm, "sqrtm_psd");

  std::vector<double> roots(n);
  for (std::size_t k = 0; k < n; ++k) {
    roots[k] = eig.values[k] < clamp_tol ? 0.0 : std::sqrt(eig.values[k]);
  }

  // V diag(roots) V^T, upper triangle then mirrored.
  std::vector<double> out(n * n, 0.0);
  const auto& v = eig.vectors;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += v[i * n + k] * roots[k] * v[j * n + k];
      out[i * n + j] = s;
      out[j * n + i] = s;
    }
  }
  return Matrix(n, n, std::move(out));
}

double trace_sqrt_product(const Matrix& c1, const Matrix& c2, double jitter) {
  if (c1.rows() != c2.rows() || !c1.is_square() || !c2.is_square()) {
    throw InputError("trace_sqrt_product: covariances must be square with matching size");
  }
  const std::size_t n = c1.rows();

  const Matrix root1 = [&] {
    if (jitter == 0.0) return sqrtm_psd(c1);
    std::vector<double> shifted(c1.data().begin(), c1.data().end());
    for (std::size_t i = 0; i < n; ++i) shifted[i * n + i] += jitter;
    return sqrtm_psd(Matrix(n, n, std::move(shifted)));
  }();
  const Matrix root2 = sqrtm_psd(c2);

  // S1 c2 S1 = (c2^{1/2} S1)^T (c2^{1/2} S1), so the trace of its root is the
  // sum of singular values of S1 c2^{1/2}. Going through singular values
  // avoids square roots of round-off-sized eigenvalues.
  double trace = 0.0;
  for (double sigma : singular_values(multiply(root1.data(), root2.data(), n), n, n)) trace += sigma;
  return trace;
}

double frechet_distance(const GaussianSummary& g1, const GaussianSummary& g2,
                        const FrechetOptions& options) {
  if (g1.dim() != g2.dim() || g1.cov.rows() != g1.dim() || g2.cov.rows() != g2.dim()) {
    throw InputError("frechet_distance: dimension mismatch (" + std::to_string(g1.dim()) + " vs " +
                     std::to_string(g2.dim()) + ")");
  }
  const std::size_t d = g1.dim();
  double mean_term = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double diff = g1.mean[i] - g2.mean[i];
    mean_term += diff * diff;
  }
  double trace_term = 0.0;
  for (std::size_t i = 0; i < d; ++i) trace_term += g1.cov(i, i) + g2.cov(i, i);
  trace_term -= 2.0 * trace_sqrt_product(g1.cov, g2.cov, options.jitter);

  const double result = mean_term + trace_term;
  if (result < 0.0) {
    if (result > -1e-6) return 0.0;
    throw NumericalError("frechet_distance: negative result " + std::to_string(result));
  }
  return result;
}

} // namespace mcmetrics::fid
