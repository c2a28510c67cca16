#include "mcmetrics/eigen_sym.hpp"

#include "mcmetrics/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <string>

namespace mcmetrics {

double frobenius_norm(std::span<const double> a) noexcept {
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

namespace {

double off_diagonal_norm(const std::vector<double>& a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) s += a[i * n + j] * a[i * n + j];
  }
  return std::sqrt(2.0 * s);
}

} // namespace

SymmetricEigen symmetric_eigen(std::vector<double> a, std::size_t n, const JacobiOptions& options) {
  if (n == 0 || a.size() != n * n) throw InputError("symmetric_eigen: expected an n x n matrix");
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) a[j * n + i] = a[i * n + j];
  }

  // Eigenvectors are accumulated transposed (row k of vt is column k of V)
  // so rotations touch two contiguous rows.
  std::vector<double> vt;
  if (options.want_vectors) {
    vt.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) vt[i * n + i] = 1.0;
  }

  const double norm = frobenius_norm(a);
  const double target = options.rel_tol * norm;
  std::size_t sweep = 0;
  for (;; ++sweep) {
    if (off_diagonal_norm(a, n) <= target) break;
    if (sweep == options.max_sweeps) {
      throw NumericalError("Jacobi eigensolver did not converge in " +
                           std::to_string(options.max_sweeps) + " sweeps");
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (apq == 0.0) continue;
        const double app = a[p * n + p];
        const double aqq = a[q * n + q];

        // Rotation angle that annihilates a(p, q); t is the smaller root of
        // t^2 + 2 t theta - 1 = 0.
        const double theta = (aqq - app) / (2.0 * apq);
        double t;
        if (std::abs(theta) > 1e150) {
          t = 0.5 / theta;
        } else {
          t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        }
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const double tau = s / (1.0 + c);

        a[p * n + p] = app - t * apq;
        a[q * n + q] = aqq + t * apq;
        a[p * n + q] = 0.0;
        a[q * n + p] = 0.0;
        double* row_p = a.data() + p * n;
        double* row_q = a.data() + q * n;
        for (std::size_t r = 0; r < n; ++r) {
          if (r == p || r == q) continue;
          const double g = row_p[r];
          const double h = row_q[r];
          const double new_rp = g - s * (h + g * tau);
          const double new_rq = h + s * (g - h * tau);
          row_p[r] = new_rp;
          row_q[r] = new_rq;
          a[r * n + p] = new_rp;
          a[r * n + q] = new_rq;
        }
        if (options.want_vectors) {
          double* vp = vt.data() + p * n;
          double* vq = vt.data() + q * n;
          for (std::size_t r = 0; r < n; ++r) {
            const double g = vp[r];
            const double h = vq[r];
            vp[r] = g - s * (h + g * tau);
            vq[r] = h + s * (g - h * tau);
          }
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return a[x * n + x] < a[y * n + y]; });

  SymmetricEigen out;
  out.n = n;
  out.sweeps = sweep;
  out.values.resize(n);
  for (std::size_t k = 0; k < n; ++k) out.values[k] = a[order[k] * n + order[k]];
  if (options.want_vectors) {
    out.vectors.resize(n * n);
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t k = 0; k < n; ++k) out.vectors[r * n + k] = vt[order[k] * n + r];
    }
  }
  return out;
}

std::vector<double> singular_values(std::vector<double> a, std::size_t rows, std::size_t cols,
                                    const JacobiOptions& options) {
  if (rows == 0 || cols == 0 || a.size() != rows * cols) {
    throw InputError("singular_values: data does not match the given shape");
  }
  const auto dot = [cols](const double* x, const double* y) {
    double s = 0.0;
    for (std::size_t k = 0; k < cols; ++k) s += x[k] * y[k];
    return s;
  };

  // Rows shrunk to round-off relative to the whole matrix cannot be made
  // orthogonal in a relative sense; they contribute at most eps * ||A||_F.
  const double negligible = std::numeric_limits<double>::epsilon() * frobenius_norm(a);
  const double negligible_sq = negligible * negligible;

  std::size_t sweep = 0;
  for (bool rotated = true; rotated; ++sweep) {
    if (sweep == options.max_sweeps) {
      throw NumericalError("one-sided Jacobi did not converge in " + std::to_string(options.max_sweeps) +
                           " sweeps");
    }
    rotated = false;
    for (std::size_t p = 0; p + 1 < rows; ++p) {
      double* rp = a.data() + p * cols;
      for (std::size_t q = p + 1; q < rows; ++q) {
        double* rq = a.data() + q * cols;
        const double alpha = dot(rp, rp);
        const double beta = dot(rq, rq);
        const double gamma = dot(rp, rq);
        if (alpha <= negligible_sq || beta <= negligible_sq) continue;
        if (gamma == 0.0 || std::abs(gamma) <= options.rel_tol * std::sqrt(alpha * beta)) continue;
        rotated = true;

        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t k = 0; k < cols; ++k) {
          const double x = rp[k];
          const double y = rq[k];
          rp[k] = c * x - s * y;
          rq[k] = s * x + c * y;
        }
      }
    }
  }

  std::vector<double> out(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = a.data() + r * cols;
    out[r] = std::sqrt(dot(row, row));
  }
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

SymmetricEigen symmetric_eigen(const Matrix& a, const JacobiOptions& options) {
  if (!a.is_square()) throw InputError("symmetric_eigen: matrix is not square");
  return symmetric_eigen(std::vector<double>(a.data().begin(), a.data().end()), a.rows(), options);
}

} // namespace mcmetrics
