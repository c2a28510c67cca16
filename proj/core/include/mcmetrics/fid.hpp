#pragma once

#include "mcmetrics/matrix.hpp"
#include "mcmetrics/stats.hpp"

namespace mcmetrics::fid {

inline constexpr double kDefaultClampTol = 1e-10;
inline constexpr double kDefaultTraceJitter = 0.0;

/// Principal square root of a symmetric positive semi-definite matrix via
/// its eigendecomposition. Eigenvalues below clamp_tol are treated as 0.
///
/// Throws InputError if `a` is not square or not symmetric within 1e-8, and
/// NumericalError if an eigenvalue is below -1e-6 * ||a||_F.
Matrix sqrtm_psd(const Matrix& a, double clamp_tol = kDefaultClampTol);

/// Tr((c1 c2)^{1/2}), i.e. Tr((S c2 S)^{1/2}) with S = sqrtm_psd(c1 + jitter * I),
/// evaluated as the sum of singular values of S c2^{1/2}. A nonzero jitter
/// adds about sqrt(jitter) per null direction of c1, so the result is then no
/// longer symmetric in its arguments.
double trace_sqrt_product(const Matrix& c1, const Matrix& c2, double jitter = kDefaultTraceJitter);

struct FrechetOptions {
  // Added to the first covariance's diagonal before taking its root. Zero
  // keeps d(g, g) at round-off level; raise it for badly conditioned,
  // few-sample covariances.
  double jitter = 0.0;
};

/// ||m1 - m2||^2 + Tr(C1 + C2 - 2 (C1 C2)^{1/2}). Results in (-1e-6, 0) are
/// clamped to 0; anything more negative is a NumericalError.
double frechet_distance(const GaussianSummary& g1, const GaussianSummary& g2,
                        const FrechetOptions& options = {});

} // namespace mcmetrics::fid
