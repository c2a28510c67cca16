#pragma once

#include "mcmetrics/matrix.hpp"

#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace mcmetrics {

/// Probability weights over a finite support. Entries are non-negative and
/// sum to 1 within 1e-9.
class Distribution {
public:
  /// Validates without modifying. Throws InputError.
  explicit Distribution(std::vector<double> weights);

  /// Divides non-negative weights by their sum. Throws InputError if the
  /// sum is zero or an entry is negative or non-finite.
  static Distribution normalized(std::span<const double> weights);
  static Distribution from_counts(std::span<const std::size_t> counts);

  std::span<const double> weights() const noexcept { return weights_; }
  std::size_t size() const noexcept { return weights_.size(); }
  double operator[](std::size_t i) const noexcept { return weights_[i]; }
  operator std::span<const double>() const noexcept { return weights_; }

private:
  std::vector<double> weights_;
};

inline constexpr double kDefaultKlEps = 1e-12;

// Divergences are in nats. They accept raw spans so that probability rows
// (which only sum to 1 within 1e-5) can be used without re-validation.

/// sum_i p_i ln(p_i / max(q_i, eps)); p_i = 0 terms contribute 0.
double kl_divergence(std::span<const double> p, std::span<const double> q,
                     double eps = kDefaultKlEps);

/// Jensen-Shannon divergence with the midpoint m = (p + q) / 2, in [0, ln 2].
/// Evaluated term-by-term symmetrically, so js(p, q) == js(q, p) bitwise.
double js_divergence(std::span<const double> p, std::span<const double> q);

/// Pooled two-proportion z statistic for H0: k1/n1 == k2/n2. Returns 0 when
/// the pooled proportion is 0 or 1.
double two_proportion_z(std::size_t k1, std::size_t n1, std::size_t k2, std::size_t n2);

/// Mean and (n - 1)-divisor covariance of a feature distribution.
struct GaussianSummary {
  std::vector<double> mean;
  Matrix cov;
  std::size_t n = 0;

  std::size_t dim() const noexcept { return mean.size(); }
};

/// Column means and unbiased covariance of `features`, rows >= 2. The
/// covariance is exactly symmetric. Throws NumericalError if either overflows.
GaussianSummary gaussian_summary(const Matrix& features);

/// Builds a summary from explicit parameters; checks that cov is square,
/// matches the mean and is symmetric within 1e-10.
GaussianSummary make_gaussian_summary(std::vector<double> mean, Matrix cov, std::size_t n = 0);

enum class Orientation { HigherIsDiverse, LowerIsDiverse };

std::string_view to_string(Orientation o) noexcept;
Orientation orientation_from_string(std::string_view s);

/// Affine map onto [0, 1] where 1 always means "less diverse". Constant input
/// maps to all zeros.
std::vector<double> minmax_scale(std::span<const double> values, Orientation orientation);

/// Spearman rank correlation: Pearson correlation of average ranks. Returns
/// nullopt when either sequence is constant (rho undefined).
std::optional<double> spearman_rho(std::span<const double> xs, std::span<const double> ys);

/// 1-based fractional ranks; ties receive the mean of the ranks they span.
std::vector<double> fractional_ranks(std::span<const double> values);

} // namespace mcmetrics
