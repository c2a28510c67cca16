#include "mcmetrics/stats.hpp"

#include "mcmetrics/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace mcmetrics {

namespace {

void require_same_support(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) {
    throw InputError("distribution support sizes differ: " + std::to_string(p.size()) + " vs " +
                     std::to_string(q.size()));
  }
}

} // namespace

Distribution::Distribution(std::vector<double> weights) : weights_(std::move(weights)) {
  if (weights_.empty()) throw InputError("distribution support must be non-empty");
  double sum = 0.0;
  for (double w : weights_) {
    if (!std::isfinite(w) || w < 0.0) throw InputError("distribution weights must be finite and >= 0");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw InputError("distribution weights sum to " + std::to_string(sum) + ", expected 1");
  }
}

Distribution Distribution::normalized(std::span<const double> weights) {
  double sum = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) throw InputError("weights must be finite and >= 0");
    sum += w;
  }
  if (!(sum > 0.0)) throw InputError("cannot normalize weights summing to zero");
  std::vector<double> out(weights.begin(), weights.end());
  for (double& w : out) w /= sum;
  return Distribution(std::move(out));
}

Distribution Distribution::from_counts(std::span<const std::size_t> counts) {
  std::vector<double> w(counts.begin(), counts.end());
  return normalized(w);
}

double kl_divergence(std::span<const double> p, std::span<const double> q, double eps) {
  require_same_support(p, q);
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) total += p[i] * std::log(p[i] / std::max(q[i], eps));
  }
  return total;
}

double js_divergence(std::span<const double> p, std::span<const double> q) {
  require_same_support(p, q);
  auto term = [](double a, double m) { return a > 0.0 ? a * std::log(a / m) : 0.0; };
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double m = 0.5 * (p[i] + q[i]);
    // Floating-point addition is commutative, so swapping p and q leaves
    // every term, and therefore the sum, bit-identical.
    total += 0.5 * term(p[i], m) + 0.5 * term(q[i], m);
  }
  return std::max(total, 0.0);
}

double two_proportion_z(std::size_t k1, std::size_t n1, std::size_t k2, std::size_t n2) {
  if (n1 == 0 || n2 == 0) throw InputError("two_proportion_z: sample sizes must be >= 1");
  if (k1 > n1 || k2 > n2) throw InputError("two_proportion_z: successes exceed sample size");
  const double p1 = static_cast<double>(k1) / static_cast<double>(n1);
  const double p2 = static_cast<double>(k2) / static_cast<double>(n2);
  const double pooled = static_cast<double>(k1 + k2) / static_cast<double>(n1 + n2);
  if (pooled <= 0.0 || pooled >= 1.0) return 0.0;
  const double se = std::sqrt(pooled * (1.0 - pooled) *
                              (1.0 / static_cast<double>(n1) + 1.0 / static_cast<double>(n2)));
  return (p1 - p2) / se;
}

GaussianSummary gaussian_summary(const Matrix& features) {
  const std::size_t n = features.rows();
  const std::size_t d = features.cols();
  if (n < 2) throw InputError("gaussian_summary needs at least 2 rows");

  std::vector<double> mean(d, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    auto row = features.row(r);
    for (std::size_t j = 0; j < d; ++j) mean[j] += row[j];
  }
  for (double& m : mean) m /= static_cast<double>(n);

  std::vector<double> cov(d * d, 0.0);
  std::vector<double> centered(d);
  for (std::size_t r = 0; r < n; ++r) {
    auto row = features.row(r);
    for (std::size_t j = 0; j < d; ++j) centered[j] = row[j] - mean[j];
    for (std::size_t i = 0; i < d; ++i) {
      const double ci = centered[i];
      if (ci == 0.0) continue;
      double* out = cov.data() + i * d;
      for (std::size_t j = i; j < d; ++j) out[j] += ci * centered[j];
    }
  }
  const double denom = static_cast<double>(n - 1);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) {
      cov[i * d + j] /= denom;
      cov[j * d + i] = cov[i * d + j];
    }
  }
  const auto finite = [](double v) { return std::isfinite(v); };
  if (!std::all_of(mean.begin(), mean.end(), finite) || !std::all_of(cov.begin(), cov.end(), finite)) {
    throw NumericalError("gaussian_summary: mean or covariance overflowed");
  }
  return GaussianSummary{std::move(mean), Matrix(d, d, std::move(cov)), n};
}

GaussianSummary make_gaussian_summary(std::vector<double> mean, Matrix cov, std::size_t n) {
  if (!cov.is_square() || cov.rows() != mean.size()) {
    throw InputError("covariance must be d x d with d == mean length");
  }
  for (double m : mean) {
    if (!std::isfinite(m)) throw InputError("mean must be finite");
  }
  const std::size_t d = cov.rows();
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i + 1; j < d; ++j) {
      if (std::abs(cov(i, j) - cov(j, i)) > 1e-10) throw InputError("covariance is not symmetric");
    }
  }
  return GaussianSummary{std::move(mean), std::move(cov), n};
}

std::string_view to_string(Orientation o) noexcept {
  return o == Orientation::HigherIsDiverse ? "higher_is_diverse" : "lower_is_diverse";
}

Orientation orientation_from_string(std::string_view s) {
  if (s == "higher_is_diverse") return Orientation::HigherIsDiverse;
  if (s == "lower_is_diverse") return Orientation::LowerIsDiverse;
  throw InputError("unknown orientation '" + std::string(s) + "'");
}

std::vector<double> minmax_scale(std::span<const double> values, Orientation orientation) {
  if (values.empty()) throw InputError("minmax_scale needs at least one value");
  for (double v : values) {
    if (!std::isfinite(v)) throw InputError("minmax_scale input must be finite");
  }
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  std::vector<double> out(values.size(), 0.0);
  if (hi == lo) return out;
  const double range = hi - lo;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double s = orientation == Orientation::LowerIsDiverse ? (values[i] - lo) / range
                                                                : (hi - values[i]) / range;
    out[i] = std::clamp(s, 0.0, 1.0);
  }
  return out;
}

std::vector<double> fractional_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

std::optional<double> spearman_rho(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw InputError("spearman_rho: sequence lengths differ");
  if (xs.size() < 2) throw InputError("spearman_rho: need at least 2 points");
  const auto rx = fractional_ranks(xs);
  const auto ry = fractional_ranks(ys);
  const double n = static_cast<double>(xs.size());
  const double mean = (n + 1.0) / 2.0;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    const double dx = rx[i] - mean;
    const double dy = ry[i] - mean;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

} // namespace mcmetrics
