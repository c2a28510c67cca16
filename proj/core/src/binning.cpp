#include "mcmetrics/binning.hpp"

#include "mcmetrics/errors.hpp"
#include "mcmetrics/rng.hpp"
#include "mcmetrics/stats.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace mcmetrics::binning {

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

struct Assignment {
  std::vector<std::size_t> bin;
  std::vector<double> dist2;
};

void assign_all(const Matrix& points, const std::vector<double>& centroids, std::size_t k,
                Assignment& out) {
  const std::size_t d = points.cols();
  for (std::size_t r = 0; r < points.rows(); ++r) {
    auto x = points.row(r);
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      const double dist = squared_distance(x, {centroids.data() + c * d, d});
      if (dist < best_d) {
        best_d = dist;
        best = c;
      }
    }
    out.bin[r] = best;
    out.dist2[r] = best_d;
  }
}

std::vector<double> kmeanspp_seed(const Matrix& points, std::size_t k, SplitMix64& rng) {
  const std::size_t n = points.rows();
  const std::size_t d = points.cols();
  std::vector<double> centroids;
  centroids.reserve(k * d);

  auto push = [&](std::size_t idx) {
    auto r = points.row(idx);
    centroids.insert(centroids.end(), r.begin(), r.end());
  };
  push(rng.below(n));

  std::vector<double> min_d2(n);
  for (std::size_t r = 0; r < n; ++r) min_d2[r] = squared_distance(points.row(r), {centroids.data(), d});

  for (std::size_t c = 1; c < k; ++c) {
    const double total = std::accumulate(min_d2.begin(), min_d2.end(), 0.0);
    std::size_t chosen = n - 1;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double cum = 0.0;
      for (std::size_t r = 0; r < n; ++r) {
        cum += min_d2[r];
        if (cum > target && min_d2[r] > 0.0) {
          chosen = r;
          break;
        }
      }
      // Round-off can leave the cumulative sum short of target; fall back to
      // the last point with positive weight.
      if (min_d2[chosen] == 0.0) {
        for (std::size_t r = n; r-- > 0;) {
          if (min_d2[r] > 0.0) {
            chosen = r;
            break;
          }
        }
      }
    } else {
      chosen = rng.below(n);
    }
    push(chosen);
    const std::span<const double> added{centroids.data() + c * d, d};
    for (std::size_t r = 0; r < n; ++r) {
      min_d2[r] = std::min(min_d2[r], squared_distance(points.row(r), added));
    }
  }
  return centroids;
}

} // namespace

BinModel::BinModel(Matrix centroids, std::uint64_t seed, std::size_t iterations_run)
    : centroids_(std::move(centroids)), seed_(seed), iterations_run_(iterations_run) {}

std::size_t default_bin_count(std::size_t rows) noexcept {
  if (rows >= 1000) return 100;
  return std::max<std::size_t>(10, rows / 20);
}

BinModel fit_bins(const Matrix& reference, std::size_t k, std::uint64_t seed,
                  const KMeansOptions& options) {
  if (k == 0) throw InputError("fit_bins: k must be at least 1");
  const std::size_t n = reference.rows();
  const std::size_t d = reference.cols();
  if (n < k) {
    throw InputError("fit_bins: reference has " + std::to_string(n) + " rows, fewer than k = " +
                     std::to_string(k));
  }

  SplitMix64 rng(seed);
  std::vector<double> centroids = kmeanspp_seed(reference, k, rng);
  Assignment assign{std::vector<std::size_t>(n), std::vector<double>(n)};
  std::vector<double> sums(k * d);
  std::vector<std::size_t> counts(k);
  std::vector<bool> taken(n);

  std::size_t iter = 0;
  while (iter < options.max_iter) {
    ++iter;
    assign_all(reference, centroids, k, assign);

    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t r = 0; r < n; ++r) {
      const std::size_t b = assign.bin[r];
      auto x = reference.row(r);
      double* s = sums.data() + b * d;
      for (std::size_t j = 0; j < d; ++j) s[j] += x[j];
      ++counts[b];
    }

    std::fill(taken.begin(), taken.end(), false);
    double max_shift2 = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      double* centroid = centroids.data() + c * d;
      std::vector<double> updated(d);
      if (counts[c] > 0) {
        for (std::size_t j = 0; j < d; ++j) {
          updated[j] = sums[c * d + j] / static_cast<double>(counts[c]);
        }
      } else {
        std::size_t far = n;
        double far_d = -1.0;
        for (std::size_t r = 0; r < n; ++r) {
          if (!taken[r] && assign.dist2[r] > far_d) {
            far_d = assign.dist2[r];
            far = r;
          }
        }
        taken[far] = true;
        auto x = reference.row(far);
        std::copy(x.begin(), x.end(), updated.begin());
      }
      max_shift2 = std::max(max_shift2, squared_distance({centroid, d}, updated));
      std::copy(updated.begin(), updated.end(), centroid);
    }
    if (std::sqrt(max_shift2) < options.tol) break;
  }

  return BinModel(Matrix(k, d, std::move(centroids)), seed, iter);
}

std::size_t nearest_bin(const BinModel& model, std::span<const double> point) noexcept {
  const auto& c = model.centroids();
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t b = 0; b < model.k(); ++b) {
    const double dist = squared_distance(point, c.row(b));
    if (dist < best_d) {
      best_d = dist;
      best = b;
    }
  }
  return best;
}

std::vector<std::size_t> assign_histogram(const BinModel& model, const Matrix& samples) {
  if (samples.cols() != model.dim()) {
    throw InputError("assign_histogram: samples have " + std::to_string(samples.cols()) +
                     " columns, bins expect " + std::to_string(model.dim()));
  }
  std::vector<std::size_t> counts(model.k(), 0);
  for (std::size_t r = 0; r < samples.rows(); ++r) ++counts[nearest_bin(model, samples.row(r))];
  return counts;
}

double z_threshold(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("alpha must lie in (0, 1)");
  const boost::math::normal_distribution<double> standard;
  return boost::math::quantile(boost::math::complement(standard, alpha / 2.0));
}

namespace {

std::size_t total(std::span<const std::size_t> counts) {
  return std::accumulate(counts.begin(), counts.end(), std::size_t{0});
}

void check_histograms(std::span<const std::size_t> a, std::span<const std::size_t> b) {
  if (a.size() != b.size() || a.empty()) throw InputError("histograms must have equal, non-zero length");
  if (total(a) == 0 || total(b) == 0) throw InputError("sample sets must be non-empty");
}

} // namespace

NdbResult ndb_from_histograms(std::span<const std::size_t> reference_counts,
                              std::span<const std::size_t> test_counts, double alpha) {
  check_histograms(reference_counts, test_counts);
  NdbResult out;
  out.k = reference_counts.size();
  out.alpha = alpha;
  out.z_threshold = z_threshold(alpha);
  const std::size_t n_ref = total(reference_counts);
  const std::size_t n_test = total(test_counts);
  out.per_bin_z.reserve(out.k);
  for (std::size_t b = 0; b < out.k; ++b) {
    const double z = two_proportion_z(reference_counts[b], n_ref, test_counts[b], n_test);
    out.per_bin_z.push_back(z);
    if (std::abs(z) > out.z_threshold) ++out.ndb;
  }
  out.ndb_ratio = static_cast<double>(out.ndb) / static_cast<double>(out.k);
  return out;
}

NdbResult ndb_score(const BinModel& model, const Matrix& reference, const Matrix& test, double alpha) {
  return ndb_from_histograms(assign_histogram(model, reference), assign_histogram(model, test), alpha);
}

double js_from_histograms(std::span<const std::size_t> reference_counts,
                          std::span<const std::size_t> test_counts) {
  check_histograms(reference_counts, test_counts);
  auto smooth = [](std::span<const std::size_t> counts) {
    const double n = static_cast<double>(total(counts));
    std::vector<double> p(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) {
      p[i] = static_cast<double>(counts[i]) / n + kHistogramSmoothing;
    }
    return Distribution::normalized(p);
  };
  return js_divergence(smooth(reference_counts), smooth(test_counts));
}

double js_bins(const BinModel& model, const Matrix& reference, const Matrix& test) {
  return js_from_histograms(assign_histogram(model, reference), assign_histogram(model, test));
}

} // namespace mcmetrics::binning
