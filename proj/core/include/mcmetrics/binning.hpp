#pragma once

// K-means bins fit on a reference sample, and the two bin-occupancy
// comparisons built on them: the number of statistically different bins
// (NDB) and the Jensen-Shannon divergence between bin histograms.

#include "mcmetrics/matrix.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace mcmetrics::binning {

/// Fitted K-means centroids. Immutable once built.
class BinModel {
public:
  BinModel(Matrix centroids, std::uint64_t seed, std::size_t iterations_run);

  const Matrix& centroids() const noexcept { return centroids_; }
  std::size_t k() const noexcept { return centroids_.rows(); }
  std::size_t dim() const noexcept { return centroids_.cols(); }
  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t iterations_run() const noexcept { return iterations_run_; }

private:
  Matrix centroids_;
  std::uint64_t seed_;
  std::size_t iterations_run_;
};

struct KMeansOptions {
  std::size_t max_iter = 100;
  // Stop once no centroid moves farther than this (Euclidean).
  double tol = 1e-6;
};

/// k-means++ seeding followed by Lloyd iterations, driven by SplitMix64.
/// A cluster that empties is re-seeded with the point farthest from its
/// assigned centroid. Bitwise deterministic for identical arguments.
///
/// Throws InputError if reference.rows() < k or k == 0.
BinModel fit_bins(const Matrix& reference, std::size_t k, std::uint64_t seed,
                  const KMeansOptions& options = {});

/// Default bin count for a reference of `rows` samples: 100 when rows >= 1000,
/// otherwise max(10, rows / 20).
std::size_t default_bin_count(std::size_t rows) noexcept;

/// Nearest centroid by squared Euclidean distance, ties to the lower index.
std::size_t nearest_bin(const BinModel& model, std::span<const double> point) noexcept;

/// Per-bin sample counts, length k; sums to samples.rows().
std::vector<std::size_t> assign_histogram(const BinModel& model, const Matrix& samples);

struct NdbResult {
  std::size_t ndb = 0;
  std::size_t k = 0;
  double ndb_ratio = 0.0;
  std::vector<double> per_bin_z;
  double alpha = 0.05;
  double z_threshold = 0.0;
};

/// Two-sided standard-normal critical value for significance level alpha in
/// (0, 1); 1.959964 for 0.05.
double z_threshold(double alpha);

/// NDB from two bin histograms of equal length. A bin counts as different
/// when the pooled two-proportion |z| exceeds z_threshold(alpha).
NdbResult ndb_from_histograms(std::span<const std::size_t> reference_counts,
                              std::span<const std::size_t> test_counts, double alpha = 0.05);

NdbResult ndb_score(const BinModel& model, const Matrix& reference, const Matrix& test,
                    double alpha = 0.05);

inline constexpr double kHistogramSmoothing = 1e-12;

/// JS divergence between normalized histograms after adding
/// kHistogramSmoothing to every bin proportion and renormalizing.
double js_from_histograms(std::span<const std::size_t> reference_counts,
                          std::span<const std::size_t> test_counts);

double js_bins(const BinModel& model, const Matrix& reference, const Matrix& test);

} // namespace mcmetrics::binning
