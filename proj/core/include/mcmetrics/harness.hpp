#pragma once

// Artificial mode-collapse protocol: subsets holding classes 0..i of a
// labeled reference set, every configured metric evaluated per subset
// against the full reference, and scaling onto a common [0, 1] axis where 1
// means "less diverse".

#include "mcmetrics/binning.hpp"
#include "mcmetrics/matrix.hpp"
#include "mcmetrics/stats.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mcmetrics::harness {

enum class Metric { Ndb, Js, Is, Mode, Fid };

std::string_view to_string(Metric m) noexcept;
Metric metric_from_string(std::string_view name);
/// Comma-separated names; result is de-duplicated and in canonical order
/// (ndb, js, is, mode, fid). Throws InputError on an unknown or empty list.
std::vector<Metric> parse_metric_list(std::string_view list);
/// NDB, JS and FID grow as diversity drops; IS and MODE shrink.
Orientation orientation_of(Metric m) noexcept;

struct SubsetSpec {
  std::uint32_t i = 0;
  std::optional<std::size_t> per_class_cap;
  std::uint64_t seed = 0;
};

/// Row indices (ascending) of the samples kept by `spec`: every sample with
/// label <= i, or, with a cap, a uniform per-class subsample of at most cap
/// rows. Class c draws from its own stream derive_seed(seed, c), so subset i
/// is always contained in subset i + 1.
std::vector<std::size_t> collapse_indices(const LabelVector& labels, const SubsetSpec& spec);

/// Throws InputError if spec.i >= num_classes or the subset is empty.
LabeledDataset collapse_subset(const LabeledDataset& data, const SubsetSpec& spec);

/// Isotropic unit-variance Gaussian classes. Class c is centred at
/// separation * (1 + c / dim) * e_(c mod dim), which is separation * e_c when
/// dim >= num_classes. Rows interleave classes (row r has label
/// r mod num_classes); probs are one-hot.
LabeledDataset synth_mixture(std::uint32_t num_classes, std::size_t per_class, std::size_t dim,
                             double separation, std::uint64_t seed);

enum class BinSpace { Features, Embeddings };
std::string_view to_string(BinSpace s) noexcept;
BinSpace bin_space_from_string(std::string_view s);

/// The full reference the subsets are drawn from and compared against.
struct ReferenceData {
  LabeledDataset data;
  /// Feature embeddings for FID (and for binning when bin_space is
  /// Embeddings). Same row count as data.
  std::optional<Matrix> embeddings;
};

struct SweepConfig {
  std::vector<Metric> metrics;
  /// Bin count; default_bin_count(reference rows) when unset.
  std::optional<std::size_t> k;
  double alpha = 0.05;
  BinSpace bin_space = BinSpace::Features;
  std::size_t is_splits = 1;
  std::optional<std::size_t> per_class_cap;
  std::uint64_t seed = 0;
  binning::KMeansOptions kmeans;
  double fid_jitter = 0.0;
  /// Threads used to evaluate subsets. Never changes the result.
  std::size_t workers = 1;
  /// Free-form provenance echoed into reports (input paths, extractor
  /// model/layer ids).
  std::map<std::string, std::string> sources;
};

struct MetricSeries {
  Metric metric = Metric::Ndb;
  Orientation orientation = Orientation::LowerIsDiverse;
  std::vector<double> raw;
  std::vector<double> scaled;
  /// Spearman rho between classes removed and scaled value; nullopt when
  /// undefined (constant sequence).
  std::optional<double> rho;
};

struct MetricReport {
  nlohmann::json config;
  std::vector<std::uint32_t> subsets;
  std::vector<MetricSeries> metrics;

  const MetricSeries& series(Metric m) const;
  const MetricSeries* find(Metric m) const noexcept;
};

/// Reported values carry 9 significant digits; raw metric values are rounded
/// with this before scaling so that a report is self-consistent.
double round_significant(double value, int digits = 9);

/// Evaluates every subset i = 0..C-1 against the full reference. Throws
/// InputError when a metric's inputs are missing (probs for IS/MODE,
/// embeddings for FID or for embedding-space bins).
MetricReport run_sweep(const ReferenceData& reference, const SweepConfig& config);

/// Min-max scaling per metric with the metric's orientation.
std::map<Metric, std::vector<double>> scale_report(const std::map<Metric, std::vector<double>>& raw);

/// Spearman rho of classes-removed (C - 1 - i) against each metric's scaled
/// values. Requires at least 3 subsets.
std::map<Metric, std::optional<double>> monotonicity(const MetricReport& report);

struct ExternalSamples {
  Matrix features;
  std::optional<Matrix> probs;
  std::optional<Matrix> embeddings;
};

struct ExternalScore {
  Metric metric = Metric::Ndb;
  Orientation orientation = Orientation::LowerIsDiverse;
  double raw = 0.0;
  /// Present when scored against a sweep: position on the sweep's
  /// min/max range, clamped to [0, 1].
  std::optional<double> scaled;
};

struct ExternalReport {
  nlohmann::json config;
  std::vector<ExternalScore> scores;
};

/// Scores generated samples against the full reference using the same
/// evaluation path as run_sweep. With `sweep`, each metric must be present in
/// the sweep and is scaled on that sweep's raw range.
ExternalReport score_external(const ExternalSamples& samples, const ReferenceData& reference,
                              const SweepConfig& config, const MetricReport* sweep = nullptr);

/// Rebuilds the metric settings (metrics, k, alpha, bin space, splits, cap,
/// seed, k-means and FID settings) recorded in a report's config echo.
SweepConfig config_from_report(const MetricReport& report);

/// key=value text written next to extracted features. Blank lines and lines
/// starting with '#' are skipped; repeated keys are joined with ','.
std::map<std::string, std::string> read_manifest(const std::filesystem::path& path);

} // namespace mcmetrics::harness
