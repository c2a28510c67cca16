#include "mcmetrics/harness.hpp"

#include "mcmetrics/errors.hpp"
#include "mcmetrics/fid.hpp"
#include "mcmetrics/rng.hpp"
#include "mcmetrics/scores.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <thread>

namespace mcmetrics::harness {

namespace {

constexpr Metric kAllMetrics[] = {Metric::Ndb, Metric::Js, Metric::Is, Metric::Mode, Metric::Fid};

} // namespace

std::string_view to_string(Metric m) noexcept {
  switch (m) {
  case Metric::Ndb: return "ndb";
  case Metric::Js: return "js";
  case Metric::Is: return "is";
  case Metric::Mode: return "mode";
  case Metric::Fid: return "fid";
  }
  return "?";
}

Metric metric_from_string(std::string_view name) {
  for (Metric m : kAllMetrics) {
    if (to_string(m) == name) return m;
  }
  throw InputError("unknown metric '" + std::string(name) + "' (expected ndb, js, is, mode or fid)");
}

std::vector<Metric> parse_metric_list(std::string_view list) {
  std::vector<bool> wanted(std::size(kAllMetrics), false);
  std::size_t start = 0;
  while (start <= list.size()) {
    const std::size_t end = std::min(list.find(',', start), list.size());
    auto token = list.substr(start, end - start);
    while (!token.empty() && token.front() == ' ') token.remove_prefix(1);
    while (!token.empty() && token.back() == ' ') token.remove_suffix(1);
    if (!token.empty()) wanted[static_cast<std::size_t>(metric_from_string(token))] = true;
    start = end + 1;
  }
  std::vector<Metric> out;
  for (Metric m : kAllMetrics) {
    if (wanted[static_cast<std::size_t>(m)]) out.push_back(m);
  }
  if (out.empty()) throw InputError("metric list is empty");
  return out;
}

Orientation orientation_of(Metric m) noexcept {
  return (m == Metric::Is || m == Metric::Mode) ? Orientation::HigherIsDiverse
                                                : Orientation::LowerIsDiverse;
}

std::string_view to_string(BinSpace s) noexcept {
  return s == BinSpace::Features ? "features" : "embeddings";
}

BinSpace bin_space_from_string(std::string_view s) {
  if (s == "features" || s == "pixels") return BinSpace::Features;
  if (s == "embeddings" || s == "embedding") return BinSpace::Embeddings;
  throw InputError("unknown bin space '" + std::string(s) + "' (expected features or embeddings)");
}

// ---------------------------------------------------------------------------
// Subsets

std::vector<std::size_t> collapse_indices(const LabelVector& labels, const SubsetSpec& spec) {
  if (spec.i >= labels.num_classes()) {
    throw InputError("subset index " + std::to_string(spec.i) + " is not below num_classes " +
                     std::to_string(labels.num_classes()));
  }
  std::vector<std::size_t> kept;
  if (!spec.per_class_cap) {
    for (std::size_t r = 0; r < labels.size(); ++r) {
      if (labels[r] <= spec.i) kept.push_back(r);
    }
  } else {
    const std::size_t cap = *spec.per_class_cap;
    if (cap == 0) throw InputError("per-class cap must be at least 1");
    std::vector<std::vector<std::size_t>> by_class(spec.i + 1);
    for (std::size_t r = 0; r < labels.size(); ++r) {
      if (labels[r] <= spec.i) by_class[labels[r]].push_back(r);
    }
    for (std::uint32_t c = 0; c <= spec.i; ++c) {
      auto& rows = by_class[c];
      if (rows.size() > cap) {
        // Partial Fisher-Yates: the first `cap` slots become a uniform sample.
        SplitMix64 rng(derive_seed(spec.seed, c));
        for (std::size_t j = 0; j < cap; ++j) {
          const std::size_t pick = j + static_cast<std::size_t>(rng.below(rows.size() - j));
          std::swap(rows[j], rows[pick]);
        }
        rows.resize(cap);
      }
      kept.insert(kept.end(), rows.begin(), rows.end());
    }
    std::sort(kept.begin(), kept.end());
  }
  if (kept.empty()) {
    throw InputError("subset " + std::to_string(spec.i) + " is empty (no samples of classes 0.." +
                     std::to_string(spec.i) + ")");
  }
  return kept;
}

LabeledDataset collapse_subset(const LabeledDataset& data, const SubsetSpec& spec) {
  const auto idx = collapse_indices(data.labels(), spec);
  std::vector<std::uint32_t> labels;
  labels.reserve(idx.size());
  for (auto r : idx) labels.push_back(data.labels()[r]);
  std::optional<Matrix> probs;
  if (data.probs()) probs = Matrix::select_rows(*data.probs(), idx);
  return LabeledDataset(Matrix::select_rows(data.features(), idx),
                        LabelVector(std::move(labels), data.num_classes()), std::move(probs));
}

LabeledDataset synth_mixture(std::uint32_t num_classes, std::size_t per_class, std::size_t dim,
                             double separation, std::uint64_t seed) {
  if (num_classes == 0 || per_class == 0 || dim == 0) {
    throw InputError("synth_mixture: classes, per_class and dim must be at least 1");
  }
  const std::size_t n = static_cast<std::size_t>(num_classes) * per_class;
  SplitMix64 rng(seed);
  std::vector<double> features(n * dim);
  std::vector<double> probs(n * num_classes, 0.0);
  std::vector<std::uint32_t> labels(n);
  for (std::size_t r = 0; r < n; ++r) {
    const auto c = static_cast<std::uint32_t>(r % num_classes);
    labels[r] = c;
    probs[r * num_classes + c] = 1.0;
    double* x = features.data() + r * dim;
    for (std::size_t j = 0; j < dim; ++j) x[j] = rng.normal();
    x[c % dim] += separation * (1.0 + static_cast<double>(c / dim));
  }
  return LabeledDataset(Matrix(n, dim, std::move(features)),
                        LabelVector(std::move(labels), num_classes),
                        Matrix(n, num_classes, std::move(probs)));
}

// ---------------------------------------------------------------------------
// Evaluation

double round_significant(double value, int digits) {
  if (value == 0.0 || !std::isfinite(value)) return value;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, value);
  return std::strtod(buf, nullptr);
}

namespace {

bool needs_bins(const std::vector<Metric>& metrics) {
  return std::any_of(metrics.begin(), metrics.end(),
                     [](Metric m) { return m == Metric::Ndb || m == Metric::Js; });
}

bool has(const std::vector<Metric>& metrics, Metric m) {
  return std::find(metrics.begin(), metrics.end(), m) != metrics.end();
}

std::vector<Metric> canonical(const std::vector<Metric>& metrics) {
  std::vector<Metric> out;
  for (Metric m : kAllMetrics) {
    if (has(metrics, m)) out.push_back(m);
  }
  if (out.empty()) throw InputError("no metrics configured");
  return out;
}

// Everything derived from the full reference, built once and then shared
// read-only by all subset evaluations.
class Evaluator {
public:
  Evaluator(const ReferenceData& ref, const SweepConfig& cfg) : ref_(ref), cfg_(cfg) {
    if (cfg.metrics.empty()) throw InputError("no metrics configured");
    if ((has(cfg.metrics, Metric::Is) || has(cfg.metrics, Metric::Mode)) && !ref.data.probs()) {
      throw InputError("IS/MODE requested but the reference has no label probabilities");
    }
    if (ref.embeddings && ref.embeddings->rows() != ref.data.size()) {
      throw InputError("embeddings have " + std::to_string(ref.embeddings->rows()) +
                       " rows, reference has " + std::to_string(ref.data.size()));
    }
    if (has(cfg.metrics, Metric::Fid)) {
      if (!ref.embeddings) throw InputError("FID requested but no embeddings were supplied");
      ref_gauss_ = gaussian_summary(*ref.embeddings);
    }
    if (needs_bins(cfg.metrics)) {
      if (cfg.bin_space == BinSpace::Embeddings && !ref.embeddings) {
        throw InputError("embedding-space bins requested but no embeddings were supplied");
      }
      const Matrix& space = bin_matrix();
      k_ = cfg.k.value_or(binning::default_bin_count(space.rows()));
      model_.emplace(binning::fit_bins(space, k_, cfg.seed, cfg.kmeans));
      ref_bins_.reserve(space.rows());
      ref_hist_.assign(k_, 0);
      for (std::size_t r = 0; r < space.rows(); ++r) {
        ref_bins_.push_back(binning::nearest_bin(*model_, space.row(r)));
        ++ref_hist_[ref_bins_.back()];
      }
    }
    if (has(cfg.metrics, Metric::Mode)) {
      train_dist_.emplace(Distribution::from_counts(ref.data.labels().class_counts()));
    }
    if (cfg.is_splits == 0) throw InputError("IS split count must be at least 1");
  }

  const Matrix& bin_matrix() const {
    return cfg_.bin_space == BinSpace::Embeddings ? *ref_.embeddings : ref_.data.features();
  }
  std::size_t k() const noexcept { return k_; }
  const binning::BinModel* model() const noexcept { return model_ ? &*model_ : nullptr; }

  // Histogram of reference rows `idx`, reusing the per-row bins.
  std::vector<std::size_t> subset_histogram(std::span<const std::size_t> idx) const {
    std::vector<std::size_t> hist(k_, 0);
    for (auto r : idx) ++hist[ref_bins_[r]];
    return hist;
  }

  double evaluate(Metric m, const std::vector<std::size_t>* hist, const Matrix* probs,
                  const Matrix* embeddings) const {
    switch (m) {
    case Metric::Ndb:
      return static_cast<double>(binning::ndb_from_histograms(ref_hist_, *hist, cfg_.alpha).ndb);
    case Metric::Js:
      return binning::js_from_histograms(ref_hist_, *hist);
    case Metric::Is: {
      const scores::LabelProbMatrix p(*probs);
      return cfg_.is_splits == 1 ? scores::inception_score(p)
                                 : scores::inception_score_split(p, cfg_.is_splits).mean;
    }
    case Metric::Mode:
      return scores::mode_score(scores::LabelProbMatrix(*probs), *train_dist_);
    case Metric::Fid: {
      if (embeddings->rows() < 2) throw InputError("FID needs at least 2 samples");
      fid::FrechetOptions opts;
      opts.jitter = cfg_.fid_jitter;
      return fid::frechet_distance(gaussian_summary(*embeddings), *ref_gauss_, opts);
    }
    }
    return 0.0;
  }

  std::vector<double> evaluate_subset(std::span<const std::size_t> idx) const {
    std::vector<std::size_t> hist;
    if (model_) hist = subset_histogram(idx);
    std::optional<Matrix> probs;
    if (ref_.data.probs() && (has(cfg_.metrics, Metric::Is) || has(cfg_.metrics, Metric::Mode))) {
      probs = Matrix::select_rows(*ref_.data.probs(), idx);
    }
    std::optional<Matrix> emb;
    if (has(cfg_.metrics, Metric::Fid)) emb = Matrix::select_rows(*ref_.embeddings, idx);

    std::vector<double> out;
    for (Metric m : cfg_.metrics) {
      out.push_back(evaluate(m, &hist, probs ? &*probs : nullptr, emb ? &*emb : nullptr));
    }
    return out;
  }

private:
  const ReferenceData& ref_;
  const SweepConfig& cfg_;
  std::size_t k_ = 0;
  std::optional<binning::BinModel> model_;
  std::vector<std::size_t> ref_bins_;
  std::vector<std::size_t> ref_hist_;
  std::optional<GaussianSummary> ref_gauss_;
  std::optional<Distribution> train_dist_;
};

nlohmann::json config_json(const ReferenceData& ref, const SweepConfig& cfg, std::size_t k) {
  nlohmann::json j;
  std::vector<std::string> names;
  for (Metric m : cfg.metrics) names.emplace_back(to_string(m));
  j["metrics"] = names;
  j["alpha"] = cfg.alpha;
  if (k == 0) {
    // No binning metric requested.
    j["k"] = nullptr;
    j["k_rule"] = "unused";
  } else {
    j["k"] = k;
    j["k_rule"] = cfg.k ? "explicit" : "default";
  }
  j["bin_space"] = std::string(to_string(cfg.bin_space));
  j["kmeans_max_iter"] = cfg.kmeans.max_iter;
  j["kmeans_tol"] = cfg.kmeans.tol;
  j["kl_eps"] = kDefaultKlEps;
  j["histogram_smoothing"] = binning::kHistogramSmoothing;
  j["log_base"] = "e";
  j["is_splits"] = cfg.is_splits;
  j["fid_jitter"] = cfg.fid_jitter;
  j["per_class_cap"] = cfg.per_class_cap ? nlohmann::json(*cfg.per_class_cap) : nlohmann::json();
  j["seed"] = cfg.seed;
  j["reference"] = "full";
  j["reference_rows"] = ref.data.size();
  j["classes"] = ref.data.num_classes();
  j["mode_train_dist"] = "empirical reference labels";
  j["subset_rule"] = "classes 0..i in ascending label order";
  j["sources"] = cfg.sources;
  return j;
}

template <typename Fn>
void parallel_for(std::size_t count, std::size_t workers, Fn&& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto drain = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    drain();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(drain);
  }
  // Lowest failing index wins so the reported error does not depend on
  // thread timing.
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

} // namespace

const MetricSeries* MetricReport::find(Metric m) const noexcept {
  for (const auto& s : metrics) {
    if (s.metric == m) return &s;
  }
  return nullptr;
}

const MetricSeries& MetricReport::series(Metric m) const {
  if (const auto* s = find(m)) return *s;
  throw InputError("report has no '" + std::string(to_string(m)) + "' metric");
}

MetricReport run_sweep(const ReferenceData& reference, const SweepConfig& config) {
  SweepConfig cfg = config;
  cfg.metrics = canonical(config.metrics);

  const Evaluator eval(reference, cfg);
  const std::uint32_t classes = reference.data.num_classes();

  std::vector<std::vector<double>> per_subset(classes);
  parallel_for(classes, cfg.workers, [&](std::size_t i) {
    SubsetSpec spec{static_cast<std::uint32_t>(i), cfg.per_class_cap, cfg.seed};
    per_subset[i] = eval.evaluate_subset(collapse_indices(reference.data.labels(), spec));
  });

  std::map<Metric, std::vector<double>> raw;
  for (std::size_t mi = 0; mi < cfg.metrics.size(); ++mi) {
    auto& series = raw[cfg.metrics[mi]];
    for (std::uint32_t i = 0; i < classes; ++i) {
      series.push_back(round_significant(per_subset[i][mi]));
    }
  }
  const auto scaled = scale_report(raw);

  MetricReport report;
  report.config = config_json(reference, cfg, eval.k());
  for (std::uint32_t i = 0; i < classes; ++i) report.subsets.push_back(i);
  for (Metric m : cfg.metrics) {
    report.metrics.push_back(MetricSeries{m, orientation_of(m), raw.at(m), scaled.at(m), std::nullopt});
  }
  if (classes >= 3) {
    const auto rho = monotonicity(report);
    for (auto& s : report.metrics) s.rho = rho.at(s.metric);
  }
  return report;
}

std::map<Metric, std::vector<double>> scale_report(const std::map<Metric, std::vector<double>>& raw) {
  std::map<Metric, std::vector<double>> out;
  for (const auto& [metric, values] : raw) out[metric] = minmax_scale(values, orientation_of(metric));
  return out;
}

std::map<Metric, std::optional<double>> monotonicity(const MetricReport& report) {
  const std::size_t n = report.subsets.size();
  if (n < 3) throw InputError("monotonicity needs at least 3 subsets");
  const auto last = *std::max_element(report.subsets.begin(), report.subsets.end());
  std::vector<double> removed;
  for (auto i : report.subsets) removed.push_back(static_cast<double>(last - i));
  std::map<Metric, std::optional<double>> out;
  for (const auto& s : report.metrics) {
    if (s.scaled.size() != n) throw InputError("scaled series length does not match subset count");
    out[s.metric] = spearman_rho(removed, s.scaled);
  }
  return out;
}

// ---------------------------------------------------------------------------
// External samples

ExternalReport score_external(const ExternalSamples& samples, const ReferenceData& reference,
                              const SweepConfig& config, const MetricReport* sweep) {
  SweepConfig cfg = config;
  cfg.metrics = canonical(config.metrics);
  if (sweep) {
    for (Metric m : cfg.metrics) {
      if (!sweep->find(m)) {
        throw InputError("sweep report has no '" + std::string(to_string(m)) + "' series to scale against");
      }
    }
  }
  const Evaluator eval(reference, cfg);

  if (samples.probs && samples.probs->cols() != reference.data.num_classes()) {
    throw InputError("sample probabilities have " + std::to_string(samples.probs->cols()) +
                     " classes, reference has " + std::to_string(reference.data.num_classes()));
  }
  std::vector<std::size_t> hist;
  if (const auto* model = eval.model()) {
    const Matrix* space = cfg.bin_space == BinSpace::Embeddings ? (samples.embeddings ? &*samples.embeddings : nullptr)
                                                                : &samples.features;
    if (!space) throw InputError("embedding-space bins need sample embeddings");
    hist = binning::assign_histogram(*model, *space);
  }
  const bool wants_probs = std::any_of(cfg.metrics.begin(), cfg.metrics.end(),
                                       [](Metric m) { return m == Metric::Is || m == Metric::Mode; });
  if (wants_probs && !samples.probs) throw InputError("IS/MODE requested but no sample probabilities");
  if (has(cfg.metrics, Metric::Fid)) {
    if (!samples.embeddings) throw InputError("FID requested but no sample embeddings");
    if (samples.embeddings->cols() != reference.embeddings->cols()) {
      throw InputError("sample embeddings have " + std::to_string(samples.embeddings->cols()) +
                       " columns, reference has " + std::to_string(reference.embeddings->cols()));
    }
  }

  ExternalReport out;
  out.config = config_json(reference, cfg, eval.k());
  for (Metric m : cfg.metrics) {
    ExternalScore s;
    s.metric = m;
    s.orientation = orientation_of(m);
    s.raw = round_significant(eval.evaluate(m, &hist, samples.probs ? &*samples.probs : nullptr,
                                            samples.embeddings ? &*samples.embeddings : nullptr));
    if (sweep) {
      const auto& series = sweep->series(m);
      const auto [lo, hi] = std::minmax_element(series.raw.begin(), series.raw.end());
      if (*hi == *lo) {
        s.scaled = 0.0;
      } else {
        const double range = *hi - *lo;
        const double v = s.orientation == Orientation::LowerIsDiverse ? (s.raw - *lo) / range
                                                                      : (*hi - s.raw) / range;
        s.scaled = std::clamp(v, 0.0, 1.0);
      }
    }
    out.scores.push_back(s);
  }
  return out;
}

SweepConfig config_from_report(const MetricReport& report) {
  const auto& c = report.config;
  SweepConfig cfg;
  try {
    std::string names;
    for (const auto& n : c.at("metrics")) names += n.get<std::string>() + ",";
    cfg.metrics = parse_metric_list(names);
    cfg.alpha = c.at("alpha").get<double>();
    if (c.contains("k") && c.at("k").is_number() && c.at("k").get<std::size_t>() > 0) {
      cfg.k = c.at("k").get<std::size_t>();
    }
    cfg.bin_space = bin_space_from_string(c.at("bin_space").get<std::string>());
    cfg.is_splits = c.at("is_splits").get<std::size_t>();
    if (!c.at("per_class_cap").is_null()) cfg.per_class_cap = c.at("per_class_cap").get<std::size_t>();
    cfg.seed = c.at("seed").get<std::uint64_t>();
    cfg.kmeans.max_iter = c.at("kmeans_max_iter").get<std::size_t>();
    cfg.kmeans.tol = c.at("kmeans_tol").get<double>();
    cfg.fid_jitter = c.at("fid_jitter").get<double>();
    if (c.contains("sources")) cfg.sources = c.at("sources").get<std::map<std::string, std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("report config is incomplete: ") + e.what());
  }
  return cfg;
}

std::map<std::string, std::string> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open manifest " + path.string());
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t line_no = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw InputError(path.string() + ":" + std::to_string(line_no) + ": expected key=value");
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    auto [it, inserted] = out.emplace(key, value);
    if (!inserted) it->second += "," + value;
  }
  return out;
}

} // namespace mcmetrics::harness
