#include "cli.hpp"

#include "mcmetrics/errors.hpp"
#include "mcmetrics/harness.hpp"
#include "mcmetrics/matio.hpp"
#include "mcmetrics/report.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace mcmetrics::cli {

namespace {

namespace fs = std::filesystem;
using harness::Metric;

Matrix load_any_matrix(const std::string& path) {
  if (fs::path(path).extension() == ".csv") return matio::load_csv_matrix(path);
  return matio::load_matrix(path);
}

std::optional<Matrix> load_optional(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return load_any_matrix(path);
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
  } else {
    report::save_text(text, path);
  }
}

struct ReferenceArgs {
  std::string features;
  std::string labels;
  std::string probs;
  std::string embeddings;
  std::string manifest;
};

harness::ReferenceData load_reference(const ReferenceArgs& a, std::map<std::string, std::string>& sources,
                                      const std::string& prefix) {
  sources[prefix + "features"] = a.features;
  sources[prefix + "labels"] = a.labels;
  if (!a.probs.empty()) sources[prefix + "probs"] = a.probs;
  if (!a.embeddings.empty()) sources[prefix + "embeddings"] = a.embeddings;
  if (!a.manifest.empty()) {
    for (const auto& [k, v] : harness::read_manifest(a.manifest)) sources["manifest." + k] = v;
  }
  return harness::ReferenceData{
      LabeledDataset(load_any_matrix(a.features), matio::load_labels(a.labels), load_optional(a.probs)),
      load_optional(a.embeddings)};
}

struct MetricArgs {
  std::string metrics;
  std::optional<std::size_t> k;
  double alpha = 0.05;
  std::optional<std::size_t> per_class_cap;
  std::uint64_t seed = 0;
  std::string bin_space = "features";
  std::size_t is_splits = 1;
  std::size_t kmeans_max_iter = 100;
  double kmeans_tol = 1e-6;
  double fid_jitter = 0.0;
  std::size_t workers = 1;
};

void add_metric_options(CLI::App& cmd, MetricArgs& m, bool with_metrics) {
  if (with_metrics) {
    cmd.add_option("--metrics", m.metrics, "Comma-separated subset of ndb,js,is,mode,fid");
  }
  cmd.add_option("--k", m.k, "K-means bin count (default: 100 for >= 1000 rows, else max(10, rows/20))")
      ->check(CLI::PositiveNumber);
  cmd.add_option("--alpha", m.alpha, "NDB significance level")->check(CLI::Range(0.0, 1.0));
  cmd.add_option("--seed", m.seed, "Seed for k-means and per-class subsampling");
  cmd.add_option("--bin-space", m.bin_space, "Space used for NDB/JS bins")
      ->check(CLI::IsMember({"features", "pixels", "embeddings"}));
  cmd.add_option("--is-splits", m.is_splits, "Split count for the Inception Score")
      ->check(CLI::PositiveNumber);
  cmd.add_option("--kmeans-max-iter", m.kmeans_max_iter, "Lloyd iteration cap")->check(CLI::PositiveNumber);
  cmd.add_option("--kmeans-tol", m.kmeans_tol, "Centroid movement stopping threshold");
  cmd.add_option("--fid-jitter", m.fid_jitter, "Diagonal jitter added before the FID matrix root")
      ->check(CLI::NonNegativeNumber);
}

harness::SweepConfig to_config(const MetricArgs& m) {
  harness::SweepConfig cfg;
  cfg.metrics = harness::parse_metric_list(m.metrics);
  cfg.k = m.k;
  cfg.alpha = m.alpha;
  cfg.per_class_cap = m.per_class_cap;
  cfg.seed = m.seed;
  cfg.bin_space = harness::bin_space_from_string(m.bin_space);
  cfg.is_splits = m.is_splits;
  cfg.kmeans.max_iter = m.kmeans_max_iter;
  cfg.kmeans.tol = m.kmeans_tol;
  cfg.fid_jitter = m.fid_jitter;
  cfg.workers = m.workers;
  return cfg;
}

fs::path csv_sibling(const std::string& json_path) {
  fs::path p(json_path);
  p.replace_extension(".csv");
  return p;
}

int run_sweep(const ReferenceArgs& ref_args, const MetricArgs& margs, const std::string& out_path,
              bool write_csv, std::ostream& out) {
  auto cfg = to_config(margs);
  auto reference = load_reference(ref_args, cfg.sources, "");
  const auto report = harness::run_sweep(reference, cfg);
  emit(report::dump(report::to_json(report)), out_path, out);
  if (write_csv && !out_path.empty() && out_path != "-") {
    std::ostringstream csv;
    report::write_csv(report, csv);
    report::save_text(csv.str(), csv_sibling(out_path));
  }
  return kExitOk;
}

struct SampleArgs {
  std::string features;
  std::string probs;
  std::string embeddings;
};

harness::ExternalReport run_score(const SampleArgs& s, const ReferenceArgs& r, MetricArgs margs,
                                  const std::string& sweep_path) {
  std::optional<harness::MetricReport> sweep;
  harness::SweepConfig cfg;
  if (!sweep_path.empty()) {
    sweep = report::load_sweep(sweep_path);
    cfg = harness::config_from_report(*sweep);
    cfg.sources.clear();
    if (!margs.metrics.empty()) cfg.metrics = harness::parse_metric_list(margs.metrics);
    cfg.sources["against_sweep"] = sweep_path;
  } else {
    if (margs.metrics.empty()) throw InputError("--metrics is required without --against-sweep");
    cfg = to_config(margs);
  }
  auto reference = load_reference(r, cfg.sources, "ref_");
  cfg.sources["samples_features"] = s.features;
  if (!s.probs.empty()) cfg.sources["samples_probs"] = s.probs;
  if (!s.embeddings.empty()) cfg.sources["samples_embeddings"] = s.embeddings;
  harness::ExternalSamples samples{load_any_matrix(s.features), load_optional(s.probs),
                                   load_optional(s.embeddings)};
  return harness::score_external(samples, reference, cfg, sweep ? &*sweep : nullptr);
}

void add_score_inputs(CLI::App& cmd, SampleArgs& s, ReferenceArgs& r) {
  cmd.add_option("--samples-features", s.features, "Generated-sample features (MGM1 or .csv)")->required();
  cmd.add_option("--samples-probs", s.probs, "Generated-sample p(y|x) rows");
  cmd.add_option("--samples-embeddings", s.embeddings, "Generated-sample embeddings for FID");
  cmd.add_option("--ref-features", r.features, "Reference features")->required();
  cmd.add_option("--ref-labels", r.labels, "Reference labels (MGL1)")->required();
  cmd.add_option("--ref-probs", r.probs, "Reference p(y|x) rows");
  cmd.add_option("--ref-embeddings", r.embeddings, "Reference embeddings for FID");
  cmd.add_option("--manifest", r.manifest, "Extractor manifest to echo into the report");
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mode-collapse diversity metrics: NDB, JS, IS, MODE and FID", "mcmetrics"};
  app.require_subcommand(1);

  // sweep
  ReferenceArgs sweep_ref;
  MetricArgs sweep_metrics;
  std::string sweep_out;
  bool sweep_no_csv = false;
  auto* sweep = app.add_subcommand("sweep", "Evaluate the classes-0..i collapse sweep of a labeled set");
  sweep->add_option("--features", sweep_ref.features, "Reference features (MGM1 or .csv)")->required();
  sweep->add_option("--labels", sweep_ref.labels, "Reference labels (MGL1)")->required();
  sweep->add_option("--probs", sweep_ref.probs, "Reference p(y|x) rows, required for is/mode");
  sweep->add_option("--embeddings", sweep_ref.embeddings, "Reference embeddings, required for fid");
  sweep->add_option("--manifest", sweep_ref.manifest, "Extractor manifest to echo into the report");
  add_metric_options(*sweep, sweep_metrics, true);
  sweep->get_option("--metrics")->required();
  sweep->add_option("--per-class-cap", sweep_metrics.per_class_cap, "Subsample each class to at most N rows")
      ->check(CLI::PositiveNumber);
  sweep->add_option("--workers", sweep_metrics.workers, "Threads evaluating subsets (result is unaffected)")
      ->check(CLI::PositiveNumber);
  sweep->add_option("--out", sweep_out, "Report JSON path ('-' for stdout); CSV is written alongside")
      ->required();
  sweep->add_flag("--no-csv", sweep_no_csv, "Skip the CSV companion file");

  // score
  SampleArgs score_samples;
  ReferenceArgs score_ref;
  MetricArgs score_metrics;
  std::string score_sweep;
  std::string score_out;
  auto* score = app.add_subcommand("score", "Score generated samples against the full reference");
  add_score_inputs(*score, score_samples, score_ref);
  add_metric_options(*score, score_metrics, true);
  score->add_option("--against-sweep", score_sweep,
                    "Sweep report whose settings and min/max scale are reused");
  score->add_option("--out", score_out, "Scores JSON path (default stdout)");

  // metric
  std::string metric_name;
  SampleArgs metric_samples;
  ReferenceArgs metric_ref;
  MetricArgs metric_metrics;
  std::string metric_sweep;
  std::string metric_out;
  auto* metric = app.add_subcommand("metric", "Evaluate a single metric on generated samples");
  metric->add_option("name", metric_name, "ndb, js, is, mode or fid")
      ->required()
      ->check(CLI::IsMember({"ndb", "js", "is", "mode", "fid"}));
  add_score_inputs(*metric, metric_samples, metric_ref);
  add_metric_options(*metric, metric_metrics, false);
  metric->add_option("--against-sweep", metric_sweep, "Sweep report to scale against");
  metric->add_option("--out", metric_out, "Output JSON path (default stdout)");

  // synth
  std::uint32_t synth_classes = 10;
  std::size_t synth_per_class = 500;
  std::size_t synth_dim = 16;
  double synth_separation = 20.0;
  std::uint64_t synth_seed = 7;
  std::string synth_prefix;
  auto* synth = app.add_subcommand("synth", "Write a labeled Gaussian-mixture dataset");
  synth->add_option("--classes", synth_classes, "Number of classes")->check(CLI::PositiveNumber);
  synth->add_option("--per-class", synth_per_class, "Samples per class")->check(CLI::PositiveNumber);
  synth->add_option("--dim", synth_dim, "Feature dimension")->check(CLI::PositiveNumber);
  synth->add_option("--separation", synth_separation, "Distance of class centres from the origin")
      ->check(CLI::NonNegativeNumber);
  synth->add_option("--seed", synth_seed, "Generator seed");
  synth->add_option("--out-prefix", synth_prefix, "Writes PREFIX.features.mgm, PREFIX.labels.mgl, PREFIX.probs.mgm")
      ->required();

  // report
  std::string report_in;
  std::string report_format = "csv";
  std::string report_out;
  auto* rep = app.add_subcommand("report", "Re-emit a sweep report as CSV or canonical JSON");
  rep->add_option("--in", report_in, "Sweep report JSON")->required();
  rep->add_option("--format", report_format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  rep->add_option("--out", report_out, "Output path (default stdout)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (sweep->parsed()) {
      return run_sweep(sweep_ref, sweep_metrics, sweep_out, !sweep_no_csv, out);
    }
    if (score->parsed()) {
      const auto result = run_score(score_samples, score_ref, score_metrics, score_sweep);
      emit(report::dump(report::to_json(result)), score_out, out);
      return kExitOk;
    }
    if (metric->parsed()) {
      metric_metrics.metrics = metric_name;
      const auto result = run_score(metric_samples, metric_ref, metric_metrics, metric_sweep);
      emit(report::dump(report::to_json(result)), metric_out, out);
      return kExitOk;
    }
    if (synth->parsed()) {
      const auto data = harness::synth_mixture(synth_classes, synth_per_class, synth_dim,
                                               synth_separation, synth_seed);
      matio::save_matrix(data.features(), synth_prefix + ".features.mgm");
      matio::save_labels(data.labels(), synth_prefix + ".labels.mgl");
      matio::save_matrix(*data.probs(), synth_prefix + ".probs.mgm");
      out << "wrote " << data.size() << " rows to " << synth_prefix << ".{features.mgm,labels.mgl,probs.mgm}\n";
      return kExitOk;
    }
    if (rep->parsed()) {
      const auto loaded = report::load_sweep(report_in);
      if (report_format == "json") {
        emit(report::dump(report::to_json(loaded)), report_out, out);
      } else {
        std::ostringstream csv;
        report::write_csv(loaded, csv);
        emit(csv.str(), report_out, out);
      }
      return kExitOk;
    }
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const InputError& e) {
    err << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return kExitInput;
}

} // namespace mcmetrics::cli
