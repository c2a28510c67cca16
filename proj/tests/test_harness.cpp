#include <doctest.h>

#include "mcmetrics/errors.hpp"
#include "mcmetrics/harness.hpp"
#include "mcmetrics/report.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

using namespace mcmetrics;
using namespace mcmetrics::harness;
using doctest::Approx;

namespace {

LabeledDataset blocky(std::uint32_t classes, std::size_t per_class) {
  // Class-major rows; feature = (row index, label).
  std::vector<double> f;
  std::vector<std::uint32_t> labels;
  for (std::uint32_t c = 0; c < classes; ++c)
    for (std::size_t j = 0; j < per_class; ++j) {
      f.push_back(static_cast<double>(labels.size()));
      f.push_back(c);
      labels.push_back(c);
    }
  const std::size_t n = labels.size();
  return LabeledDataset(Matrix(n, 2, std::move(f)), LabelVector(std::move(labels), classes));
}

ReferenceData synthetic_reference(std::size_t per_class = 100, double separation = 20.0) {
  auto data = synth_mixture(10, per_class, 16, separation, 7);
  Matrix emb = data.features();
  return ReferenceData{std::move(data), std::move(emb)};
}

} // namespace

TEST_CASE("metric names and orientations") {
  CHECK(parse_metric_list("fid, is,ndb,ndb") == std::vector{Metric::Ndb, Metric::Is, Metric::Fid});
  CHECK_THROWS_AS(parse_metric_list("ndb,kid"), InputError);
  CHECK_THROWS_AS(parse_metric_list(""), InputError);
  CHECK(orientation_of(Metric::Is) == Orientation::HigherIsDiverse);
  CHECK(orientation_of(Metric::Mode) == Orientation::HigherIsDiverse);
  CHECK(orientation_of(Metric::Fid) == Orientation::LowerIsDiverse);
  CHECK(bin_space_from_string("pixels") == BinSpace::Features);
  CHECK_THROWS_AS(bin_space_from_string("logits"), InputError);
}

TEST_CASE("collapse_subset") {
  const auto data = blocky(10, 100);

  SUBCASE("i = C - 1 keeps everything") {
    const auto s = collapse_subset(data, {9, std::nullopt, 0});
    CHECK(s.features() == data.features());
    CHECK(s.labels() == data.labels());
  }
  SUBCASE("i = 0 keeps only class 0") {
    const auto s = collapse_subset(data, {0, std::nullopt, 0});
    CHECK(s.size() == 100);
    for (auto l : s.labels().labels()) CHECK(l == 0);
  }
  SUBCASE("i = 4 keeps 500 samples with labels 0..4, in original order") {
    const auto s = collapse_subset(data, {4, std::nullopt, 0});
    CHECK(s.size() == 500);
    for (std::size_t r = 0; r < s.size(); ++r) {
      CHECK(s.labels()[r] <= 4);
      CHECK(s.features()(r, 0) == static_cast<double>(r));
    }
    CHECK(s.num_classes() == 10);
  }
  SUBCASE("probs filtered in lockstep") {
    const auto synth = synth_mixture(4, 5, 4, 3.0, 1);
    const auto s = collapse_subset(synth, {1, std::nullopt, 0});
    REQUIRE(s.probs());
    for (std::size_t r = 0; r < s.size(); ++r) CHECK((*s.probs())(r, s.labels()[r]) == 1.0);
  }
  SUBCASE("per-class cap") {
    const auto s = collapse_subset(data, {3, 30, 11});
    CHECK(s.size() == 120);
    const auto counts = s.labels().class_counts();
    for (std::size_t c = 0; c < 4; ++c) CHECK(counts[c] == 30);
    CHECK(collapse_indices(data.labels(), {3, 30, 11}) == collapse_indices(data.labels(), {3, 30, 11}));
    CHECK(collapse_indices(data.labels(), {3, 30, 11}) != collapse_indices(data.labels(), {3, 30, 12}));
    // A cap above the class size keeps the class whole.
    CHECK(collapse_subset(data, {2, 1000, 1}).size() == 300);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(collapse_subset(data, {10, std::nullopt, 0}), InputError);
    const LabeledDataset no_zero(Matrix(2, 1, {1, 2}), LabelVector({1, 2}, 3));
    CHECK_THROWS_AS(collapse_subset(no_zero, {0, std::nullopt, 0}), InputError);
  }
}

TEST_CASE("property: subsets are nested, with and without a cap") {
  const auto data = synth_mixture(10, 37, 4, 1.0, 3);
  for (std::optional<std::size_t> cap : {std::optional<std::size_t>{}, std::optional<std::size_t>{20}}) {
    for (std::uint32_t i = 0; i + 1 < 10; ++i) {
      const auto small = collapse_indices(data.labels(), {i, cap, 5});
      const auto big = collapse_indices(data.labels(), {i + 1, cap, 5});
      CHECK(std::includes(big.begin(), big.end(), small.begin(), small.end()));
      CHECK(std::is_sorted(small.begin(), small.end()));
    }
  }
}

TEST_CASE("synth_mixture") {
  const auto d = synth_mixture(10, 100, 16, 20.0, 7);
  CHECK(d.size() == 1000);
  for (auto c : d.labels().class_counts()) CHECK(c == 100);
  REQUIRE(d.probs());
  CHECK(d.probs()->cols() == 10);

  const auto again = synth_mixture(10, 100, 16, 20.0, 7);
  CHECK(bitwise_equal(d.features(), again.features()));

  SUBCASE("class means sit at separation * e_c") {
    const auto s = synth_mixture(10, 200, 10, 50.0, 1);
    for (std::uint32_t c = 0; c < 10; ++c) {
      std::vector<std::size_t> rows;
      for (std::size_t r = 0; r < s.size(); ++r)
        if (s.labels()[r] == c) rows.push_back(r);
      const auto cls = gaussian_summary(Matrix::select_rows(s.features(), rows));
      double dist2 = 0.0;
      for (std::size_t j = 0; j < 10; ++j) {
        const double target = j == c ? 50.0 : 0.0;
        dist2 += (cls.mean[j] - target) * (cls.mean[j] - target);
      }
      CHECK(std::sqrt(dist2) < 0.5);
    }
  }
  SUBCASE("more classes than dimensions still gives distinct centres") {
    const auto s = synth_mixture(6, 50, 2, 10.0, 2);
    CHECK(s.size() == 300);
  }
}

TEST_CASE("separation 0: two equal-size samples are not told apart beyond alpha") {
  // Monte-Carlo calibration on a small scale; the full-size version lives in
  // the acceptance suite.
  double total = 0.0;
  const int trials = 20;
  for (int t = 0; t < trials; ++t) {
    const auto a = synth_mixture(10, 100, 8, 0.0, 1000 + 2 * t);
    const auto b = synth_mixture(10, 100, 8, 0.0, 1001 + 2 * t);
    const auto model = binning::fit_bins(a.features(), 20, static_cast<std::uint64_t>(t));
    total += binning::ndb_score(model, a.features(), b.features()).ndb_ratio;
  }
  CHECK(total / trials <= 0.10);
}

TEST_CASE("scale_report") {
  std::map<Metric, std::vector<double>> raw{
      {Metric::Fid, {0, 5, 20}},
      {Metric::Is, {10, 7, 4, 1}},
      {Metric::Mode, {3, 3, 3}},
  };
  const auto s = scale_report(raw);
  CHECK(s.at(Metric::Fid) == std::vector{0.0, 0.25, 1.0});
  CHECK(s.at(Metric::Is) == std::vector{0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0});
  CHECK(s.at(Metric::Mode) == std::vector{0.0, 0.0, 0.0});
}

TEST_CASE("monotonicity") {
  MetricReport r;
  r.subsets = {0, 1, 2, 3};
  r.metrics.push_back({Metric::Fid, Orientation::LowerIsDiverse, {}, {1.0, 0.5, 0.2, 0.0}, {}});
  r.metrics.push_back({Metric::Is, Orientation::HigherIsDiverse, {}, {0.0, 0.1, 0.2, 0.3}, {}});
  r.metrics.push_back({Metric::Mode, Orientation::HigherIsDiverse, {}, {0.0, 0.0, 0.0, 0.0}, {}});
  const auto rho = monotonicity(r);
  CHECK(*rho.at(Metric::Fid) == Approx(1.0));
  CHECK(*rho.at(Metric::Is) == Approx(-1.0));
  CHECK_FALSE(rho.at(Metric::Mode).has_value());
  r.subsets = {0, 1};
  CHECK_THROWS_AS(monotonicity(r), InputError);
}

TEST_CASE("run_sweep on a synthetic mixture") {
  const auto ref = synthetic_reference();
  SweepConfig cfg;
  cfg.metrics = {Metric::Ndb, Metric::Js, Metric::Is, Metric::Mode, Metric::Fid};
  cfg.seed = 3;
  const auto report = run_sweep(ref, cfg);

  CHECK(report.subsets.size() == 10);
  CHECK(report.config.at("k") == 100);
  CHECK(report.config.at("k_rule") == "default");
  for (const auto& s : report.metrics) {
    CHECK(s.raw.size() == 10);
    CHECK(s.scaled.size() == 10);
    for (double v : s.scaled) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
  SUBCASE("IS on balanced one-hot data equals the number of classes kept") {
    const auto& is = report.series(Metric::Is);
    for (std::size_t i = 0; i < 10; ++i) CHECK(is.raw[i] == static_cast<double>(i + 1));
  }
  SUBCASE("the full subset compares equal to the reference") {
    CHECK(report.series(Metric::Ndb).raw.back() == 0.0);
    CHECK(report.series(Metric::Js).raw.back() == 0.0);
    CHECK(report.series(Metric::Fid).raw.back() <= 1e-6);
  }
  SUBCASE("JS and FID fall as classes are added") {
    for (Metric m : {Metric::Js, Metric::Fid}) {
      const auto& s = report.series(m).scaled;
      for (std::size_t i = 0; i + 1 < s.size(); ++i) CHECK(s[i] >= s[i + 1]);
      CHECK(s.front() == 1.0);
    }
  }
}

TEST_CASE("run_sweep: worker count never changes the report") {
  const auto ref = synthetic_reference(60);
  SweepConfig cfg;
  cfg.metrics = {Metric::Ndb, Metric::Js, Metric::Fid, Metric::Is};
  cfg.per_class_cap = 40;
  const auto one = report::dump(report::to_json(run_sweep(ref, cfg)));
  cfg.workers = 4;
  CHECK(report::dump(report::to_json(run_sweep(ref, cfg))) == one);
}

TEST_CASE("run_sweep: missing inputs") {
  auto data = synth_mixture(3, 20, 3, 5.0, 1);
  const ReferenceData no_probs{LabeledDataset(data.features(), data.labels()), std::nullopt};
  SweepConfig cfg;
  cfg.metrics = {Metric::Is};
  CHECK_THROWS_AS(run_sweep(no_probs, cfg), InputError);
  cfg.metrics = {Metric::Fid};
  CHECK_THROWS_AS(run_sweep(no_probs, cfg), InputError);
  cfg.metrics = {Metric::Ndb};
  cfg.bin_space = BinSpace::Embeddings;
  CHECK_THROWS_AS(run_sweep(no_probs, cfg), InputError);
  cfg.metrics = {};
  CHECK_THROWS_AS(run_sweep(no_probs, cfg), InputError);
}

TEST_CASE("score_external") {
  const auto ref = synthetic_reference();
  SweepConfig cfg;
  cfg.metrics = {Metric::Ndb, Metric::Js, Metric::Is, Metric::Mode, Metric::Fid};
  cfg.seed = 5;
  const auto sweep = run_sweep(ref, cfg);

  SUBCASE("the reference itself is maximally diverse") {
    const ExternalSamples same{ref.data.features(), ref.data.probs(), ref.embeddings};
    const auto out = score_external(same, ref, cfg, &sweep);
    for (const auto& s : out.scores) {
      if (s.metric == Metric::Ndb || s.metric == Metric::Js) CHECK(s.raw == 0.0);
      if (s.metric == Metric::Fid) CHECK(s.raw <= 1e-6);
      if (s.metric != Metric::Is && s.metric != Metric::Mode) CHECK(*s.scaled <= 1e-9);
    }
  }
  SUBCASE("the i = 1 subset lands on the sweep's i = 1 entries") {
    const auto idx = collapse_indices(ref.data.labels(), {1, std::nullopt, 0});
    const ExternalSamples sub{Matrix::select_rows(ref.data.features(), idx),
                              Matrix::select_rows(*ref.data.probs(), idx),
                              Matrix::select_rows(*ref.embeddings, idx)};
    const auto out = score_external(sub, ref, cfg, &sweep);
    for (const auto& s : out.scores) {
      const auto& series = sweep.series(s.metric);
      CHECK(s.raw == series.raw[1]);
      CHECK(*s.scaled == series.scaled[1]);
    }
    // Same through a JSON round trip of the sweep and its recorded settings.
    const auto reloaded = report::sweep_from_json(nlohmann::json::parse(report::dump(report::to_json(sweep))));
    const auto again = score_external(sub, ref, config_from_report(reloaded), &reloaded);
    for (const auto& s : again.scores) {
      CHECK(*s.scaled == Approx(reloaded.series(s.metric).scaled[1]).epsilon(1e-9));
    }
  }
  SUBCASE("k is echoed only when bins are used") {
    const ExternalSamples same{ref.data.features(), ref.data.probs(), ref.embeddings};
    SweepConfig fid_only;
    fid_only.metrics = {Metric::Fid};
    const auto out = score_external(same, ref, fid_only);
    CHECK(out.config.at("k").is_null());
    CHECK(out.config.at("k_rule") == "unused");
    MetricReport r;
    r.config = out.config;
    CHECK_FALSE(config_from_report(r).k.has_value());
  }
  SUBCASE("no sweep means no scaled values") {
    const ExternalSamples same{ref.data.features(), ref.data.probs(), ref.embeddings};
    for (const auto& s : score_external(same, ref, cfg).scores) CHECK_FALSE(s.scaled.has_value());
  }
  SUBCASE("errors") {
    const ExternalSamples narrow{Matrix(5, 3, std::vector<double>(15, 0.0)), std::nullopt, std::nullopt};
    SweepConfig ndb_only;
    ndb_only.metrics = {Metric::Ndb};
    CHECK_THROWS_AS(score_external(narrow, ref, ndb_only), InputError);
    SweepConfig fid_only;
    fid_only.metrics = {Metric::Fid};
    CHECK_THROWS_AS(score_external(narrow, ref, fid_only), InputError);
    SweepConfig is_only;
    is_only.metrics = {Metric::Is};
    CHECK_THROWS_AS(score_external(narrow, ref, is_only), InputError);
    MetricReport no_fid = sweep;
    no_fid.metrics.pop_back();
    CHECK_THROWS_AS(score_external(narrow, ref, fid_only, &no_fid), InputError);
  }
}

TEST_CASE("report JSON is canonical and round-trips") {
  const auto ref = synthetic_reference(30);
  SweepConfig cfg;
  cfg.metrics = {Metric::Js, Metric::Mode};
  cfg.sources["model"] = "digits-cnn";
  const auto rep = run_sweep(ref, cfg);
  const auto text = report::dump(report::to_json(rep));
  const auto j = nlohmann::json::parse(text);
  CHECK(j.contains("config"));
  CHECK(j.at("subsets").size() == 10);
  CHECK(j.at("metrics").at("js").at("orientation") == "lower_is_diverse");
  CHECK(j.at("metrics").at("mode").at("orientation") == "higher_is_diverse");
  CHECK(j.at("config").at("sources").at("model") == "digits-cnn");
  // Re-serializing a parsed report gives the same bytes.
  CHECK(report::dump(report::to_json(report::sweep_from_json(j))) == text);

  const auto cfg2 = config_from_report(report::sweep_from_json(j));
  CHECK(cfg2.metrics == cfg.metrics);
  CHECK(cfg2.k == std::optional<std::size_t>(rep.config.at("k").get<std::size_t>()));
}

TEST_CASE("round_significant") {
  CHECK(round_significant(1.0 / 3.0) == 0.333333333);
  CHECK(round_significant(2.9999999999997) == 3.0);
  CHECK(round_significant(0.0) == 0.0);
  CHECK(round_significant(123456789012.0) == 123456789000.0);
}

TEST_CASE("manifest parsing") {
  const auto path = std::filesystem::temp_directory_path() / "mcmetrics_manifest_test.txt";
  {
    std::ofstream out(path);
    out << "# extractor manifest\nmodel = inception-v3\nlayer=pool3\nrows=5000\n\nskipped=a.png\nskipped=b.png\n";
  }
  const auto m = read_manifest(path);
  CHECK(m.at("model") == "inception-v3");
  CHECK(m.at("layer") == "pool3");
  CHECK(m.at("skipped") == "a.png,b.png");
  {
    std::ofstream out(path);
    out << "no separator here\n";
  }
  CHECK_THROWS_AS(read_manifest(path), InputError);
  std::filesystem::remove(path);
}
