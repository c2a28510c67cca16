#include "mcmetrics/report.hpp"

#include "mcmetrics/errors.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

namespace mcmetrics::report {

namespace {

using nlohmann::json;

void round_floats(json& j) {
  if (j.is_number_float()) {
    j = harness::round_significant(j.get<double>());
  } else if (j.is_structured()) {
    for (auto& child : j) round_floats(child);
  }
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(); }

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

} // namespace

json to_json(const harness::MetricReport& report) {
  json j;
  j["config"] = report.config;
  j["subsets"] = report.subsets;
  json metrics = json::object();
  for (const auto& s : report.metrics) {
    metrics[std::string(harness::to_string(s.metric))] = {
        {"raw", s.raw},
        {"scaled", s.scaled},
        {"orientation", std::string(to_string(s.orientation))},
        {"rho", optional_number(s.rho)},
    };
  }
  j["metrics"] = std::move(metrics);
  round_floats(j);
  return j;
}

harness::MetricReport sweep_from_json(const json& j) {
  harness::MetricReport report;
  try {
    report.config = j.at("config");
    report.subsets = j.at("subsets").get<std::vector<std::uint32_t>>();
    for (const auto& [name, body] : j.at("metrics").items()) {
      harness::MetricSeries s;
      s.metric = harness::metric_from_string(name);
      s.orientation = orientation_from_string(body.at("orientation").get<std::string>());
      s.raw = body.at("raw").get<std::vector<double>>();
      s.scaled = body.at("scaled").get<std::vector<double>>();
      if (!body.at("rho").is_null()) s.rho = body.at("rho").get<double>();
      if (s.raw.size() != report.subsets.size() || s.scaled.size() != report.subsets.size()) {
        throw InputError("report series '" + name + "' length does not match subset count");
      }
      report.metrics.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed sweep report: ") + e.what());
  }
  // Canonical metric order, independent of JSON key order.
  std::stable_sort(report.metrics.begin(), report.metrics.end(),
                   [](const auto& a, const auto& b) { return a.metric < b.metric; });
  return report;
}

json to_json(const harness::ExternalReport& report) {
  json j;
  j["config"] = report.config;
  json metrics = json::object();
  for (const auto& s : report.scores) {
    metrics[std::string(harness::to_string(s.metric))] = {
        {"raw", s.raw},
        {"scaled", optional_number(s.scaled)},
        {"orientation", std::string(to_string(s.orientation))},
    };
  }
  j["metrics"] = std::move(metrics);
  round_floats(j);
  return j;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void write_csv(const harness::MetricReport& report, std::ostream& out) {
  out << "metric,subset,classes_left,classes_removed,raw,scaled,orientation\n";
  std::uint32_t last = 0;
  for (auto i : report.subsets) last = std::max(last, i);
  for (const auto& s : report.metrics) {
    for (std::size_t idx = 0; idx < report.subsets.size(); ++idx) {
      const auto i = report.subsets[idx];
      out << harness::to_string(s.metric) << ',' << i << ',' << (i + 1) << ',' << (last - i) << ','
          << format_number(s.raw[idx]) << ',' << format_number(s.scaled[idx]) << ','
          << to_string(s.orientation) << '\n';
    }
  }
}

void write_csv(const harness::ExternalReport& report, std::ostream& out) {
  out << "metric,raw,scaled,orientation\n";
  for (const auto& s : report.scores) {
    out << harness::to_string(s.metric) << ',' << format_number(s.raw) << ','
        << (s.scaled ? format_number(*s.scaled) : std::string()) << ',' << to_string(s.orientation)
        << '\n';
  }
}

void save_text(const std::string& text, const std::filesystem::path& path) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + tmp.string());
    out << text;
    if (!out) throw InputError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw InputError("cannot rename onto " + path.string());
}

json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

harness::MetricReport load_sweep(const std::filesystem::path& path) {
  return sweep_from_json(load_json(path));
}

} // namespace mcmetrics::report
