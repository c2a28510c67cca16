#pragma once

// Report serialization. JSON is canonical: keys sorted, every float written
// with at most 9 significant digits, so identical sweeps give identical bytes.

#include "mcmetrics/harness.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace mcmetrics::report {

nlohmann::json to_json(const harness::MetricReport& report);
harness::MetricReport sweep_from_json(const nlohmann::json& j);

nlohmann::json to_json(const harness::ExternalReport& report);

/// Pretty-printed canonical JSON text, newline-terminated.
std::string dump(const nlohmann::json& j);

/// One row per subset per metric:
/// metric,subset,classes_left,classes_removed,raw,scaled,orientation
void write_csv(const harness::MetricReport& report, std::ostream& out);
/// metric,raw,scaled,orientation
void write_csv(const harness::ExternalReport& report, std::ostream& out);

void save_text(const std::string& text, const std::filesystem::path& path);
nlohmann::json load_json(const std::filesystem::path& path);
harness::MetricReport load_sweep(const std::filesystem::path& path);

} // namespace mcmetrics::report
