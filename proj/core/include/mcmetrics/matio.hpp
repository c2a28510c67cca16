#pragma once

// On-disk formats shared with the feature extractor.
//
// MGM1 matrix file, little-endian:
//   "MGM1" | version u8 = 1 | dtype u8 (1 = f32, 2 = f64) | reserved u16 = 0
//   | rows u64 | cols u64 | rows*cols values, row-major
//
// MGL1 label file, little-endian:
//   "MGL1" | version u8 = 1 | reserved u8[3] = 0 | n u64 | num_classes u32
//   | n u32 labels
//
// Readers reject short payloads, trailing bytes and non-finite values.

#include "mcmetrics/matrix.hpp"

#include <cstddef>
#include <filesystem>
#include <iosfwd>

namespace mcmetrics::matio {

inline constexpr std::size_t kMatrixHeaderBytes = 24;
inline constexpr std::size_t kLabelHeaderBytes = 20;

/// Encodes with the matrix's own dtype tag. Returns bytes written.
std::size_t write_matrix(const Matrix& m, std::ostream& out);
Matrix read_matrix(std::istream& in);

std::size_t write_labels(const LabelVector& labels, std::ostream& out);
LabelVector read_labels(std::istream& in);

struct CsvOptions {
  char delimiter = ',';
  bool skip_header = false;
};

/// One matrix row per non-empty line. Errors name the offending line and
/// column (both 1-based).
Matrix read_csv_matrix(std::istream& in, const CsvOptions& options = {});

Matrix load_matrix(const std::filesystem::path& path);
void save_matrix(const Matrix& m, const std::filesystem::path& path);
LabelVector load_labels(const std::filesystem::path& path);
void save_labels(const LabelVector& labels, const std::filesystem::path& path);
Matrix load_csv_matrix(const std::filesystem::path& path, const CsvOptions& options = {});

} // namespace mcmetrics::matio
