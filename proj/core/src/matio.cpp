#include "mcmetrics/matio.hpp"

#include "mcmetrics/errors.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

namespace mcmetrics {

const char* to_string(FormatErrorKind kind) noexcept {
  switch (kind) {
  case FormatErrorKind::BadMagic: return "bad magic";
  case FormatErrorKind::UnsupportedVersion: return "unsupported version";
  case FormatErrorKind::UnsupportedDtype: return "unsupported dtype";
  case FormatErrorKind::Truncated: return "truncated";
  case FormatErrorKind::NonFinite: return "non-finite value";
  case FormatErrorKind::InvalidHeader: return "invalid header";
  case FormatErrorKind::TrailingBytes: return "trailing bytes";
  case FormatErrorKind::LabelOutOfRange: return "label out of range";
  case FormatErrorKind::RaggedRow: return "ragged row";
  case FormatErrorKind::ParseError: return "parse error";
  case FormatErrorKind::Io: return "i/o error";
  }
  return "format error";
}

namespace matio {
namespace {

constexpr std::array<char, 4> kMatrixMagic{'M', 'G', 'M', '1'};
constexpr std::array<char, 4> kLabelMagic{'M', 'G', 'L', '1'};
constexpr std::uint8_t kVersion = 1;
// Payloads are streamed in blocks so a lying header cannot force a huge
// allocation before truncation is detected.
constexpr std::size_t kBlockValues = 1 << 16;

template <typename UInt>
void put_le(std::string& buf, UInt v) {
  for (std::size_t i = 0; i < sizeof(UInt); ++i) {
    buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
}

template <typename UInt>
UInt get_le(const unsigned char* p) {
  UInt v = 0;
  for (std::size_t i = 0; i < sizeof(UInt); ++i) v |= static_cast<UInt>(p[i]) << (8 * i);
  return v;
}

void read_exact(std::istream& in, unsigned char* dst, std::size_t n, const char* what) {
  in.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) {
    throw FormatError(FormatErrorKind::Truncated,
                      std::string(what) + ": expected " + std::to_string(n) + " bytes, got " +
                          std::to_string(in.gcount()));
  }
}

void expect_eof(std::istream& in, const char* what) {
  if (in.peek() != std::char_traits<char>::eof()) {
    throw FormatError(FormatErrorKind::TrailingBytes,
                      std::string(what) + ": payload is longer than the header declares");
  }
}

void write_all(std::ostream& out, const std::string& buf) {
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw FormatError(FormatErrorKind::Io, "write failed");
}

} // namespace

std::size_t write_matrix(const Matrix& m, std::ostream& out) {
  const std::size_t elem = m.dtype() == Dtype::F32 ? 4 : 8;
  std::string buf;
  buf.reserve(kMatrixHeaderBytes + m.data().size() * elem);
  buf.append(kMatrixMagic.data(), kMatrixMagic.size());
  buf.push_back(static_cast<char>(kVersion));
  buf.push_back(static_cast<char>(m.dtype()));
  put_le<std::uint16_t>(buf, 0);
  put_le<std::uint64_t>(buf, m.rows());
  put_le<std::uint64_t>(buf, m.cols());
  if (m.dtype() == Dtype::F32) {
    for (double v : m.data()) put_le(buf, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  } else {
    for (double v : m.data()) put_le(buf, std::bit_cast<std::uint64_t>(v));
  }
  write_all(out, buf);
  return buf.size();
}

Matrix read_matrix(std::istream& in) {
  std::array<unsigned char, kMatrixHeaderBytes> h{};
  read_exact(in, h.data(), h.size(), "matrix header");
  if (!std::equal(kMatrixMagic.begin(), kMatrixMagic.end(), h.begin(),
                  [](char a, unsigned char b) { return static_cast<unsigned char>(a) == b; })) {
    throw FormatError(FormatErrorKind::BadMagic, "not an MGM1 matrix file");
  }
  if (h[4] != kVersion) {
    throw FormatError(FormatErrorKind::UnsupportedVersion,
                      "MGM1 version " + std::to_string(h[4]));
  }
  const std::uint8_t dtype_tag = h[5];
  if (dtype_tag != static_cast<std::uint8_t>(Dtype::F32) &&
      dtype_tag != static_cast<std::uint8_t>(Dtype::F64)) {
    throw FormatError(FormatErrorKind::UnsupportedDtype, "dtype tag " + std::to_string(dtype_tag));
  }
  if (get_le<std::uint16_t>(h.data() + 6) != 0) {
    throw FormatError(FormatErrorKind::InvalidHeader, "reserved bytes must be zero");
  }
  const auto rows = get_le<std::uint64_t>(h.data() + 8);
  const auto cols = get_le<std::uint64_t>(h.data() + 16);
  if (rows == 0 || cols == 0) {
    throw FormatError(FormatErrorKind::InvalidHeader, "matrix must be at least 1x1");
  }
  const auto dtype = static_cast<Dtype>(dtype_tag);
  const std::size_t elem = dtype == Dtype::F32 ? 4 : 8;
  if (rows > std::numeric_limits<std::size_t>::max() / cols ||
      rows * cols > std::numeric_limits<std::size_t>::max() / elem) {
    throw FormatError(FormatErrorKind::InvalidHeader, "matrix dimensions overflow");
  }
  const std::size_t count = rows * cols;

  std::vector<double> data;
  std::vector<unsigned char> block;
  for (std::size_t done = 0; done < count;) {
    const std::size_t n = std::min(kBlockValues, count - done);
    block.resize(n * elem);
    read_exact(in, block.data(), block.size(), "matrix payload");
    data.reserve(done + n);
    for (std::size_t i = 0; i < n; ++i) {
      const double v = dtype == Dtype::F32
                           ? static_cast<double>(std::bit_cast<float>(
                                 get_le<std::uint32_t>(block.data() + i * 4)))
                           : std::bit_cast<double>(get_le<std::uint64_t>(block.data() + i * 8));
      if (!std::isfinite(v)) {
        const std::size_t at = done + i;
        throw FormatError(FormatErrorKind::NonFinite,
                          "row " + std::to_string(at / cols) + ", column " +
                              std::to_string(at % cols));
      }
      data.push_back(v);
    }
    done += n;
  }
  expect_eof(in, "matrix");
  return Matrix(rows, cols, std::move(data), dtype);
}

std::size_t write_labels(const LabelVector& labels, std::ostream& out) {
  std::string buf;
  buf.reserve(kLabelHeaderBytes + labels.size() * 4);
  buf.append(kLabelMagic.data(), kLabelMagic.size());
  buf.push_back(static_cast<char>(kVersion));
  buf.append(3, '\0');
  put_le<std::uint64_t>(buf, labels.size());
  put_le<std::uint32_t>(buf, labels.num_classes());
  for (auto l : labels.labels()) put_le<std::uint32_t>(buf, l);
  write_all(out, buf);
  return buf.size();
}

LabelVector read_labels(std::istream& in) {
  std::array<unsigned char, kLabelHeaderBytes> h{};
  read_exact(in, h.data(), h.size(), "label header");
  if (!std::equal(kLabelMagic.begin(), kLabelMagic.end(), h.begin(),
                  [](char a, unsigned char b) { return static_cast<unsigned char>(a) == b; })) {
    throw FormatError(FormatErrorKind::BadMagic, "not an MGL1 label file");
  }
  if (h[4] != kVersion) {
    throw FormatError(FormatErrorKind::UnsupportedVersion,
                      "MGL1 version " + std::to_string(h[4]));
  }
  if (h[5] != 0 || h[6] != 0 || h[7] != 0) {
    throw FormatError(FormatErrorKind::InvalidHeader, "reserved bytes must be zero");
  }
  const auto n = get_le<std::uint64_t>(h.data() + 8);
  const auto num_classes = get_le<std::uint32_t>(h.data() + 16);
  if (n == 0) throw FormatError(FormatErrorKind::InvalidHeader, "label file declares n = 0");
  if (num_classes == 0) {
    throw FormatError(FormatErrorKind::InvalidHeader, "label file declares zero classes");
  }
  if (n > std::numeric_limits<std::size_t>::max() / 4) {
    throw FormatError(FormatErrorKind::InvalidHeader, "label count overflows");
  }

  std::vector<std::uint32_t> labels;
  std::vector<unsigned char> block;
  for (std::size_t done = 0; done < n;) {
    const std::size_t count = std::min<std::size_t>(kBlockValues, n - done);
    block.resize(count * 4);
    read_exact(in, block.data(), block.size(), "label payload");
    labels.reserve(done + count);
    for (std::size_t i = 0; i < count; ++i) {
      const auto l = get_le<std::uint32_t>(block.data() + i * 4);
      if (l >= num_classes) {
        throw FormatError(FormatErrorKind::LabelOutOfRange,
                          "label " + std::to_string(l) + " at index " +
                              std::to_string(done + i) + " with num_classes " +
                              std::to_string(num_classes));
      }
      labels.push_back(l);
    }
    done += count;
  }
  expect_eof(in, "labels");
  return LabelVector(std::move(labels), num_classes);
}

Matrix read_csv_matrix(std::istream& in, const CsvOptions& options) {
  std::vector<double> data;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::string line;
  std::size_t line_no = 0;
  bool header_pending = options.skip_header;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (header_pending) {
      header_pending = false;
      continue;
    }

    std::size_t col = 0;
    std::size_t start = 0;
    while (true) {
      const std::size_t end = line.find(options.delimiter, start);
      std::string_view token(line.data() + start,
                             (end == std::string::npos ? line.size() : end) - start);
      while (!token.empty() && (token.front() == ' ' || token.front() == '\t')) token.remove_prefix(1);
      while (!token.empty() && (token.back() == ' ' || token.back() == '\t')) token.remove_suffix(1);
      if (!token.empty() && token.front() == '+') token.remove_prefix(1);
      ++col;
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
      if (token.empty() || ec != std::errc() || ptr != token.data() + token.size()) {
        throw FormatError(FormatErrorKind::ParseError,
                          "line " + std::to_string(line_no) + ", column " + std::to_string(col) +
                              ": cannot parse '" + std::string(token) + "'");
      }
      if (!std::isfinite(v)) {
        throw FormatError(FormatErrorKind::NonFinite,
                          "line " + std::to_string(line_no) + ", column " + std::to_string(col));
      }
      data.push_back(v);
      if (end == std::string::npos) break;
      start = end + 1;
    }

    if (rows == 0) {
      cols = col;
    } else if (col != cols) {
      throw FormatError(FormatErrorKind::RaggedRow,
                        "line " + std::to_string(line_no) + " has " + std::to_string(col) +
                            " fields, expected " + std::to_string(cols));
    }
    ++rows;
  }
  if (rows == 0) throw FormatError(FormatErrorKind::InvalidHeader, "CSV input has no data rows");
  return Matrix(rows, cols, std::move(data));
}

namespace {

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(FormatErrorKind::Io, "cannot open " + path.string());
  return in;
}

template <typename Fn>
void write_atomically(const std::filesystem::path& path, Fn&& fn) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError(FormatErrorKind::Io, "cannot open " + tmp.string());
    fn(out);
    out.flush();
    if (!out) throw FormatError(FormatErrorKind::Io, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw FormatError(FormatErrorKind::Io, "cannot rename onto " + path.string());
}

template <typename Fn>
auto with_path(const std::filesystem::path& path, Fn&& fn) {
  try {
    return fn();
  } catch (const FormatError& e) {
    throw FormatError(e.kind(), path.string() + ": " + e.detail());
  }
}

} // namespace

Matrix load_matrix(const std::filesystem::path& path) {
  auto in = open_in(path);
  return with_path(path, [&] { return read_matrix(in); });
}

void save_matrix(const Matrix& m, const std::filesystem::path& path) {
  write_atomically(path, [&](std::ostream& out) { write_matrix(m, out); });
}

LabelVector load_labels(const std::filesystem::path& path) {
  auto in = open_in(path);
  return with_path(path, [&] { return read_labels(in); });
}

void save_labels(const LabelVector& labels, const std::filesystem::path& path) {
  write_atomically(path, [&](std::ostream& out) { write_labels(labels, out); });
}

Matrix load_csv_matrix(const std::filesystem::path& path, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw FormatError(FormatErrorKind::Io, "cannot open " + path.string());
  return with_path(path, [&] { return read_csv_matrix(in, options); });
}

} // namespace matio
} // namespace mcmetrics
