#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace mcmetrics {

// Storage precision of a matrix on disk. Values are always held as double in
// memory; the tag only decides how write_matrix encodes them.
enum class Dtype : std::uint8_t { F32 = 1, F64 = 2 };

/// Dense, row-major, immutable table of finite reals.
///
/// Carries feature embeddings, raw pixels, per-sample label probabilities and
/// covariance matrices alike. rows and cols are both at least 1.
class Matrix {
public:
  /// Throws InputError on a shape mismatch, an empty dimension or a
  /// non-finite value.
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data,
         Dtype dtype = Dtype::F64);

  static Matrix zeros(std::size_t rows, std::size_t cols);
  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> diag);
  /// Rows of `source` selected by `indices`, in the given order.
  static Matrix select_rows(const Matrix& source, std::span<const std::size_t> indices);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  Dtype dtype() const noexcept { return dtype_; }

  std::span<const double> data() const noexcept { return data_; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  bool is_square() const noexcept { return rows_ == cols_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> data_;
  Dtype dtype_;
};

/// Same shape, same dtype tag and identical bit patterns in every cell.
bool bitwise_equal(const Matrix& a, const Matrix& b) noexcept;

class LabelVector {
public:
  /// Throws InputError if `labels` is empty, num_classes is 0 or a label is
  /// out of range.
  LabelVector(std::vector<std::uint32_t> labels, std::uint32_t num_classes);

  std::span<const std::uint32_t> labels() const noexcept { return labels_; }
  std::uint32_t num_classes() const noexcept { return num_classes_; }
  std::size_t size() const noexcept { return labels_.size(); }
  std::uint32_t operator[](std::size_t i) const noexcept { return labels_[i]; }

  /// Per-class sample counts, length num_classes.
  std::vector<std::size_t> class_counts() const;

  friend bool operator==(const LabelVector&, const LabelVector&) = default;

private:
  std::vector<std::uint32_t> labels_;
  std::uint32_t num_classes_;
};

// Row-stochastic check used for label-probability matrices: every entry in
// [0, 1] and every row summing to 1 within `tol`. Throws InputError.
void validate_probability_rows(const Matrix& probs, double tol = 1e-5);

/// Features plus class labels, optionally with per-sample label
/// probabilities p(y|x) (n x num_classes).
class LabeledDataset {
public:
  LabeledDataset(Matrix features, LabelVector labels, std::optional<Matrix> probs = std::nullopt);

  const Matrix& features() const noexcept { return features_; }
  const LabelVector& labels() const noexcept { return labels_; }
  const std::optional<Matrix>& probs() const noexcept { return probs_; }
  std::size_t size() const noexcept { return labels_.size(); }
  std::uint32_t num_classes() const noexcept { return labels_.num_classes(); }

private:
  Matrix features_;
  LabelVector labels_;
  std::optional<Matrix> probs_;
};

} // namespace mcmetrics
