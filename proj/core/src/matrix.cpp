#include "mcmetrics/matrix.hpp"

#include "mcmetrics/errors.hpp"

#include <bit>
#include <cmath>
#include <string>

namespace mcmetrics {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data, Dtype dtype)
    : rows_(rows), cols_(cols), data_(std::move(data)), dtype_(dtype) {
  if (rows_ == 0 || cols_ == 0) {
    throw InputError("matrix dimensions must be at least 1x1, got " + std::to_string(rows_) +
                     "x" + std::to_string(cols_));
  }
  if (data_.size() / cols_ != rows_ || data_.size() % cols_ != 0) {
    throw InputError("matrix data length " + std::to_string(data_.size()) +
                     " does not match " + std::to_string(rows_) + "x" + std::to_string(cols_));
  }
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) {
      throw InputError("non-finite matrix value at row " + std::to_string(i / cols_) +
                       ", column " + std::to_string(i % cols_));
    }
  }
}

Matrix Matrix::zeros(std::size_t rows, std::size_t cols) {
  return Matrix(rows, cols, std::vector<double>(rows * cols, 0.0));
}

Matrix Matrix::identity(std::size_t n) {
  std::vector<double> data(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) data[i * n + i] = 1.0;
  return Matrix(n, n, std::move(data));
}

Matrix Matrix::diagonal(std::span<const double> diag) {
  const std::size_t n = diag.size();
  std::vector<double> data(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) data[i * n + i] = diag[i];
  return Matrix(n, n, std::move(data));
}

Matrix Matrix::select_rows(const Matrix& source, std::span<const std::size_t> indices) {
  std::vector<double> data;
  data.reserve(indices.size() * source.cols());
  for (std::size_t idx : indices) {
    if (idx >= source.rows()) throw InputError("row index out of range");
    auto r = source.row(idx);
    data.insert(data.end(), r.begin(), r.end());
  }
  return Matrix(indices.size(), source.cols(), std::move(data), source.dtype());
}

bool bitwise_equal(const Matrix& a, const Matrix& b) noexcept {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.dtype() != b.dtype()) return false;
  auto da = a.data();
  auto db = b.data();
  for (std::size_t i = 0; i < da.size(); ++i) {
    if (std::bit_cast<std::uint64_t>(da[i]) != std::bit_cast<std::uint64_t>(db[i])) return false;
  }
  return true;
}

LabelVector::LabelVector(std::vector<std::uint32_t> labels, std::uint32_t num_classes)
    : labels_(std::move(labels)), num_classes_(num_classes) {
  if (num_classes_ == 0) throw InputError("num_classes must be at least 1");
  if (labels_.empty()) throw InputError("label vector must hold at least one label");
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] >= num_classes_) {
      throw InputError("label " + std::to_string(labels_[i]) + " at index " + std::to_string(i) +
                       " is not below num_classes " + std::to_string(num_classes_));
    }
  }
}

std::vector<std::size_t> LabelVector::class_counts() const {
  std::vector<std::size_t> counts(num_classes_, 0);
  for (auto l : labels_) ++counts[l];
  return counts;
}

void validate_probability_rows(const Matrix& probs, double tol) {
  for (std::size_t r = 0; r < probs.rows(); ++r) {
    double sum = 0.0;
    for (double v : probs.row(r)) {
      if (v < 0.0 || v > 1.0) {
        throw InputError("probability row " + std::to_string(r) + " has an entry outside [0, 1]");
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > tol) {
      throw InputError("probability row " + std::to_string(r) + " sums to " +
                       std::to_string(sum) + ", expected 1");
    }
  }
}

LabeledDataset::LabeledDataset(Matrix features, LabelVector labels, std::optional<Matrix> probs)
    : features_(std::move(features)), labels_(std::move(labels)), probs_(std::move(probs)) {
  if (features_.rows() != labels_.size()) {
    throw InputError("features have " + std::to_string(features_.rows()) + " rows but there are " +
                     std::to_string(labels_.size()) + " labels");
  }
  if (probs_) {
    if (probs_->rows() != labels_.size()) {
      throw InputError("probability matrix row count does not match label count");
    }
    if (probs_->cols() != labels_.num_classes()) {
      throw InputError("probability matrix has " + std::to_string(probs_->cols()) +
                       " columns but num_classes is " + std::to_string(labels_.num_classes()));
    }
    validate_probability_rows(*probs_);
  }
}

} // namespace mcmetrics
