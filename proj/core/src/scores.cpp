#include "mcmetrics/scores.hpp"

#include "mcmetrics/errors.hpp"

#include <cmath>
#include <string>

namespace mcmetrics::scores {

namespace {

double mean_row_kl(const Matrix& probs, std::size_t begin, std::size_t end,
                   std::span<const double> q) {
  double sum = 0.0;
  for (std::size_t r = begin; r < end; ++r) sum += kl_divergence(probs.row(r), q);
  return sum / static_cast<double>(end - begin);
}

Distribution column_mean(const Matrix& probs, std::size_t begin, std::size_t end) {
  std::vector<double> mean(probs.cols(), 0.0);
  for (std::size_t r = begin; r < end; ++r) {
    auto row = probs.row(r);
    for (std::size_t c = 0; c < mean.size(); ++c) mean[c] += row[c];
  }
  for (double& m : mean) m /= static_cast<double>(end - begin);
  return Distribution::normalized(mean);
}

} // namespace

LabelProbMatrix::LabelProbMatrix(Matrix probs) : probs_(std::move(probs)) {
  validate_probability_rows(probs_);
}

Distribution marginal(const LabelProbMatrix& probs) {
  return column_mean(probs.matrix(), 0, probs.samples());
}

double inception_score(const LabelProbMatrix& probs) {
  const auto py = marginal(probs);
  return std::exp(mean_row_kl(probs.matrix(), 0, probs.samples(), py));
}

SplitScore inception_score_split(const LabelProbMatrix& probs, std::size_t splits) {
  const std::size_t n = probs.samples();
  if (splits == 0 || splits > n) {
    throw InputError("inception_score_split: splits must be in [1, " + std::to_string(n) + "]");
  }
  std::vector<double> parts;
  parts.reserve(splits);
  for (std::size_t s = 0; s < splits; ++s) {
    const std::size_t begin = s * n / splits;
    const std::size_t end = (s + 1) * n / splits;
    const auto py = column_mean(probs.matrix(), begin, end);
    parts.push_back(std::exp(mean_row_kl(probs.matrix(), begin, end, py)));
  }
  SplitScore out;
  for (double p : parts) out.mean += p;
  out.mean /= static_cast<double>(splits);
  for (double p : parts) out.stddev += (p - out.mean) * (p - out.mean);
  out.stddev = std::sqrt(out.stddev / static_cast<double>(splits));
  return out;
}

double mode_score(const LabelProbMatrix& probs, const Distribution& train_dist) {
  if (train_dist.size() != probs.classes()) {
    throw InputError("mode_score: training distribution has " + std::to_string(train_dist.size()) +
                     " classes, probabilities have " + std::to_string(probs.classes()));
  }
  const auto py = marginal(probs);
  const double expected = mean_row_kl(probs.matrix(), 0, probs.samples(), train_dist);
  return std::exp(expected - kl_divergence(py, train_dist));
}

} // namespace mcmetrics::scores
