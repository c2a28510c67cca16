#pragma once

// Classifier-probability metrics: Inception Score and MODE score. Both
// consume p(y|x) rows produced elsewhere (the feature extractor); no network
// runs here.

#include "mcmetrics/matrix.hpp"
#include "mcmetrics/stats.hpp"

namespace mcmetrics::scores {

/// n x C matrix whose rows are p(y|x): entries in [0, 1], rows summing to 1
/// within 1e-5.
class LabelProbMatrix {
public:
  explicit LabelProbMatrix(Matrix probs);

  const Matrix& matrix() const noexcept { return probs_; }
  std::size_t samples() const noexcept { return probs_.rows(); }
  std::size_t classes() const noexcept { return probs_.cols(); }

private:
  Matrix probs_;
};

/// p(y): column means of the rows, renormalized to sum to 1.
Distribution marginal(const LabelProbMatrix& probs);

/// exp(E_x KL(p(y|x) || p(y))), natural log. In [1, C].
double inception_score(const LabelProbMatrix& probs);

struct SplitScore {
  double mean = 0.0;
  double stddev = 0.0;
};

/// Inception Score over `splits` contiguous, near-equal chunks (the
/// convention of the original IS code); population std across chunks.
/// splits == 1 gives {inception_score(probs), 0}.
SplitScore inception_score_split(const LabelProbMatrix& probs, std::size_t splits);

/// exp(E_x KL(p(y|x) || p*(y)) - KL(p(y) || p*(y))) with p(y) = marginal(probs)
/// and p*(y) = train_dist.
double mode_score(const LabelProbMatrix& probs, const Distribution& train_dist);

} // namespace mcmetrics::scores
