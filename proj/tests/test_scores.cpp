#include <doctest.h>

#include "mcmetrics/errors.hpp"
#include "mcmetrics/rng.hpp"
#include "mcmetrics/scores.hpp"

#include <cmath>

using namespace mcmetrics;
using namespace mcmetrics::scores;
using doctest::Approx;

namespace {

LabelProbMatrix one_hot(std::size_t classes, std::size_t per_class) {
  std::vector<double> p(classes * per_class * classes, 0.0);
  for (std::size_t r = 0; r < classes * per_class; ++r) p[r * classes + r % classes] = 1.0;
  return LabelProbMatrix(Matrix(classes * per_class, classes, std::move(p)));
}

LabelProbMatrix random_stochastic(SplitMix64& rng, std::size_t n, std::size_t c) {
  std::vector<double> p(n * c);
  for (std::size_t r = 0; r < n; ++r) {
    double s = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      // Sharp rows: exponentials raised to a power.
      p[r * c + j] = std::pow(-std::log(1.0 - rng.uniform()), 3.0);
      s += p[r * c + j];
    }
    for (std::size_t j = 0; j < c; ++j) p[r * c + j] /= s;
  }
  return LabelProbMatrix(Matrix(n, c, std::move(p)));
}

} // namespace

TEST_CASE("LabelProbMatrix validation") {
  CHECK_NOTHROW(LabelProbMatrix(Matrix(1, 2, {0.3, 0.7})));
  CHECK_NOTHROW(LabelProbMatrix(Matrix(1, 2, {0.3, 0.700009})));
  CHECK_THROWS_AS(LabelProbMatrix(Matrix(1, 2, {0.3, 0.8})), InputError);
  CHECK_THROWS_AS(LabelProbMatrix(Matrix(1, 2, {-0.1, 1.1})), InputError);
}

TEST_CASE("marginal") {
  auto m = marginal(LabelProbMatrix(Matrix(2, 2, {1, 0, 0, 1})));
  CHECK(m[0] == 0.5);
  CHECK(m[1] == 0.5);
  m = marginal(LabelProbMatrix(Matrix(1, 2, {0.3, 0.7})));
  CHECK(m[0] == Approx(0.3));
  CHECK(m[1] == Approx(0.7));
  m = marginal(LabelProbMatrix(Matrix(2, 2, {0.8, 0.2, 0.2, 0.8})));
  CHECK(m[0] == Approx(0.5).epsilon(1e-15));
}

TEST_CASE("inception_score") {
  CHECK(inception_score(LabelProbMatrix(Matrix(3, 2, {0.3, 0.7, 0.3, 0.7, 0.3, 0.7}))) == Approx(1.0).epsilon(1e-15));
  CHECK(inception_score(one_hot(10, 7)) == Approx(10.0).epsilon(1e-12));

  // Oracle: both rows have KL 0.8 ln 1.6 + 0.2 ln 0.4 against (0.5, 0.5).
  const double kl = 0.8 * std::log(1.6) + 0.2 * std::log(0.4);
  CHECK(std::exp(kl) == Approx(1.212573).epsilon(1e-6));
  CHECK(inception_score(LabelProbMatrix(Matrix(2, 2, {0.8, 0.2, 0.2, 0.8}))) == Approx(std::exp(kl)).epsilon(1e-14));
}

TEST_CASE("mode_score") {
  const auto probs = one_hot(2, 50);
  // Oracle: E_x KL(onehot || p*) = 0.5 ln(1/0.9) + 0.5 ln(1/0.1), and
  // KL(p(y) || p*) = 0.5 ln(0.5/0.9) + 0.5 ln(0.5/0.1).
  const double expected_kl = 0.5 * std::log(1 / 0.9) + 0.5 * std::log(1 / 0.1);
  const double marginal_kl = 0.5 * std::log(0.5 / 0.9) + 0.5 * std::log(0.5 / 0.1);
  CHECK(expected_kl == Approx(1.203973).epsilon(1e-6));
  CHECK(marginal_kl == Approx(0.510826).epsilon(1e-6));
  CHECK(mode_score(probs, Distribution({0.9, 0.1})) == Approx(std::exp(expected_kl - marginal_kl)).epsilon(1e-13));
  CHECK(mode_score(probs, Distribution({0.9, 0.1})) == Approx(2.0).epsilon(1e-6));

  const auto ten = one_hot(10, 3);
  CHECK(mode_score(ten, Distribution(std::vector(10, 0.1))) == Approx(10.0).epsilon(1e-12));
  CHECK_THROWS_AS(mode_score(ten, Distribution({0.5, 0.5})), InputError);
}

TEST_CASE("property: IS bounds, permutation and duplication invariance; MODE reduces to IS") {
  SplitMix64 rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.below(40), c = 2 + rng.below(8);
    const auto p = random_stochastic(rng, n, c);
    const double is = inception_score(p);
    CHECK(is >= 1.0 - 1e-12);
    CHECK(is <= static_cast<double>(c) + 1e-9);
    CHECK(std::abs(mode_score(p, marginal(p)) - is) <= 1e-9);

    std::vector<double> reversed, doubled;
    for (std::size_t r = n; r-- > 0;) {
      auto row = p.matrix().row(r);
      reversed.insert(reversed.end(), row.begin(), row.end());
    }
    doubled.assign(p.matrix().data().begin(), p.matrix().data().end());
    doubled.insert(doubled.end(), p.matrix().data().begin(), p.matrix().data().end());
    CHECK(inception_score(LabelProbMatrix(Matrix(n, c, reversed))) == Approx(is).epsilon(1e-12));
    const LabelProbMatrix twice(Matrix(2 * n, c, doubled));
    CHECK(inception_score(twice) == Approx(is).epsilon(1e-12));
    const Distribution prior = Distribution::normalized(std::vector(c, 1.0));
    CHECK(mode_score(twice, prior) == Approx(mode_score(p, prior)).epsilon(1e-12));
  }
}

TEST_CASE("split inception score") {
  const auto p = one_hot(4, 8);
  const auto one = inception_score_split(p, 1);
  CHECK(one.mean == inception_score(p));
  CHECK(one.stddev == 0.0);
  // Contiguous quarters of an interleaved balanced set are themselves balanced.
  const auto four = inception_score_split(p, 4);
  CHECK(four.mean == Approx(4.0).epsilon(1e-12));
  CHECK(four.stddev == Approx(0.0).epsilon(1e-12).scale(1.0));
  CHECK_THROWS_AS(inception_score_split(p, 0), InputError);
  CHECK_THROWS_AS(inception_score_split(p, 33), InputError);
}
