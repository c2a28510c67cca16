#include "mcmetrics/binning.hpp"
#include "mcmetrics/eigen_sym.hpp"
#include "mcmetrics/fid.hpp"
#include "mcmetrics/harness.hpp"
#include "mcmetrics/rng.hpp"

#include <benchmark/benchmark.h>

using namespace mcmetrics;

namespace {

Matrix gaussian(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<double> v(rows * cols);
  for (auto& x : v) x = rng.normal();
  return Matrix(rows, cols, std::move(v));
}

void BM_FitBins(benchmark::State& state) {
  const auto data = harness::synth_mixture(10, 500, 16, 20.0, 7).features();
  const auto k = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(binning::fit_bins(data, k, 1));
}
BENCHMARK(BM_FitBins)->Arg(10)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_SymmetricEigen(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const auto cov = gaussian_summary(gaussian(4 * d, d, 3)).cov;
  for (auto _ : state) benchmark::DoNotOptimize(symmetric_eigen(cov));
}
BENCHMARK(BM_SymmetricEigen)->Arg(16)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_FrechetDistance(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const auto a = gaussian_summary(gaussian(4 * d, d, 1));
  const auto b = gaussian_summary(gaussian(4 * d, d, 2));
  for (auto _ : state) benchmark::DoNotOptimize(fid::frechet_distance(a, b));
}
BENCHMARK(BM_FrechetDistance)->Arg(16)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_NdbScore(benchmark::State& state) {
  const auto ref = harness::synth_mixture(10, 500, 16, 20.0, 7).features();
  const auto test = harness::synth_mixture(10, 500, 16, 20.0, 8).features();
  const auto model = binning::fit_bins(ref, 100, 1);
  for (auto _ : state) benchmark::DoNotOptimize(binning::ndb_score(model, ref, test));
}
BENCHMARK(BM_NdbScore)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
