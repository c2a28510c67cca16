#pragma once

#include <cstdint>

namespace mcmetrics {

/// SplitMix64 (Steele, Lea & Flood). Fully specified by its constants so the
/// same seed yields the same stream on every platform and standard library:
///
///   state += 0x9E3779B97F4A7C15
///   z = state
///   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///   return z ^ (z >> 31)
///
/// Distribution helpers are implemented here rather than taken from
/// <random>, whose distributions are implementation-defined.
class SplitMix64 {
public:
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next() noexcept;

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept;

  /// Uniform integer in [0, bound), bound > 0. Rejection sampling, no bias.
  std::uint64_t below(std::uint64_t bound) noexcept;

  /// Standard normal via the Box-Muller transform; the second variate of
  /// each pair is cached.
  double normal() noexcept;

private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Independent sub-stream seed for (seed, stream); one SplitMix64 output of
/// the combined key.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

} // namespace mcmetrics
