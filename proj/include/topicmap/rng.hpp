#pragma once

#include <cstdint>

namespace topicmap {

/// Counter-based generator: every draw is a pure function of
/// (seed, stream, counter), so results do not depend on call order,
/// thread scheduling, or the standard library's distribution code.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept;

  std::uint64_t bits(std::uint64_t counter) const noexcept;
  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform(std::uint64_t counter) const noexcept;
  /// Uniform integer in [0, n); n must be positive.
  std::uint64_t below(std::uint64_t counter, std::uint64_t n) const noexcept;
  /// Standard normal via Box-Muller on counters 2c and 2c+1.
  double normal(std::uint64_t counter) const noexcept;

  CounterRng substream(std::uint64_t stream) const noexcept;

 private:
  std::uint64_t seed_;
  std::uint64_t key_;
};

/// Sequential view over a CounterRng.
class RngStream {
 public:
  explicit RngStream(CounterRng rng) noexcept : rng_(rng) {}

  std::uint64_t bits() noexcept { return rng_.bits(counter_++); }
  double uniform() noexcept { return rng_.uniform(counter_++); }
  std::uint64_t below(std::uint64_t n) noexcept { return rng_.below(counter_++, n); }
  double normal() noexcept { return rng_.normal(counter_++); }

 private:
  CounterRng rng_;
  std::uint64_t counter_ = 0;
};

}  // namespace topicmap
