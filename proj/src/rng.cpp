#include "topicmap/rng.hpp"

#include <cmath>
#include <numbers>

namespace topicmap {
namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
    : seed_(seed), key_(mix(seed + kGolden) ^ mix(stream * kGolden + 0x632BE59BD9B4E019ULL)) {}

std::uint64_t CounterRng::bits(std::uint64_t counter) const noexcept {
  return mix(mix(key_ + counter * kGolden) ^ key_);
}

double CounterRng::uniform(std::uint64_t counter) const noexcept {
  return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
}

std::uint64_t CounterRng::below(std::uint64_t counter, std::uint64_t n) const noexcept {
  const auto product = static_cast<unsigned __int128>(bits(counter)) * n;
  return static_cast<std::uint64_t>(product >> 64);
}

double CounterRng::normal(std::uint64_t counter) const noexcept {
  // 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - uniform(2 * counter);
  const double u2 = uniform(2 * counter + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

CounterRng CounterRng::substream(std::uint64_t stream) const noexcept {
  return CounterRng(seed_ ^ mix(key_), stream);
}

}  // namespace topicmap
