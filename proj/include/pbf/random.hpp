#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>

#include "pbf/murmur3.hpp"

namespace pbf {

/// SplitMix64 (Steele, Lea, Flood 2014): state += 0x9e3779b97f4a7c15, then the
/// mix64 finalizer (multipliers 0xbf58476d1ce4e5b9, 0x94d049bb133111eb, shifts
/// 30/27/31). split(i) derives an independent stream for shard i.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) noexcept : seed_(seed), state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  SplitMix64 split(std::uint64_t stream) const noexcept { return SplitMix64(derive_seed(seed_, stream)); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Unbiased integer in [0, bound), Lemire's multiply-and-reject.
  std::uint64_t below(std::uint64_t bound) noexcept {
    using u128 = unsigned __int128;
    u128 prod = static_cast<u128>((*this)()) * bound;
    auto low = static_cast<std::uint64_t>(prod);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        prod = static_cast<u128>((*this)()) * bound;
        low = static_cast<std::uint64_t>(prod);
      }
    }
    return static_cast<std::uint64_t>(prod >> 64);
  }

  bool bernoulli(double p) noexcept { return uniform01() < p; }

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
};

inline constexpr std::size_t kRandomElementBytes = 16;
using RandomElement = std::array<std::byte, kRandomElementBytes>;

inline RandomElement random_element(SplitMix64& rng) noexcept {
  RandomElement e;
  for (std::size_t w = 0; w < kRandomElementBytes / 8; ++w) {
    const std::uint64_t v = rng();
    for (std::size_t b = 0; b < 8; ++b) e[w * 8 + b] = static_cast<std::byte>((v >> (8 * b)) & 0xff);
  }
  return e;
}

}  // namespace pbf
