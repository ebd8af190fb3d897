#pragma once

#include <cmath>
#include <cstdint>
#include <utility>

namespace puflab {

// splitmix64. Not cryptographic. Every random quantity in the library is
// drawn from an explicitly seeded stream so that runs are reproducible and
// independent streams can be derived per index (see derive_stream).
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~std::uint64_t{0}; }

  result_type operator()() noexcept {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

// Bijective finalizer of splitmix64.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Seed of substream `index` under a parent seed. Substreams for distinct
// indices are decorrelated, so element i of a dataset can be generated on
// its own, in any order or chunking, with identical results.
constexpr std::uint64_t derive_stream(std::uint64_t seed,
                                      std::uint64_t index) noexcept {
  return mix64(mix64(seed + 0x9e3779b97f4a7c15ULL * (index + 1)) ^
               0xbf58476d1ce4e5b9ULL);
}

// Uniform in [0, 1), 53 bits.
inline double uniform_unit(SplitMix64& g) noexcept {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

inline int uniform_bit(SplitMix64& g) noexcept {
  return static_cast<int>(g() >> 63);
}

// Unbiased integer in [0, bound), bound >= 1. Mask-and-reject.
inline std::uint64_t uniform_below(SplitMix64& g,
                                   std::uint64_t bound) noexcept {
  if (bound <= 1) return 0;
  std::uint64_t mask = bound - 1;
  mask |= mask >> 1;
  mask |= mask >> 2;
  mask |= mask >> 4;
  mask |= mask >> 8;
  mask |= mask >> 16;
  mask |= mask >> 32;
  for (;;) {
    const std::uint64_t r = g() & mask;
    if (r < bound) return r;
  }
}

// Standard normal, Box-Muller. Consumes exactly two words per call.
inline double normal(SplitMix64& g) noexcept {
  const double u1 = static_cast<double>((g() >> 11) + 1) * 0x1.0p-53;  // (0,1]
  const double u2 = static_cast<double>(g() >> 11) * 0x1.0p-53;        // [0,1)
  constexpr double two_pi = 6.28318530717958647692528676656;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

template <class RandomIt>
void fisher_yates_shuffle(RandomIt first, RandomIt last, SplitMix64& g) {
  const auto n = static_cast<std::uint64_t>(last - first);
  for (std::uint64_t i = n; i > 1; --i) {
    const std::uint64_t j = uniform_below(g, i);
    using std::swap;
    swap(first[i - 1], first[j]);
  }
}

}  // namespace puflab
