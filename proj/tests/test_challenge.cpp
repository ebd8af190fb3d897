#include <doctest.h>

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "puflab/challenge.hpp"
#include "puflab/rng.hpp"

using namespace puflab;

namespace {

Challenge challenge_from_mask(std::uint64_t mask, int width) {
  Challenge c(width);
  for (int i = 0; i < width; ++i) c[i] = (mask >> i) & 1u;
  return c;
}

}  // namespace

TEST_CASE("transform of fixed vectors") {
  CHECK(transform_challenge({1, 1, 1, 1}) ==
        TransformedChallenge{1.0, 1.0, 1.0, 1.0});
  CHECK(transform_challenge({0, 0, 0, 0}) ==
        TransformedChallenge{1.0, -1.0, 1.0, -1.0});
  CHECK(transform_challenge({1, 0, 1, 1}) ==
        TransformedChallenge{-1.0, -1.0, 1.0, 1.0});
  CHECK(transform_challenge({1}) == TransformedChallenge{1.0});
  CHECK(transform_challenge({0}) == TransformedChallenge{-1.0});
}

TEST_CASE("inverse_transform of fixed vectors") {
  CHECK(inverse_transform({1.0, 1.0, 1.0, 1.0}) == Challenge{1, 1, 1, 1});
  CHECK(inverse_transform({1.0, -1.0, 1.0, -1.0}) == Challenge{0, 0, 0, 0});
  CHECK(inverse_transform({-1.0, -1.0, 1.0, 1.0}) == Challenge{1, 0, 1, 1});
}

TEST_CASE("transform and inverse are a bijection for every small challenge") {
  for (int n = 1; n <= 12; ++n) {
    for (std::uint64_t m = 0; m < (1ull << n); ++m) {
      const Challenge c = challenge_from_mask(m, n);
      CHECK(inverse_transform(transform_challenge(c)) == c);
    }
  }
}

TEST_CASE("suffix structure links adjacent transform elements") {
  SplitMix64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const Challenge c = random_challenge(rng, 24);
    const TransformedChallenge phi = transform_challenge(c);
    REQUIRE(phi.size() == 24);
    CHECK(phi[23] == 2.0 * c[23] - 1.0);
    for (int i = 0; i < 23; ++i) {
      CHECK(phi[i] == (2.0 * c[i] - 1.0) * phi[i + 1]);
    }
  }
}

TEST_CASE("flipping bit i negates phi_1..phi_i only") {
  SplitMix64 rng(18);
  const Challenge c = random_challenge(rng, 16);
  const TransformedChallenge phi = transform_challenge(c);
  for (int flip = 0; flip < 16; ++flip) {
    Challenge d = c;
    d[flip] ^= 1u;
    const TransformedChallenge psi = transform_challenge(d);
    for (int i = 0; i < 16; ++i) {
      if (i <= flip) {
        CHECK(psi[i] == -phi[i]);
      } else {
        CHECK(psi[i] == phi[i]);
      }
    }
  }
}

TEST_CASE("transform rejects empty and non-binary input") {
  CHECK_THROWS_AS(transform_challenge({}), std::invalid_argument);
  CHECK_THROWS_AS(transform_challenge({1, 2, 0}), std::invalid_argument);
  CHECK_THROWS_AS(inverse_transform({1.0, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(inverse_transform({}), std::invalid_argument);
}

TEST_CASE("random_challenge is deterministic and seed-sensitive") {
  SplitMix64 a(5);
  SplitMix64 b(5);
  SplitMix64 c(6);
  const Challenge ca = random_challenge(a, 64);
  CHECK(ca == random_challenge(b, 64));
  CHECK(ca != random_challenge(c, 64));
}

TEST_CASE("random_challenge bits are unbiased per position") {
  SplitMix64 rng(7);
  std::vector<int> ones(64, 0);
  const int draws = 10000;
  for (int t = 0; t < draws; ++t) {
    const Challenge c = random_challenge(rng, 64);
    for (int i = 0; i < 64; ++i) ones[i] += c[i];
  }
  for (int i = 0; i < 64; ++i) {
    const double mean = static_cast<double>(ones[i]) / draws;
    CHECK(mean >= 0.45);
    CHECK(mean <= 0.55);
  }
}

TEST_CASE("bitstring serialization roundtrips and validates") {
  const Challenge c = {1, 0, 1, 1, 0};
  CHECK(to_bitstring(c) == "10110");
  CHECK(challenge_from_bitstring("10110") == c);
  CHECK(challenge_from_bitstring(to_bitstring(c)) == c);
  CHECK_THROWS_AS(challenge_from_bitstring(""), std::invalid_argument);
  CHECK_THROWS_AS(challenge_from_bitstring("10120"), std::invalid_argument);
  CHECK_THROWS_AS(challenge_from_bitstring("10 10"), std::invalid_argument);
}
