#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "puflab/rng.hpp"

namespace puflab {

// Challenge bits c_1..c_n, one byte per bit. Index 0 holds c_1, the bit of
// the stage nearest the signal entry. Bitstrings are serialized left to
// right as c_1..c_n. Values are exactly 0 or 1.
using Challenge = std::vector<std::uint8_t>;

// Parity transform phi_1..phi_n with phi_i = prod_{j=i..n} (2*c_j - 1).
// Every element is exactly -1.0 or +1.0. Under this encoding an arbiter
// chain's delay difference is linear in phi.
using TransformedChallenge = std::vector<double>;

// Suffix-product transform. Throws std::invalid_argument on an empty
// challenge or on bit values other than 0/1.
TransformedChallenge transform_challenge(const Challenge& c);

// Inverse of transform_challenge: c_n = (phi_n+1)/2 and
// c_i = (phi_i/phi_{i+1}+1)/2. Throws on elements outside {-1,+1}.
Challenge inverse_transform(const TransformedChallenge& phi);

// n i.i.d. uniform bits from the given stream.
Challenge random_challenge(SplitMix64& rng, std::size_t n);

std::string to_bitstring(const Challenge& c);

// Parses "0"/"1" characters; throws on anything else or empty input.
Challenge challenge_from_bitstring(std::string_view s);

}  // namespace puflab
