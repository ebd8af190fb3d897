#include "puflab/challenge.hpp"

#include <stdexcept>

namespace puflab {

TransformedChallenge transform_challenge(const Challenge& c) {
  if (c.empty()) {
    throw std::invalid_argument("transform_challenge: empty challenge");
  }
  const std::size_t n = c.size();
  TransformedChallenge phi(n);
  double suffix = 1.0;
  for (std::size_t i = n; i-- > 0;) {
    const std::uint8_t bit = c[i];
    if (bit > 1) {
      throw std::invalid_argument("transform_challenge: bit value is not 0/1");
    }
    suffix *= bit ? 1.0 : -1.0;
    phi[i] = suffix;
  }
  return phi;
}

Challenge inverse_transform(const TransformedChallenge& phi) {
  if (phi.empty()) {
    throw std::invalid_argument("inverse_transform: empty input");
  }
  const std::size_t n = phi.size();
  for (double p : phi) {
    if (p != 1.0 && p != -1.0) {
      throw std::invalid_argument("inverse_transform: element outside {-1,+1}");
    }
  }
  Challenge c(n);
  c[n - 1] = phi[n - 1] > 0 ? 1 : 0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    c[i] = phi[i] == phi[i + 1] ? 1 : 0;
  }
  return c;
}

Challenge random_challenge(SplitMix64& rng, std::size_t n) {
  if (n == 0) {
    throw std::invalid_argument("random_challenge: n must be >= 1");
  }
  Challenge c(n);
  for (std::size_t i = 0; i < n; ++i) {
    c[i] = static_cast<std::uint8_t>(uniform_bit(rng));
  }
  return c;
}

std::string to_bitstring(const Challenge& c) {
  std::string s;
  s.reserve(c.size());
  for (std::uint8_t bit : c) {
    s.push_back(bit ? '1' : '0');
  }
  return s;
}

Challenge challenge_from_bitstring(std::string_view s) {
  if (s.empty()) {
    throw std::invalid_argument("challenge_from_bitstring: empty string");
  }
  Challenge c(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '0') {
      c[i] = 0;
    } else if (s[i] == '1') {
      c[i] = 1;
    } else {
      throw std::invalid_argument(
          "challenge_from_bitstring: symbol is not '0' or '1'");
    }
  }
  return c;
}

}  // namespace puflab
