#include "puflab/obfuscation.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace puflab {

GhostMask sample_mask(SplitMix64& rng, int challenge_width, int ghost_bits) {
  if (challenge_width < 1) {
    throw std::invalid_argument("sample_mask: challenge width must be >= 1");
  }
  if (ghost_bits < 0) {
    throw std::invalid_argument("sample_mask: ghost bit count must be >= 0");
  }
  const int total = challenge_width + ghost_bits;
  std::vector<int> positions(total);
  std::iota(positions.begin(), positions.end(), 1);
  fisher_yates_shuffle(positions.begin(), positions.end(), rng);
  positions.resize(challenge_width);
  std::sort(positions.begin(), positions.end());

  GhostMask mask;
  mask.total_width = total;
  mask.selected = std::move(positions);
  return mask;
}

void validate_mask(const GhostMask& mask) {
  if (mask.selected.empty() ||
      static_cast<int>(mask.selected.size()) > mask.total_width) {
    throw std::invalid_argument("GhostMask: selected size out of range");
  }
  int prev = 0;
  for (int pos : mask.selected) {
    if (pos <= prev || pos > mask.total_width) {
      throw std::invalid_argument(
          "GhostMask: positions must be strictly increasing within range");
    }
    prev = pos;
  }
}

Challenge apply_mask(const GhostMask& mask,
                     const std::vector<std::uint8_t>& input) {
  if (static_cast<int>(input.size()) != mask.total_width) {
    throw std::invalid_argument("apply_mask: input length mismatch");
  }
  Challenge out;
  out.reserve(mask.selected.size());
  for (int pos : mask.selected) {
    out.push_back(input[pos - 1]);
  }
  return out;
}

int eval_interfaced(const InterfacedPuf& puf,
                    const std::vector<std::uint8_t>& input,
                    SplitMix64* noise_rng) {
  if (static_cast<int>(puf.mask.selected.size()) !=
      challenge_width(puf.inner)) {
    throw std::invalid_argument(
        "eval_interfaced: mask width does not match the inner PUF");
  }
  return eval_variant(puf.inner, apply_mask(puf.mask, input), noise_rng);
}

int input_width(const PufInstance& instance) {
  return instance.mask ? instance.mask->total_width
                       : challenge_width(instance.puf);
}

int eval_instance(const PufInstance& instance,
                  const std::vector<std::uint8_t>& input,
                  SplitMix64* noise_rng) {
  if (instance.mask) {
    return eval_variant(instance.puf, apply_mask(*instance.mask, input),
                        noise_rng);
  }
  return eval_variant(instance.puf, input, noise_rng);
}

}  // namespace puflab
