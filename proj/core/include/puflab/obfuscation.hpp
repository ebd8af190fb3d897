#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "puflab/challenge.hpp"
#include "puflab/puf_models.hpp"
#include "puflab/rng.hpp"

namespace puflab {

// Per-instance secret selection of the real challenge positions among the
// n+m input bits. `selected` holds 1-based positions in strictly increasing
// order; stage i of the wrapped PUF reads the i-th smallest selected
// position. The remaining m positions are ghost bits the PUF never reads.
struct GhostMask {
  int total_width = 0;
  std::vector<int> selected;

  int ghost_count() const {
    return total_width - static_cast<int>(selected.size());
  }
};

// Uniformly random size-`challenge_width` subset of [1, challenge_width+m],
// reported in sorted order.
GhostMask sample_mask(SplitMix64& rng, int challenge_width, int ghost_bits);

// Throws std::invalid_argument unless positions are strictly increasing and
// inside [1, total_width].
void validate_mask(const GhostMask& mask);

// Subvector of `input` at the selected positions. Pure index extraction.
Challenge apply_mask(const GhostMask& mask,
                     const std::vector<std::uint8_t>& input);

// A PUF behind the input interface: evaluation routes the selected input
// bits to the inner PUF and ignores the ghost bits.
struct InterfacedPuf {
  PufVariant inner;
  GhostMask mask;
};

int eval_interfaced(const InterfacedPuf& puf,
                    const std::vector<std::uint8_t>& input,
                    SplitMix64* noise_rng = nullptr);

// One concrete device: a PUF variant, its optional interface mask (the
// trusted partner's knowledge, never part of CRP files) and the seed it was
// sampled from.
struct PufInstance {
  PufVariant puf;
  std::optional<GhostMask> mask;
  std::uint64_t seed = 0;
};

// Width of the bit vector a caller must supply: the mask width when
// interfaced, the PUF's external challenge width otherwise.
int input_width(const PufInstance& instance);

int eval_instance(const PufInstance& instance,
                  const std::vector<std::uint8_t>& input,
                  SplitMix64* noise_rng = nullptr);

}  // namespace puflab
