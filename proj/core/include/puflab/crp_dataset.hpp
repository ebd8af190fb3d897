#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "puflab/obfuscation.hpp"

namespace puflab {

// Metadata carried by a CRP set and serialized into the file header. The
// type tag names the inner PUF family only; a masked instance produces the
// same tag and a wider input, so its files look like those of a wider bare
// PUF.
struct CrpMeta {
  int width = 0;
  std::string type;
  std::uint64_t seed = 0;
  bool noisy = false;

  bool operator==(const CrpMeta&) const = default;
};

// Challenge-response pairs in generation order. Inputs are packed row-major,
// one byte per bit, width bits per row.
struct CrpSet {
  CrpMeta meta;
  std::vector<std::uint8_t> inputs;
  std::vector<std::uint8_t> responses;

  std::size_t size() const { return responses.size(); }

  std::span<const std::uint8_t> input(std::size_t i) const {
    return {inputs.data() + i * static_cast<std::size_t>(meta.width),
            static_cast<std::size_t>(meta.width)};
  }

  bool operator==(const CrpSet&) const = default;
};

// Train/validation/test fractions. Must be nonnegative and sum to 1 within
// 1e-9.
struct SplitSpec {
  double train = 0.85;
  double validation = 0.05;
  double test = 0.10;
};

struct SplitCrps {
  CrpSet train;
  CrpSet validation;
  CrpSet test;
};

// Generates `count` CRPs with uniform i.i.d. inputs. The i-th pair is
// derived from (seed, i) alone, so any generation order or chunking yields
// the same set. With `noisy`, each response gets one measurement-noise draw
// from the same per-index stream.
CrpSet generate_crps(const PufInstance& instance, std::size_t count,
                     std::uint64_t seed, bool noisy);

// Streams the same bytes write_crps(generate_crps(...)) would produce,
// without holding the set in memory.
void generate_crps_to_file(const PufInstance& instance, std::size_t count,
                           std::uint64_t seed, bool noisy,
                           const std::filesystem::path& path);

// Disjoint partition after a seeded shuffle. Sizes are floor(fraction * N)
// with the remainder assigned to train. Requires N >= 20 and rejects specs
// whose positive fractions floor to an empty part.
SplitCrps split(const CrpSet& set, const SplitSpec& spec, std::uint64_t seed);

// Text format: header `#crp width=<int> type=<tag> seed=<int> noisy=<0|1>`,
// then one `<bitstring> <0|1>` line per pair. Parse failures name the
// offending line.
void write_crps(const CrpSet& set, const std::filesystem::path& path);
CrpSet read_crps(const std::filesystem::path& path);

}  // namespace puflab
