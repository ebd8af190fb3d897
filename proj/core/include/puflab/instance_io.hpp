#pragma once

#include <filesystem>

#include "puflab/obfuscation.hpp"

namespace puflab {

// Text instance format, floats at 17 significant digits for exact roundtrip:
//
//   #puf type=<arbiter|xor|ff> n=<int> k=<int> noisiness=<float> seed=<int>
//   v=<float> w=<float>,...        (one line per component; 1 for arbiter/ff)
//   loops=(i1,i2);(i1,i2);...      (ff only)
//   inner_bias=<float>,...         (ff only)
//   mask=<i1>,<i2>,...             (only when interfaced; sorted positions)
//
// k is the component count for xor, the loop count for ff and 1 for arbiter.
void write_instance(const PufInstance& instance,
                    const std::filesystem::path& path);

// Parse failures throw std::runtime_error naming the offending line.
PufInstance read_instance(const std::filesystem::path& path);

}  // namespace puflab
