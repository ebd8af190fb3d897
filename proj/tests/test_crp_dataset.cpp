#include <doctest.h>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "puflab/crp_dataset.hpp"
#include "puflab/obfuscation.hpp"
#include "puflab/puf_models.hpp"
#include "puflab/rng.hpp"

using namespace puflab;

namespace {

std::filesystem::path work_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "puflab_crp_tests";
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

void spit(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  os << text;
}

PufInstance small_arbiter_instance(std::uint64_t seed, int n) {
  SplitMix64 rng(seed);
  PufInstance inst;
  inst.puf = sample_arbiter(rng, n, WeightModel::standard_normal(), 0.0);
  inst.seed = seed;
  return inst;
}

std::vector<std::string> sorted_rows(const CrpSet& set) {
  std::vector<std::string> rows;
  rows.reserve(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    std::string row;
    for (std::uint8_t b : set.input(i)) row.push_back(b ? '1' : '0');
    row.push_back(' ');
    row.push_back(set.responses[i] ? '1' : '0');
    rows.push_back(std::move(row));
  }
  std::sort(rows.begin(), rows.end());
  return rows;
}

}  // namespace

TEST_CASE("generation is deterministic and carries metadata") {
  const PufInstance inst = small_arbiter_instance(1, 16);
  const CrpSet a = generate_crps(inst, 500, 9, false);
  const CrpSet b = generate_crps(inst, 500, 9, false);
  CHECK(a == b);
  CHECK(a.meta.width == 16);
  CHECK(a.meta.type == "arbiter");
  CHECK(a.meta.seed == 9);
  CHECK_FALSE(a.meta.noisy);
  CHECK(a.size() == 500);
  CHECK(a.inputs.size() == 500 * 16);
}

TEST_CASE("each pair depends on its index alone") {
  const PufInstance inst = small_arbiter_instance(2, 12);
  const CrpSet big = generate_crps(inst, 400, 31, false);
  const CrpSet small = generate_crps(inst, 150, 31, false);
  for (std::size_t i = 0; i < small.size(); ++i) {
    CHECK(std::equal(small.input(i).begin(), small.input(i).end(),
                     big.input(i).begin()));
    CHECK(small.responses[i] == big.responses[i]);
  }

  const CrpSet noisy_big = generate_crps(inst, 400, 31, true);
  const CrpSet noisy_small = generate_crps(inst, 150, 31, true);
  for (std::size_t i = 0; i < noisy_small.size(); ++i) {
    CHECK(noisy_small.responses[i] == noisy_big.responses[i]);
  }
}

TEST_CASE("noise-free responses match independent re-evaluation") {
  const PufInstance inst = small_arbiter_instance(3, 4);
  const CrpSet set = generate_crps(inst, 1000, 5, false);
  for (std::size_t i = 0; i < set.size(); ++i) {
    const Challenge c(set.input(i).begin(), set.input(i).end());
    CHECK(set.responses[i] == eval_instance(inst, c));
  }
}

TEST_CASE("interfaced generation widens rows and hides the mask") {
  SplitMix64 rng(4);
  PufInstance inst;
  inst.puf = sample_xor(rng, 64, 2, WeightModel::standard_normal(), 0.0);
  SplitMix64 mrng(5);
  inst.mask = sample_mask(mrng, 64, 16);
  inst.seed = 4;

  const CrpSet set = generate_crps(inst, 200, 6, false);
  CHECK(set.meta.width == 80);
  CHECK(set.meta.type == "xor");
  for (std::size_t i = 0; i < set.size(); ++i) {
    const std::vector<std::uint8_t> input(set.input(i).begin(),
                                          set.input(i).end());
    CHECK(set.responses[i] == eval_instance(inst, input));
  }

  const auto path = work_dir() / "interfaced.crp";
  write_crps(set, path);
  const std::string text = slurp(path);
  CHECK(text.find("mask") == std::string::npos);
  CHECK(text.rfind("#crp width=80 type=xor seed=6 noisy=0\n", 0) == 0);
}

TEST_CASE("noisy generation differs from clean only in some responses") {
  SplitMix64 rng(7);
  PufInstance inst;
  inst.puf = sample_arbiter(rng, 64, WeightModel::standard_normal(), 0.05);
  inst.seed = 7;
  const CrpSet clean = generate_crps(inst, 4000, 8, false);
  const CrpSet noisy = generate_crps(inst, 4000, 8, true);
  CHECK(clean.inputs == noisy.inputs);
  std::size_t flips = 0;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    flips += clean.responses[i] != noisy.responses[i];
  }
  CHECK(flips > 0);
  CHECK(flips < 4000 / 4);
}

TEST_CASE("response bias stays near one half") {
  const PufInstance inst = small_arbiter_instance(9, 64);
  const CrpSet set = generate_crps(inst, 100000, 10, false);
  double mean = 0.0;
  for (std::uint8_t r : set.responses) mean += r;
  mean /= static_cast<double>(set.size());
  CHECK(mean >= 0.40);
  CHECK(mean <= 0.60);
}

TEST_CASE("split sizes follow the floor and remainder rules") {
  const PufInstance inst = small_arbiter_instance(11, 8);

  const CrpSet even = generate_crps(inst, 1000, 12, false);
  const SplitCrps se = split(even, SplitSpec{}, 13);
  CHECK(se.train.size() == 850);
  CHECK(se.validation.size() == 50);
  CHECK(se.test.size() == 100);

  const CrpSet odd = generate_crps(inst, 1001, 12, false);
  const SplitCrps so = split(odd, SplitSpec{}, 13);
  CHECK(so.train.size() == 851);
  CHECK(so.validation.size() == 50);
  CHECK(so.test.size() == 100);
}

TEST_CASE("split partitions the multiset and is seeded") {
  const PufInstance inst = small_arbiter_instance(14, 10);
  const CrpSet set = generate_crps(inst, 500, 15, false);
  const SplitCrps a = split(set, SplitSpec{}, 16);
  const SplitCrps b = split(set, SplitSpec{}, 16);
  CHECK(a.train == b.train);
  CHECK(a.validation == b.validation);
  CHECK(a.test == b.test);

  const SplitCrps c = split(set, SplitSpec{}, 17);
  CHECK(a.train.inputs != c.train.inputs);

  std::vector<std::string> merged;
  for (const CrpSet* part : {&a.train, &a.validation, &a.test}) {
    const std::vector<std::string> rows = sorted_rows(*part);
    merged.insert(merged.end(), rows.begin(), rows.end());
  }
  std::sort(merged.begin(), merged.end());
  CHECK(merged == sorted_rows(set));
}

TEST_CASE("split keeps metadata on every part") {
  const PufInstance inst = small_arbiter_instance(18, 8);
  const CrpSet set = generate_crps(inst, 200, 19, false);
  const SplitCrps parts = split(set, SplitSpec{}, 20);
  for (const CrpSet* part : {&parts.train, &parts.validation, &parts.test}) {
    CHECK(part->meta == set.meta);
  }
}

TEST_CASE("split rejects degenerate requests") {
  const PufInstance inst = small_arbiter_instance(21, 8);
  const CrpSet tiny = generate_crps(inst, 19, 22, false);
  CHECK_THROWS_AS(split(tiny, SplitSpec{}, 23), std::invalid_argument);

  const CrpSet set = generate_crps(inst, 100, 22, false);
  SplitSpec bad;
  bad.train = 0.999;
  bad.validation = 0.0005;
  bad.test = 0.0005;
  CHECK_THROWS_AS(split(set, bad, 23), std::invalid_argument);

  SplitSpec unnormalized;
  unnormalized.train = 0.5;
  unnormalized.validation = 0.2;
  unnormalized.test = 0.2;
  CHECK_THROWS_AS(split(set, unnormalized, 23), std::invalid_argument);

  SplitSpec negative;
  negative.train = 1.1;
  negative.validation = -0.05;
  negative.test = -0.05;
  CHECK_THROWS_AS(split(set, negative, 23), std::invalid_argument);
}

TEST_CASE("file roundtrip preserves sets exactly") {
  const PufInstance inst = small_arbiter_instance(24, 24);
  const CrpSet clean = generate_crps(inst, 777, 25, false);
  const auto path = work_dir() / "roundtrip.crp";
  write_crps(clean, path);
  CHECK(read_crps(path) == clean);

  SplitMix64 rng(26);
  PufInstance noisy_inst;
  noisy_inst.puf = sample_arbiter(rng, 24, WeightModel::standard_normal(), 0.1);
  noisy_inst.seed = 26;
  const CrpSet noisy = generate_crps(noisy_inst, 777, 27, true);
  write_crps(noisy, path);
  CHECK(read_crps(path) == noisy);
}

TEST_CASE("streaming generation matches in-memory generation byte for byte") {
  SplitMix64 rng(28);
  PufInstance inst;
  inst.puf = sample_ff(rng, 16, {{3, 10}, {6, 14}}, WeightModel::gate_delay(), 0.0);
  SplitMix64 mrng(29);
  inst.mask = sample_mask(mrng, 14, 4);
  inst.seed = 28;

  const auto streamed = work_dir() / "streamed.crp";
  const auto buffered = work_dir() / "buffered.crp";
  generate_crps_to_file(inst, 1500, 30, true, streamed);
  write_crps(generate_crps(inst, 1500, 30, true), buffered);
  CHECK(slurp(streamed) == slurp(buffered));
}

TEST_CASE("parse errors name the offending line") {
  const auto path = work_dir() / "bad.crp";

  spit(path, "#crp width=4 type=arbiter seed=1 noisy=0\n1011 1\n1021 0\n");
  CHECK_THROWS_WITH_AS(read_crps(path), doctest::Contains("line 3"),
                       std::runtime_error);

  spit(path, "#crp width=4 type=arbiter seed=1 noisy=0\n101 1\n");
  CHECK_THROWS_WITH_AS(read_crps(path), doctest::Contains("line 2"),
                       std::runtime_error);

  spit(path, "#crp width=4 type=arbiter seed=1 noisy=0\n1011 2\n");
  CHECK_THROWS_AS(read_crps(path), std::runtime_error);

  spit(path, "#crp width=4 type=arbiter seed=1\n1011 1\n");
  CHECK_THROWS_AS(read_crps(path), std::runtime_error);

  spit(path, "width=4 type=arbiter seed=1 noisy=0\n1011 1\n");
  CHECK_THROWS_WITH_AS(read_crps(path), doctest::Contains("line 1"),
                       std::runtime_error);

  spit(path, "#crp width=4 type=arbiter seed=1 noisy=0 extra=1\n1011 1\n");
  CHECK_THROWS_AS(read_crps(path), std::runtime_error);
}

TEST_CASE("reading an empty set is rejected") {
  const auto path = work_dir() / "empty.crp";
  spit(path, "#crp width=4 type=arbiter seed=1 noisy=0\n");
  CHECK_THROWS_AS(read_crps(path), std::runtime_error);
}

TEST_CASE("large roundtrip preserves ordering") {
  const PufInstance inst = small_arbiter_instance(31, 32);
  const CrpSet set = generate_crps(inst, 50000, 32, false);
  const auto path = work_dir() / "large.crp";
  write_crps(set, path);
  const CrpSet back = read_crps(path);
  REQUIRE(back.size() == set.size());
  CHECK(back.inputs == set.inputs);
  CHECK(back.responses == set.responses);
}
