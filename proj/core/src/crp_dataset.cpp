#include "puflab/crp_dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string_view>

#include "puflab/rng.hpp"

namespace puflab {

namespace {

// Fills one input row and returns its response, consuming randomness only
// from the per-index engine. Bits come from 64-bit words, low bit first, so
// a row costs ceil(width/64) words before any noise draw.
std::uint8_t generate_row(const PufInstance& instance, int width,
                          SplitMix64& eng, bool noisy, std::uint8_t* row) {
  std::uint64_t word = 0;
  for (int j = 0; j < width; ++j) {
    if (j % 64 == 0) word = eng();
    row[j] = static_cast<std::uint8_t>((word >> (j % 64)) & 1u);
  }
  Challenge input(row, row + width);
  return eval_instance(instance, input, noisy ? &eng : nullptr);
}

void validate_count(std::size_t count) {
  if (count < 1) {
    throw std::invalid_argument("generate_crps: count must be >= 1");
  }
}

std::string header_line(const CrpMeta& meta) {
  std::ostringstream os;
  os << "#crp width=" << meta.width << " type=" << meta.type
     << " seed=" << meta.seed << " noisy=" << (meta.noisy ? 1 : 0);
  return os.str();
}

CrpMeta make_meta(const PufInstance& instance, std::uint64_t seed,
                  bool noisy) {
  CrpMeta meta;
  meta.width = input_width(instance);
  meta.type = variant_tag(instance.puf);
  meta.seed = seed;
  meta.noisy = noisy;
  return meta;
}

[[noreturn]] void fail(const std::filesystem::path& path, int line,
                       const std::string& msg) {
  std::ostringstream os;
  os << path.string() << ": line " << line << ": " << msg;
  throw std::runtime_error(os.str());
}

CrpSet take_rows(const CrpSet& set, const std::vector<std::uint32_t>& order,
                 std::size_t begin, std::size_t end) {
  const auto width = static_cast<std::size_t>(set.meta.width);
  CrpSet out;
  out.meta = set.meta;
  out.inputs.resize((end - begin) * width);
  out.responses.resize(end - begin);
  for (std::size_t i = begin; i < end; ++i) {
    const std::size_t src = order[i];
    std::copy_n(set.inputs.data() + src * width, width,
                out.inputs.data() + (i - begin) * width);
    out.responses[i - begin] = set.responses[src];
  }
  return out;
}

}  // namespace

CrpSet generate_crps(const PufInstance& instance, std::size_t count,
                     std::uint64_t seed, bool noisy) {
  validate_count(count);
  CrpSet set;
  set.meta = make_meta(instance, seed, noisy);
  const auto width = static_cast<std::size_t>(set.meta.width);
  set.inputs.resize(count * width);
  set.responses.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    SplitMix64 eng(derive_stream(seed, i));
    set.responses[i] =
        generate_row(instance, set.meta.width, eng, noisy,
                     set.inputs.data() + i * width);
  }
  return set;
}

void generate_crps_to_file(const PufInstance& instance, std::size_t count,
                           std::uint64_t seed, bool noisy,
                           const std::filesystem::path& path) {
  validate_count(count);
  std::ofstream os(path);
  if (!os) {
    throw std::runtime_error("generate_crps_to_file: cannot open " +
                             path.string());
  }
  const CrpMeta meta = make_meta(instance, seed, noisy);
  os << header_line(meta) << '\n';
  std::vector<std::uint8_t> row(static_cast<std::size_t>(meta.width));
  std::string line(static_cast<std::size_t>(meta.width) + 2, '0');
  for (std::size_t i = 0; i < count; ++i) {
    SplitMix64 eng(derive_stream(seed, i));
    const std::uint8_t response =
        generate_row(instance, meta.width, eng, noisy, row.data());
    for (int j = 0; j < meta.width; ++j) {
      line[static_cast<std::size_t>(j)] = static_cast<char>('0' + row[j]);
    }
    line[static_cast<std::size_t>(meta.width)] = ' ';
    line[static_cast<std::size_t>(meta.width) + 1] =
        static_cast<char>('0' + response);
    os << line << '\n';
  }
  if (!os) {
    throw std::runtime_error("generate_crps_to_file: write failed for " +
                             path.string());
  }
}

SplitCrps split(const CrpSet& set, const SplitSpec& spec, std::uint64_t seed) {
  if (spec.train < 0.0 || spec.validation < 0.0 || spec.test < 0.0) {
    throw std::invalid_argument("split: fractions must be nonnegative");
  }
  if (std::abs(spec.train + spec.validation + spec.test - 1.0) > 1e-9) {
    throw std::invalid_argument("split: fractions must sum to 1");
  }
  const std::size_t n = set.size();
  if (n < 20) {
    throw std::invalid_argument("split: need at least 20 CRPs");
  }

  const auto part = [n](double fraction) {
    return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n)));
  };
  const std::size_t n_validation = part(spec.validation);
  const std::size_t n_test = part(spec.test);
  const std::size_t n_train = n - n_validation - n_test;
  if ((spec.validation > 0.0 && n_validation == 0) ||
      (spec.test > 0.0 && n_test == 0) || (spec.train > 0.0 && n_train == 0)) {
    throw std::invalid_argument("split: a requested part would be empty");
  }

  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  SplitMix64 eng(seed);
  fisher_yates_shuffle(order.begin(), order.end(), eng);

  SplitCrps out;
  out.train = take_rows(set, order, 0, n_train);
  out.validation = take_rows(set, order, n_train, n_train + n_validation);
  out.test = take_rows(set, order, n_train + n_validation, n);
  return out;
}

void write_crps(const CrpSet& set, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) {
    throw std::runtime_error("write_crps: cannot open " + path.string());
  }
  os << header_line(set.meta) << '\n';
  const auto width = static_cast<std::size_t>(set.meta.width);
  std::string line(width + 2, '0');
  for (std::size_t i = 0; i < set.size(); ++i) {
    const std::uint8_t* row = set.inputs.data() + i * width;
    for (std::size_t j = 0; j < width; ++j) {
      line[j] = static_cast<char>('0' + row[j]);
    }
    line[width] = ' ';
    line[width + 1] = static_cast<char>('0' + set.responses[i]);
    os << line << '\n';
  }
  if (!os) {
    throw std::runtime_error("write_crps: write failed for " + path.string());
  }
}

CrpSet read_crps(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) {
    throw std::runtime_error("read_crps: cannot open " + path.string());
  }

  std::string text;
  if (!std::getline(is, text)) fail(path, 1, "missing header");
  if (!text.empty() && text.back() == '\r') text.pop_back();
  if (text.rfind("#crp ", 0) != 0) fail(path, 1, "expected '#crp' header");

  CrpSet set;
  std::string_view rest = std::string_view(text).substr(5);
  int seen = 0;
  while (!rest.empty()) {
    const std::size_t sp = rest.find(' ');
    const std::string_view tok =
        sp == std::string_view::npos ? rest : rest.substr(0, sp);
    rest = sp == std::string_view::npos ? std::string_view{} : rest.substr(sp + 1);
    if (tok.empty()) continue;
    const std::size_t eq = tok.find('=');
    if (eq == std::string_view::npos) fail(path, 1, "malformed header token");
    const std::string_view key = tok.substr(0, eq);
    const std::string_view value = tok.substr(eq + 1);
    const auto as_int = [&](long long& out) {
      auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
      if (ec != std::errc{} || ptr != value.data() + value.size()) {
        fail(path, 1, "malformed header value '" + std::string(value) + "'");
      }
    };
    if (key == "width") {
      long long v = 0;
      as_int(v);
      set.meta.width = static_cast<int>(v);
    } else if (key == "type") {
      set.meta.type = std::string(value);
    } else if (key == "seed") {
      long long v = 0;
      as_int(v);
      set.meta.seed = static_cast<std::uint64_t>(v);
    } else if (key == "noisy") {
      long long v = 0;
      as_int(v);
      if (v != 0 && v != 1) fail(path, 1, "noisy must be 0 or 1");
      set.meta.noisy = v == 1;
    } else {
      fail(path, 1, "unknown header key '" + std::string(key) + "'");
    }
    ++seen;
  }
  if (seen != 4 || set.meta.width < 1 || set.meta.type.empty()) {
    fail(path, 1, "header must carry width, type, seed, and noisy");
  }

  const auto width = static_cast<std::size_t>(set.meta.width);
  int lineno = 1;
  while (std::getline(is, text)) {
    ++lineno;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.empty()) continue;
    if (text.size() != width + 2 || text[width] != ' ') {
      fail(path, lineno, "expected a " + std::to_string(width) +
                             "-bit row, one space, and a response bit");
    }
    for (std::size_t j = 0; j < width; ++j) {
      if (text[j] != '0' && text[j] != '1') {
        fail(path, lineno, "non-binary symbol in bit column");
      }
      set.inputs.push_back(static_cast<std::uint8_t>(text[j] - '0'));
    }
    if (text[width + 1] != '0' && text[width + 1] != '1') {
      fail(path, lineno, "response must be 0 or 1");
    }
    set.responses.push_back(static_cast<std::uint8_t>(text[width + 1] - '0'));
  }
  if (set.responses.empty()) fail(path, lineno + 1, "no CRP rows");
  return set;
}

}  // namespace puflab
