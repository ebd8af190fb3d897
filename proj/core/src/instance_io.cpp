#include "puflab/instance_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace puflab {

namespace {

std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

[[noreturn]] void fail(const std::filesystem::path& path, int line,
                       const std::string& msg) {
  std::ostringstream os;
  os << path.string() << ": line " << line << ": " << msg;
  throw std::runtime_error(os.str());
}

double parse_double(std::string_view tok, const std::filesystem::path& path,
                    int line) {
  double value = 0.0;
  const auto* first = tok.data();
  const auto* last = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) {
    fail(path, line, "malformed float '" + std::string(tok) + "'");
  }
  return value;
}

long long parse_int(std::string_view tok, const std::filesystem::path& path,
                    int line) {
  long long value = 0;
  const auto* first = tok.data();
  const auto* last = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) {
    fail(path, line, "malformed integer '" + std::string(tok) + "'");
  }
  return value;
}

std::uint64_t parse_uint(std::string_view tok,
                         const std::filesystem::path& path, int line) {
  std::uint64_t value = 0;
  const auto* first = tok.data();
  const auto* last = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) {
    fail(path, line, "malformed integer '" + std::string(tok) + "'");
  }
  return value;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(s.substr(start));
      break;
    }
    parts.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return parts;
}

// "key=rest" -> rest, enforcing the key.
std::string_view expect_key(std::string_view s, std::string_view key,
                            const std::filesystem::path& path, int line) {
  if (s.size() < key.size() + 1 || s.substr(0, key.size()) != key ||
      s[key.size()] != '=') {
    fail(path, line, "expected '" + std::string(key) + "=...'");
  }
  return s.substr(key.size() + 1);
}

std::vector<double> parse_double_list(std::string_view s,
                                      const std::filesystem::path& path,
                                      int line) {
  std::vector<double> out;
  for (std::string_view tok : split(s, ',')) {
    out.push_back(parse_double(tok, path, line));
  }
  return out;
}

void write_component(std::ofstream& os, const ArbiterPuf& puf) {
  os << "v=" << fmt_double(puf.v) << " w=";
  for (int i = 0; i < puf.n; ++i) {
    if (i) os << ',';
    os << fmt_double(puf.w[i]);
  }
  os << '\n';
}

ArbiterPuf read_component(std::string_view line_text, int n, double noisiness,
                          const std::filesystem::path& path, int line) {
  const std::size_t sp = line_text.find(' ');
  if (sp == std::string_view::npos) {
    fail(path, line, "expected 'v=<float> w=<floats>'");
  }
  ArbiterPuf puf;
  puf.n = n;
  puf.noisiness = noisiness;
  puf.v = parse_double(expect_key(line_text.substr(0, sp), "v", path, line),
                       path, line);
  puf.w = parse_double_list(expect_key(line_text.substr(sp + 1), "w", path, line),
                            path, line);
  if (static_cast<int>(puf.w.size()) != n) {
    fail(path, line, "expected " + std::to_string(n) + " weights");
  }
  return puf;
}

}  // namespace

void write_instance(const PufInstance& instance,
                    const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) {
    throw std::runtime_error("write_instance: cannot open " + path.string());
  }

  const std::string tag = variant_tag(instance.puf);
  int k = 1;
  if (const auto* xpuf = std::get_if<XorPuf>(&instance.puf)) {
    k = static_cast<int>(xpuf->components.size());
  } else if (const auto* ffpuf = std::get_if<FfPuf>(&instance.puf)) {
    k = static_cast<int>(ffpuf->loops.size());
  }

  os << "#puf type=" << tag << " n=" << stage_count(instance.puf)
     << " k=" << k << " noisiness=" << fmt_double(variant_noisiness(instance.puf))
     << " seed=" << instance.seed;
  if (instance.mask) {
    os << " m=" << instance.mask->ghost_count();
  }
  os << '\n';

  if (const auto* apuf = std::get_if<ArbiterPuf>(&instance.puf)) {
    write_component(os, *apuf);
  } else if (const auto* xpuf = std::get_if<XorPuf>(&instance.puf)) {
    for (const ArbiterPuf& comp : xpuf->components) write_component(os, comp);
  } else {
    const auto& ffpuf = std::get<FfPuf>(instance.puf);
    write_component(os, ffpuf.base);
    os << "loops=";
    for (std::size_t l = 0; l < ffpuf.loops.size(); ++l) {
      if (l) os << ';';
      os << '(' << ffpuf.loops[l].start << ',' << ffpuf.loops[l].end << ')';
    }
    os << '\n' << "inner_bias=";
    for (std::size_t l = 0; l < ffpuf.inner_bias.size(); ++l) {
      if (l) os << ',';
      os << fmt_double(ffpuf.inner_bias[l]);
    }
    os << '\n';
  }

  if (instance.mask) {
    os << "mask=";
    for (std::size_t i = 0; i < instance.mask->selected.size(); ++i) {
      if (i) os << ',';
      os << instance.mask->selected[i];
    }
    os << '\n';
  }
  if (!os) {
    throw std::runtime_error("write_instance: write failed for " + path.string());
  }
}

PufInstance read_instance(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) {
    throw std::runtime_error("read_instance: cannot open " + path.string());
  }

  int lineno = 0;
  std::string text;
  auto next_line = [&](bool required) -> bool {
    while (std::getline(is, text)) {
      ++lineno;
      if (!text.empty() && text.back() == '\r') text.pop_back();
      if (!text.empty()) return true;
    }
    if (required) fail(path, lineno + 1, "unexpected end of file");
    return false;
  };

  next_line(true);
  if (text.rfind("#puf ", 0) != 0) fail(path, lineno, "expected '#puf' header");
  std::string type;
  int n = 0;
  int k = 0;
  int m = 0;
  double noisiness = 0.0;
  std::uint64_t seed = 0;
  for (std::string_view tok : split(std::string_view(text).substr(5), ' ')) {
    if (tok.empty()) continue;
    const std::size_t eq = tok.find('=');
    if (eq == std::string_view::npos) fail(path, lineno, "malformed header token");
    const std::string_view key = tok.substr(0, eq);
    const std::string_view value = tok.substr(eq + 1);
    if (key == "type") {
      type = std::string(value);
    } else if (key == "n") {
      n = static_cast<int>(parse_int(value, path, lineno));
    } else if (key == "k") {
      k = static_cast<int>(parse_int(value, path, lineno));
    } else if (key == "m") {
      m = static_cast<int>(parse_int(value, path, lineno));
    } else if (key == "noisiness") {
      noisiness = parse_double(value, path, lineno);
    } else if (key == "seed") {
      seed = parse_uint(value, path, lineno);
    } else {
      fail(path, lineno, "unknown header key '" + std::string(key) + "'");
    }
  }
  if (n < 1) fail(path, lineno, "header n must be >= 1");
  if (m < 0) fail(path, lineno, "header m must be >= 0");
  if (noisiness < 0.0) fail(path, lineno, "header noisiness must be >= 0");

  PufInstance instance;
  instance.seed = seed;

  if (type == "arbiter") {
    if (k != 1) fail(path, lineno, "arbiter instances require k=1");
    next_line(true);
    instance.puf = read_component(text, n, noisiness, path, lineno);
  } else if (type == "xor") {
    if (k < 1) fail(path, lineno, "xor instances require k >= 1");
    XorPuf xpuf;
    for (int j = 0; j < k; ++j) {
      next_line(true);
      xpuf.components.push_back(read_component(text, n, noisiness, path, lineno));
    }
    instance.puf = std::move(xpuf);
  } else if (type == "ff") {
    if (k < 1) fail(path, lineno, "ff instances require k >= 1");
    FfPuf ffpuf;
    next_line(true);
    ffpuf.base = read_component(text, n, noisiness, path, lineno);
    next_line(true);
    for (std::string_view tok :
         split(expect_key(text, "loops", path, lineno), ';')) {
      if (tok.size() < 5 || tok.front() != '(' || tok.back() != ')') {
        fail(path, lineno, "malformed loop '" + std::string(tok) + "'");
      }
      const auto pair = split(tok.substr(1, tok.size() - 2), ',');
      if (pair.size() != 2) fail(path, lineno, "malformed loop pair");
      FfLoop loop;
      loop.start = static_cast<int>(parse_int(pair[0], path, lineno));
      loop.end = static_cast<int>(parse_int(pair[1], path, lineno));
      ffpuf.loops.push_back(loop);
    }
    if (static_cast<int>(ffpuf.loops.size()) != k) {
      fail(path, lineno, "expected " + std::to_string(k) + " loops");
    }
    next_line(true);
    ffpuf.inner_bias =
        parse_double_list(expect_key(text, "inner_bias", path, lineno), path, lineno);
    if (ffpuf.inner_bias.size() != ffpuf.loops.size()) {
      fail(path, lineno, "expected one inner bias per loop");
    }
    try {
      validate_loops(n, ffpuf.loops);
    } catch (const std::exception& ex) {
      fail(path, lineno, ex.what());
    }
    instance.puf = std::move(ffpuf);
  } else {
    fail(path, lineno, "unknown type '" + type + "'");
  }

  if (next_line(false)) {
    GhostMask mask;
    for (std::string_view tok :
         split(expect_key(text, "mask", path, lineno), ',')) {
      mask.selected.push_back(static_cast<int>(parse_int(tok, path, lineno)));
    }
    if (static_cast<int>(mask.selected.size()) !=
        challenge_width(instance.puf)) {
      fail(path, lineno, "mask width does not match the PUF challenge width");
    }
    mask.total_width = challenge_width(instance.puf) + m;
    try {
      validate_mask(mask);
    } catch (const std::exception& ex) {
      fail(path, lineno, ex.what());
    }
    instance.mask = mask;
    if (next_line(false)) fail(path, lineno, "unexpected trailing content");
  } else if (m != 0) {
    fail(path, lineno, "header declares m ghost bits but no mask line follows");
  }

  return instance;
}

}  // namespace puflab
