#include "puflab/puf_models.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace puflab {

namespace {

double l2_norm(const std::vector<double>& w) {
  double s = 0.0;
  for (double x : w) s += x * x;
  return std::sqrt(s);
}

struct GateReduction {
  std::vector<double> w;
  double v = 0.0;
  std::vector<double> residual;  // residual[i] = t_{i+1} of stage i+1
};

// Reduction of per-stage gate delays to the linear model; see the
// sample_arbiter contract for the formulas.
GateReduction reduce_gate_delays(SplitMix64& rng, int n,
                                 const WeightModel& model) {
  GateReduction r;
  r.w.resize(n);
  r.residual.resize(n);
  double prev_t = 0.0;
  for (int i = 0; i < n; ++i) {
    const StageGates g = sample_stage_gates(rng, model);
    const double s = g.straight_top - g.straight_bottom;
    const double x = g.cross_top - g.cross_bottom;
    const double u = (s - x) / 2.0;
    const double t = (s + x) / 2.0;
    r.w[i] = (i == 0) ? u : u + prev_t;
    r.residual[i] = t;
    prev_t = t;
  }
  r.v = prev_t;
  return r;
}

void check_model(const WeightModel& model) {
  if (!(model.stddev > 0.0)) {
    throw std::invalid_argument("WeightModel: stddev must be positive");
  }
}

}  // namespace

StageGates sample_stage_gates(SplitMix64& rng, const WeightModel& model) {
  StageGates g;
  g.straight_top = model.mean + model.stddev * normal(rng);
  g.straight_bottom = model.mean + model.stddev * normal(rng);
  g.cross_top = model.mean + model.stddev * normal(rng);
  g.cross_bottom = model.mean + model.stddev * normal(rng);
  return g;
}

ArbiterPuf sample_arbiter(SplitMix64& rng, int n, const WeightModel& model,
                          double noisiness) {
  if (n < 1) throw std::invalid_argument("sample_arbiter: n must be >= 1");
  if (noisiness < 0.0) {
    throw std::invalid_argument("sample_arbiter: noisiness must be >= 0");
  }
  check_model(model);

  ArbiterPuf puf;
  puf.n = n;
  puf.noisiness = noisiness;
  if (model.kind == WeightModelKind::StandardNormal) {
    puf.w.resize(n);
    for (int i = 0; i < n; ++i) {
      puf.w[i] = model.mean + model.stddev * normal(rng);
    }
    puf.v = model.mean + model.stddev * normal(rng);
  } else {
    GateReduction r = reduce_gate_delays(rng, n, model);
    puf.w = std::move(r.w);
    puf.v = r.v;
  }
  return puf;
}

XorPuf sample_xor(SplitMix64& rng, int n, int k, const WeightModel& model,
                  double noisiness) {
  if (k < 1) throw std::invalid_argument("sample_xor: k must be >= 1");
  XorPuf puf;
  puf.components.reserve(k);
  for (int j = 0; j < k; ++j) {
    puf.components.push_back(sample_arbiter(rng, n, model, noisiness));
  }
  return puf;
}

FfPuf sample_ff(SplitMix64& rng, int n, std::vector<FfLoop> loops,
                const WeightModel& model, double noisiness) {
  if (n < 1) throw std::invalid_argument("sample_ff: n must be >= 1");
  if (noisiness < 0.0) {
    throw std::invalid_argument("sample_ff: noisiness must be >= 0");
  }
  check_model(model);
  validate_loops(n, loops);

  FfPuf puf;
  puf.base.n = n;
  puf.base.noisiness = noisiness;
  if (model.kind == WeightModelKind::StandardNormal) {
    puf.base.w.resize(n);
    for (int i = 0; i < n; ++i) {
      puf.base.w[i] = model.mean + model.stddev * normal(rng);
    }
    puf.base.v = model.mean + model.stddev * normal(rng);
    puf.inner_bias.reserve(loops.size());
    for (std::size_t l = 0; l < loops.size(); ++l) {
      puf.inner_bias.push_back(model.mean + model.stddev * normal(rng));
    }
  } else {
    GateReduction r = reduce_gate_delays(rng, n, model);
    puf.base.w = std::move(r.w);
    puf.base.v = r.v;
    puf.inner_bias.reserve(loops.size());
    for (const FfLoop& loop : loops) {
      puf.inner_bias.push_back(r.residual[loop.start - 1]);
    }
  }
  puf.loops = std::move(loops);
  return puf;
}

std::vector<FfLoop> default_ff_loops(int n, int k) {
  if (k < 1) throw std::invalid_argument("default_ff_loops: k must be >= 1");
  if (n < 4 || k >= n) {
    throw std::invalid_argument("default_ff_loops: n too small for k loops");
  }
  const double lo = n / 2.0;
  const double hi = n - 1.0;
  std::vector<int> ends;
  ends.reserve(k);
  for (int j = 0; j < k; ++j) {
    double pos = (k == 1) ? (lo + hi) / 2.0 : lo + (hi - lo) * j / (k - 1);
    int end = static_cast<int>(std::lround(pos));
    while (std::find(ends.begin(), ends.end(), end) != ends.end()) ++end;
    if (end > n - 1) {
      throw std::invalid_argument("default_ff_loops: cannot place distinct loop ends");
    }
    ends.push_back(end);
  }
  const int offset = std::max(1, static_cast<int>(std::lround(n / 4.0)));
  std::vector<FfLoop> loops;
  loops.reserve(k);
  for (int end : ends) {
    int start = std::max(1, end - offset);
    while (start > 1 &&
           std::find(ends.begin(), ends.end(), start) != ends.end()) {
      --start;
    }
    if (std::find(ends.begin(), ends.end(), start) != ends.end()) {
      throw std::invalid_argument("default_ff_loops: cannot place a valid loop start");
    }
    loops.push_back({start, end});
  }
  validate_loops(n, loops);
  return loops;
}

void validate_loops(int n, const std::vector<FfLoop>& loops) {
  for (const FfLoop& loop : loops) {
    if (loop.start < 1 || loop.end > n || loop.start >= loop.end) {
      throw std::invalid_argument("FfPuf: loop must satisfy 1 <= start < end <= n");
    }
  }
  for (std::size_t a = 0; a < loops.size(); ++a) {
    for (std::size_t b = 0; b < loops.size(); ++b) {
      if (a != b && loops[a].end == loops[b].end) {
        throw std::invalid_argument("FfPuf: loop ends must be pairwise distinct");
      }
      if (loops[a].end == loops[b].start) {
        throw std::invalid_argument("FfPuf: a loop end may not be another loop's start");
      }
    }
  }
}

double delay_difference(const ArbiterPuf& puf, const Challenge& c) {
  if (static_cast<int>(c.size()) != puf.n ||
      puf.w.size() != static_cast<std::size_t>(puf.n)) {
    throw std::invalid_argument("delay_difference: challenge/stage length mismatch");
  }
  double sum = puf.v;
  double suffix = 1.0;
  for (int i = puf.n; i-- > 0;) {
    suffix *= c[i] ? 1.0 : -1.0;
    sum += puf.w[i] * suffix;
  }
  return sum;
}

int eval_arbiter(const ArbiterPuf& puf, const Challenge& c,
                 SplitMix64* noise_rng) {
  double d = delay_difference(puf, c);
  if (noise_rng != nullptr && puf.noisiness > 0.0) {
    d += puf.noisiness * l2_norm(puf.w) * normal(*noise_rng);
  }
  return d >= 0.0 ? 1 : 0;
}

int eval_xor(const XorPuf& puf, const Challenge& c, SplitMix64* noise_rng) {
  if (puf.components.empty()) {
    throw std::invalid_argument("eval_xor: no components");
  }
  int r = 0;
  for (const ArbiterPuf& comp : puf.components) {
    r ^= eval_arbiter(comp, c, noise_rng);
  }
  return r;
}

int eval_ff(const FfPuf& puf, const Challenge& external,
            SplitMix64* noise_rng) {
  const int n = puf.base.n;
  validate_loops(n, puf.loops);
  if (puf.inner_bias.size() != puf.loops.size()) {
    throw std::invalid_argument("eval_ff: one inner bias per loop required");
  }
  if (static_cast<int>(external.size()) != puf.external_width()) {
    throw std::invalid_argument("eval_ff: external challenge length mismatch");
  }

  std::vector<std::uint8_t> is_loop_end(n + 1, 0);
  for (const FfLoop& loop : puf.loops) is_loop_end[loop.end] = 1;

  Challenge full(n);
  std::size_t next_ext = 0;
  for (int stage = 1; stage <= n; ++stage) {
    if (!is_loop_end[stage]) full[stage - 1] = external[next_ext++];
  }

  // Loop order by increasing end: every stage <= start is already resolved
  // when a loop fires, because any loop end among them is smaller.
  std::vector<std::size_t> order(puf.loops.size());
  for (std::size_t l = 0; l < order.size(); ++l) order[l] = l;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return puf.loops[a].end < puf.loops[b].end;
  });

  for (std::size_t l : order) {
    const FfLoop& loop = puf.loops[l];
    double sum = puf.inner_bias[l];
    double suffix = 1.0;
    for (int i = loop.start; i-- > 0;) {
      suffix *= full[i] ? 1.0 : -1.0;
      sum += puf.base.w[i] * suffix;
    }
    full[loop.end - 1] = sum >= 0.0 ? 1 : 0;
  }

  return eval_arbiter(puf.base, full, noise_rng);
}

int eval_variant(const PufVariant& puf, const Challenge& c,
                 SplitMix64* noise_rng) {
  return std::visit(
      [&](const auto& p) -> int {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ArbiterPuf>) {
          return eval_arbiter(p, c, noise_rng);
        } else if constexpr (std::is_same_v<T, XorPuf>) {
          return eval_xor(p, c, noise_rng);
        } else {
          return eval_ff(p, c, noise_rng);
        }
      },
      puf);
}

int challenge_width(const PufVariant& puf) {
  return std::visit(
      [](const auto& p) -> int {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ArbiterPuf>) {
          return p.n;
        } else if constexpr (std::is_same_v<T, XorPuf>) {
          return p.components.empty() ? 0 : p.components.front().n;
        } else {
          return p.external_width();
        }
      },
      puf);
}

int stage_count(const PufVariant& puf) {
  return std::visit(
      [](const auto& p) -> int {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ArbiterPuf>) {
          return p.n;
        } else if constexpr (std::is_same_v<T, XorPuf>) {
          return p.components.empty() ? 0 : p.components.front().n;
        } else {
          return p.base.n;
        }
      },
      puf);
}

double variant_noisiness(const PufVariant& puf) {
  return std::visit(
      [](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ArbiterPuf>) {
          return p.noisiness;
        } else if constexpr (std::is_same_v<T, XorPuf>) {
          return p.components.empty() ? 0.0 : p.components.front().noisiness;
        } else {
          return p.base.noisiness;
        }
      },
      puf);
}

std::string variant_tag(const PufVariant& puf) {
  if (std::holds_alternative<ArbiterPuf>(puf)) return "arbiter";
  if (std::holds_alternative<XorPuf>(puf)) return "xor";
  return "ff";
}

}  // namespace puflab
