#pragma once

#include <string>
#include <variant>
#include <vector>

#include "puflab/challenge.hpp"
#include "puflab/rng.hpp"

namespace puflab {

enum class WeightModelKind { StandardNormal, GateDelay };

// Distribution the stage parameters are drawn from. StandardNormal draws
// each weight and bias directly from N(mean, stddev). GateDelay draws four
// per-stage gate delays from N(mean, stddev) and reduces them to the linear
// model (see sample_arbiter).
struct WeightModel {
  WeightModelKind kind = WeightModelKind::StandardNormal;
  double mean = 0.0;
  double stddev = 1.0;

  static WeightModel standard_normal() { return {WeightModelKind::StandardNormal, 0.0, 1.0}; }
  static WeightModel gate_delay() { return {WeightModelKind::GateDelay, 300.0, 40.0}; }
};

// n-stage arbiter chain under the additive delay model: the delay difference
// for challenge c is v + sum_i w[i] * phi[i] with phi the parity transform
// of c. The response bit is 1 when the difference is >= 0 (sign of exactly
// zero maps to 1). noisiness scales the per-evaluation Gaussian perturbation
// as a fraction of ||w||_2.
struct ArbiterPuf {
  int n = 0;
  std::vector<double> w;
  double v = 0.0;
  double noisiness = 0.0;
};

// k arbiter chains on a shared challenge; responses are XORed.
struct XorPuf {
  std::vector<ArbiterPuf> components;
};

// Feed-forward loop: an inner arbiter taps the racing signals after stage
// `start` and its decision bit drives the challenge input of stage `end`.
// 1-based stage indices, start < end.
struct FfLoop {
  int start = 0;
  int end = 0;
};

// Arbiter chain of n stages where the challenge bits of the k loop-ending
// stages are produced by inner arbiters instead of being externally applied.
// The external challenge has n - k bits, filling the non-loop-end stages in
// increasing stage order. inner_bias[l] is the bias of loop l's inner
// arbiter, in the order of `loops`.
struct FfPuf {
  ArbiterPuf base;
  std::vector<FfLoop> loops;
  std::vector<double> inner_bias;

  int external_width() const { return base.n - static_cast<int>(loops.size()); }
};

using PufVariant = std::variant<ArbiterPuf, XorPuf, FfPuf>;

// Four gate delays of one stage: the two output gates in the straight
// configuration and the two in the crossed configuration.
struct StageGates {
  double straight_top = 0.0;
  double straight_bottom = 0.0;
  double cross_top = 0.0;
  double cross_bottom = 0.0;
};

// Draws the four delays i.i.d. from N(model.mean, model.stddev).
StageGates sample_stage_gates(SplitMix64& rng, const WeightModel& model);

// Samples an n-stage arbiter chain.
//
// StandardNormal: w[1..n] then v, each N(mean, stddev), in that draw order.
//
// GateDelay: per stage, four delays (straight_top, straight_bottom,
// cross_top, cross_bottom). With per-stage differentials
//   s_i = straight_top - straight_bottom,  x_i = cross_top - cross_bottom,
//   u_i = (s_i - x_i)/2,                   t_i = (s_i + x_i)/2,
// the delay difference after the last stage is exactly
//   v + sum_i w[i]*phi[i]   with   w[1] = u_1, w[i] = u_i + t_{i-1}, v = t_n.
// The common-mode terms t_i couple into the next stage's weight; only the
// last one lands in the bias.
ArbiterPuf sample_arbiter(SplitMix64& rng, int n, const WeightModel& model,
                          double noisiness);

// k independently sampled components of n stages each.
XorPuf sample_xor(SplitMix64& rng, int n, int k, const WeightModel& model,
                  double noisiness);

// Samples the base chain plus one inner-arbiter bias per loop. In
// StandardNormal mode the inner biases are drawn like v, after the base
// parameters, in loop order. In GateDelay mode loop l's bias is the stage
// residual t_{start(l)} of the same reduction that produced the weights, so
// the model agrees exactly with a gate-level walk of the chain.
FfPuf sample_ff(SplitMix64& rng, int n, std::vector<FfLoop> loops,
                const WeightModel& model, double noisiness);

// Deterministic loop pattern for experiments: k loop ends evenly spaced over
// [n/2, n-1], start = end - round(n/4), nudged down while it collides with a
// loop end and clamped to [1, end-1].
std::vector<FfLoop> default_ff_loops(int n, int k);

// Throws std::invalid_argument unless: 1 <= start < end <= n for every
// loop, loop ends are pairwise distinct, and no loop end equals another
// loop's start.
void validate_loops(int n, const std::vector<FfLoop>& loops);

// Noise-free delay difference v + sum w[i]*phi[i]. Throws on length
// mismatch.
double delay_difference(const ArbiterPuf& puf, const Challenge& c);

// Response bit: 1 iff delay_difference + eps >= 0, where eps is 0 without a
// noise stream and N(0, noisiness*||w||_2) with one.
int eval_arbiter(const ArbiterPuf& puf, const Challenge& c,
                 SplitMix64* noise_rng = nullptr);

// XOR of the component responses; each component takes its own noise draw.
int eval_xor(const XorPuf& puf, const Challenge& c,
             SplitMix64* noise_rng = nullptr);

// Builds the full n-bit internal challenge by resolving loop-end bits in
// increasing end order: the bit at stage end is the sign (>= 0 maps to 1) of
// inner_bias + sum_{i<=start} w[i]*phi(i), with phi the parity transform of
// the already-determined bits of stages 1..start. Noise applies only to the
// final arbiter.
int eval_ff(const FfPuf& puf, const Challenge& external,
            SplitMix64* noise_rng = nullptr);

int eval_variant(const PufVariant& puf, const Challenge& c,
                 SplitMix64* noise_rng = nullptr);

// Width of the externally applied challenge: n for arbiter/XOR, n-k for FF.
int challenge_width(const PufVariant& puf);

// Stage count n of the underlying chain(s).
int stage_count(const PufVariant& puf);

double variant_noisiness(const PufVariant& puf);

// "arbiter", "xor" or "ff".
std::string variant_tag(const PufVariant& puf);

}  // namespace puflab
