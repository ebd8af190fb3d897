#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "puflab/challenge.hpp"
#include "puflab/crp_dataset.hpp"
#include "puflab/mlp.hpp"
#include "puflab/obfuscation.hpp"
#include "puflab/puf_models.hpp"
#include "puflab/rng.hpp"

namespace {

using namespace puflab;

Challenge make_challenge(int n, std::uint64_t seed) {
  SplitMix64 rng(seed);
  return random_challenge(rng, n);
}

void BM_TransformChallenge(benchmark::State& state) {
  const Challenge c = make_challenge(64, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(transform_challenge(c));
  }
}
BENCHMARK(BM_TransformChallenge);

void BM_EvalArbiter(benchmark::State& state) {
  SplitMix64 rng(2);
  const ArbiterPuf puf =
      sample_arbiter(rng, 64, WeightModel::standard_normal(), 0.0);
  const Challenge c = make_challenge(64, 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(eval_arbiter(puf, c));
  }
}
BENCHMARK(BM_EvalArbiter);

void BM_EvalXor(benchmark::State& state) {
  SplitMix64 rng(4);
  const XorPuf puf =
      sample_xor(rng, 64, static_cast<int>(state.range(0)),
                 WeightModel::standard_normal(), 0.0);
  const Challenge c = make_challenge(64, 5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(eval_xor(puf, c));
  }
}
BENCHMARK(BM_EvalXor)->Arg(3)->Arg(8);

void BM_EvalFf(benchmark::State& state) {
  const int loops = static_cast<int>(state.range(0));
  SplitMix64 rng(6);
  const FfPuf puf = sample_ff(rng, 64, default_ff_loops(64, loops),
                              WeightModel::gate_delay(), 0.0);
  const Challenge c = make_challenge(puf.external_width(), 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(eval_ff(puf, c));
  }
}
BENCHMARK(BM_EvalFf)->Arg(4)->Arg(10);

void BM_EvalInterfaced(benchmark::State& state) {
  SplitMix64 rng(8);
  InterfacedPuf puf;
  puf.inner = sample_xor(rng, 64, 3, WeightModel::standard_normal(), 0.0);
  puf.mask = sample_mask(rng, 64, 16);
  const Challenge input = make_challenge(80, 9);
  for (auto _ : state) {
    benchmark::DoNotOptimize(eval_interfaced(puf, input));
  }
}
BENCHMARK(BM_EvalInterfaced);

void BM_GenerateCrps(benchmark::State& state) {
  const std::size_t count = static_cast<std::size_t>(state.range(0));
  SplitMix64 rng(10);
  PufInstance instance;
  instance.puf = sample_arbiter(rng, 64, WeightModel::standard_normal(), 0.01);
  for (auto _ : state) {
    benchmark::DoNotOptimize(generate_crps(instance, count, 11, true));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(count));
}
BENCHMARK(BM_GenerateCrps)->Arg(1000)->Arg(10000);

CrpSet sample_set(std::size_t count) {
  SplitMix64 rng(12);
  PufInstance instance;
  instance.puf = sample_arbiter(rng, 64, WeightModel::standard_normal(), 0.0);
  return generate_crps(instance, count, 13, false);
}

void BM_PhiFeatures(benchmark::State& state) {
  const CrpSet set = sample_set(1000);
  for (auto _ : state) {
    benchmark::DoNotOptimize(feature_matrix(set, true));
  }
}
BENCHMARK(BM_PhiFeatures);

void BM_Forward(benchmark::State& state) {
  const CrpSet set = sample_set(1000);
  const Eigen::MatrixXd features = feature_matrix(set, true);
  const MlpArchitecture arch = state.range(0) == 1
                                   ? MlpArchitecture::table1(64)
                                   : MlpArchitecture::table4(64);
  const MlpModel model = init_model(arch, 14);
  for (auto _ : state) {
    benchmark::DoNotOptimize(forward(model, features));
  }
}
BENCHMARK(BM_Forward)->Arg(1)->Arg(4);

void BM_Backward(benchmark::State& state) {
  const CrpSet set = sample_set(1000);
  const Eigen::MatrixXd features = feature_matrix(set, true);
  const Eigen::VectorXd labels = label_vector(set);
  const MlpModel model = init_model(MlpArchitecture::table4(64), 15);
  for (auto _ : state) {
    benchmark::DoNotOptimize(backward(model, features, labels));
  }
}
BENCHMARK(BM_Backward);

void BM_AdamStep(benchmark::State& state) {
  const CrpSet set = sample_set(1000);
  const Eigen::MatrixXd features = feature_matrix(set, true);
  const Eigen::VectorXd labels = label_vector(set);
  MlpModel model = init_model(MlpArchitecture::table4(64), 16);
  AdamState adam = init_adam(model);
  const Gradients grads = backward(model, features, labels);
  const AdamConfig config;
  for (auto _ : state) {
    optimizer_step(adam, model, grads, config);
    benchmark::DoNotOptimize(model.weights.back());
  }
}
BENCHMARK(BM_AdamStep);

void BM_TrainEpochs(benchmark::State& state) {
  const CrpSet all = sample_set(5000);
  const SplitCrps parts = split(all, SplitSpec{}, 17);
  for (auto _ : state) {
    MlpModel model = init_model(MlpArchitecture::table1(64), 18);
    TrainConfig config;
    config.max_epochs = 5;
    config.patience = 4;
    config.seed = 19;
    TrainReport report = train(model, parts.train, parts.validation, config);
    benchmark::DoNotOptimize(report.best_validation_accuracy);
  }
}
BENCHMARK(BM_TrainEpochs)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
