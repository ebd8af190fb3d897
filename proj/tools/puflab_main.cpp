#include <CLI11.hpp>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <string>
#include <vector>

#include "puflab/harness.hpp"
#include "puflab/instance_io.hpp"
#include "puflab/rng.hpp"

namespace {

using puflab::AttackPreset;
using puflab::PufType;

struct GenPufArgs {
  std::string type = "arbiter";
  int n = 64;
  int k = 1;
  std::string loops;
  double noisiness = 0.0;
  int m = 0;
  std::string weight_model = "standard-normal";
  std::uint64_t seed = 0;
  std::string out;
};

int run_gen_puf(const GenPufArgs& args) {
  const PufType type = puflab::puf_type_from_string(args.type);
  puflab::WeightModel model = args.weight_model == "gate-delay"
                                  ? puflab::WeightModel::gate_delay()
                                  : puflab::WeightModel::standard_normal();

  puflab::PufInstance instance;
  instance.seed = args.seed;
  puflab::SplitMix64 rng(puflab::derive_stream(args.seed, 10));
  switch (type) {
    case PufType::Arbiter:
      if (args.k != 1) throw std::runtime_error("arbiter PUFs have k = 1");
      instance.puf = puflab::sample_arbiter(rng, args.n, model, args.noisiness);
      break;
    case PufType::Xor:
      instance.puf =
          puflab::sample_xor(rng, args.n, args.k, model, args.noisiness);
      break;
    case PufType::Ff: {
      std::vector<puflab::FfLoop> loops;
      if (args.loops.empty()) {
        loops = puflab::default_ff_loops(args.n, args.k);
      } else {
        int start = 0;
        int end = 0;
        const char* p = args.loops.c_str();
        int consumed = 0;
        while (std::sscanf(p, "(%d,%d)%n", &start, &end, &consumed) == 2) {
          loops.push_back({start, end});
          p += consumed;
          if (*p == ';') ++p;
        }
        if (*p != '\0' || loops.empty()) {
          throw std::runtime_error("bad --loops, expected '(i1,i2);(i1,i2)'");
        }
      }
      instance.puf =
          puflab::sample_ff(rng, args.n, loops, model, args.noisiness);
      break;
    }
  }

  if (args.m > 0) {
    puflab::SplitMix64 mask_rng(puflab::derive_stream(args.seed, 11));
    instance.mask = puflab::sample_mask(
        mask_rng, puflab::challenge_width(instance.puf), args.m);
  }

  puflab::write_instance(instance, args.out);
  std::cout << "wrote " << puflab::variant_tag(instance.puf) << " instance ("
            << puflab::input_width(instance) << " input bits) to " << args.out
            << '\n';
  return 0;
}

struct GenCrpsArgs {
  std::string puf;
  std::size_t count = 0;
  bool noisy = false;
  std::uint64_t seed = 0;
  std::string out;
};

int run_gen_crps(const GenCrpsArgs& args) {
  const puflab::PufInstance instance = puflab::read_instance(args.puf);
  puflab::generate_crps_to_file(instance, args.count, args.seed, args.noisy,
                                args.out);
  std::cout << "wrote " << args.count << " CRPs of width "
            << puflab::input_width(instance) << " to " << args.out << '\n';
  return 0;
}

struct AttackArgs {
  std::string crps;
  std::string preset = "table1";
  bool raw_bits = false;
  std::uint64_t seed = 0;
  double threshold = 0.90;
  std::string report;
  std::string model_out;
};

int run_attack_cmd(const AttackArgs& args) {
  const AttackPreset preset = puflab::preset_from_string(args.preset);
  const puflab::CrpSet set = puflab::read_crps(args.crps);
  const puflab::SplitCrps parts =
      puflab::split(set, puflab::SplitSpec{}, puflab::derive_stream(args.seed, 13));

  puflab::MlpArchitecture arch =
      puflab::preset_architecture(preset, set.meta.width);
  arch.use_phi_input = !args.raw_bits;
  puflab::MlpModel model =
      puflab::init_model(arch, puflab::derive_stream(args.seed, 14));

  puflab::TrainConfig config;
  config.batch_size = puflab::preset_batch_size(preset);
  config.seed = puflab::derive_stream(args.seed, 15);

  puflab::TrainReport report =
      puflab::train(model, parts.train, parts.validation, config);
  report.test_accuracy = puflab::evaluate(model, parts.test);
  report.converged = report.test_accuracy >= args.threshold;

  std::cout << "crps=" << set.size() << " epochs=" << report.epochs_run
            << " val_acc=" << report.best_validation_accuracy
            << " test_acc=" << report.test_accuracy
            << " time=" << report.wall_time_sec << "s"
            << " converged=" << (report.converged ? "yes" : "no") << '\n';

  if (!args.model_out.empty()) {
    puflab::write_model(model, args.model_out);
  }
  if (!args.report.empty()) {
    nlohmann::ordered_json j;
    j["source"] = args.crps;
    j["width"] = set.meta.width;
    j["puf_type"] = set.meta.type;
    j["preset"] = args.preset;
    j["raw_bits"] = args.raw_bits;
    j["seed"] = args.seed;
    j["success_threshold"] = args.threshold;
    j["crp_count"] = set.size();
    j["epochs_run"] = report.epochs_run;
    j["best_validation_accuracy"] = report.best_validation_accuracy;
    j["test_accuracy"] = report.test_accuracy;
    j["converged"] = report.converged;
    j["wall_time_sec"] = report.wall_time_sec;
    std::ofstream os(args.report);
    if (!os) throw std::runtime_error("cannot open " + args.report);
    os << j.dump() << '\n';
  }
  return 0;
}

struct EscalateArgs {
  std::string spec;
  bool desk_scale = false;
  std::string report;
};

int run_escalate(const EscalateArgs& args) {
  puflab::ExperimentSpec spec = puflab::parse_experiment_spec(args.spec);
  if (args.desk_scale) puflab::apply_desk_scale(spec);
  const puflab::EscalationReport report = puflab::escalate(spec);
  std::cout << puflab::render_table({report});
  if (!args.report.empty()) {
    puflab::write_records(puflab::to_records({report}), args.report);
  }
  return 0;
}

struct ReproduceArgs {
  int table = 3;
  bool desk_scale = false;
  std::string report;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

int run_reproduce(const ReproduceArgs& args) {
  std::vector<puflab::ExperimentSpec> rows;
  switch (args.table) {
    case 3: rows = puflab::preset_table3(args.desk_scale); break;
    case 6: rows = puflab::preset_table6(args.desk_scale); break;
    case 7: rows = puflab::preset_table7(args.desk_scale); break;
    default: throw std::runtime_error("--table must be 3, 6, or 7");
  }
  if (args.seed_set) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      rows[i].seed = puflab::derive_stream(args.seed, i);
    }
  }
  std::vector<puflab::EscalationReport> reports;
  for (const puflab::ExperimentSpec& row : rows) {
    reports.push_back(puflab::escalate(row));
    std::cout << "finished " << puflab::spec_label(row) << '\n';
  }
  std::cout << puflab::render_table(reports);
  if (!args.report.empty()) {
    puflab::write_records(puflab::to_records(reports), args.report);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Arbiter-PUF simulation and attack benchmark"};
  app.require_subcommand(1);

  GenPufArgs gen_puf;
  CLI::App* gp = app.add_subcommand("gen-puf", "Sample a PUF instance");
  gp->add_option("--type", gen_puf.type, "arbiter, xor, or ff")
      ->check(CLI::IsMember({"arbiter", "xor", "ff"}))
      ->required();
  gp->add_option("--n", gen_puf.n, "Stage count")->required();
  gp->add_option("--k", gen_puf.k, "XOR components or FF loops");
  gp->add_option("--loops", gen_puf.loops, "FF loops as '(i1,i2);(i1,i2)'");
  gp->add_option("--noisiness", gen_puf.noisiness, "Noise scale");
  gp->add_option("--m", gen_puf.m, "Ghost bits of the input interface");
  gp->add_option("--weight-model", gen_puf.weight_model,
                 "standard-normal or gate-delay")
      ->check(CLI::IsMember({"standard-normal", "gate-delay"}));
  gp->add_option("--seed", gen_puf.seed, "RNG seed")->required();
  gp->add_option("--out", gen_puf.out, "Instance file")->required();

  GenCrpsArgs gen_crps;
  CLI::App* gc = app.add_subcommand("gen-crps", "Generate CRPs for an instance");
  gc->add_option("--puf", gen_crps.puf, "Instance file")->required();
  gc->add_option("--count", gen_crps.count, "Number of CRPs")->required();
  gc->add_flag("--noisy", gen_crps.noisy, "Apply measurement noise");
  gc->add_option("--seed", gen_crps.seed, "RNG seed")->required();
  gc->add_option("--out", gen_crps.out, "CRP file")->required();

  AttackArgs attack;
  CLI::App* at = app.add_subcommand("attack", "Train a model on a CRP file");
  at->add_option("--crps", attack.crps, "CRP file")->required();
  at->add_option("--preset", attack.preset, "table1, table4, or single-unit")
      ->check(CLI::IsMember({"table1", "table4", "single-unit"}))
      ->required();
  at->add_flag("--raw-bits", attack.raw_bits,
               "Feed raw bits instead of parity features");
  at->add_option("--seed", attack.seed, "RNG seed")->required();
  at->add_option("--threshold", attack.threshold,
                 "Test accuracy counted as converged");
  at->add_option("--report", attack.report, "Write a JSON record here");
  at->add_option("--model-out", attack.model_out, "Write the trained model here");

  EscalateArgs escalate;
  CLI::App* es = app.add_subcommand("escalate", "Run one escalation experiment");
  es->add_option("--spec", escalate.spec, "Experiment spec (JSON)")->required();
  es->add_flag("--desk-scale", escalate.desk_scale,
               "Cap budgets at 500K and instances at 3");
  es->add_option("--report", escalate.report, "Write JSONL records here");

  ReproduceArgs reproduce;
  CLI::App* rp = app.add_subcommand("reproduce", "Run a results-table preset");
  rp->add_option("--table", reproduce.table, "3, 6, or 7")->required();
  rp->add_flag("--desk-scale", reproduce.desk_scale,
               "Cap budgets at 500K and instances at 3");
  rp->add_option("--report", reproduce.report, "Write JSONL records here");
  CLI::Option* seed_opt =
      rp->add_option("--seed", reproduce.seed, "Override the preset seeds");

  CLI11_PARSE(app, argc, argv);
  reproduce.seed_set = seed_opt->count() > 0;

  try {
    if (gp->parsed()) return run_gen_puf(gen_puf);
    if (gc->parsed()) return run_gen_crps(gen_crps);
    if (at->parsed()) return run_attack_cmd(attack);
    if (es->parsed()) return run_escalate(escalate);
    if (rp->parsed()) return run_reproduce(reproduce);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 1;
  }
  return 0;
}
