#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "puflab/mlp.hpp"

namespace puflab {

enum class PufType { Arbiter, Xor, Ff };
enum class AttackPreset { Table1, Table4, SingleUnit };

std::string to_string(PufType type);
std::string to_string(AttackPreset preset);
PufType puf_type_from_string(const std::string& s);
AttackPreset preset_from_string(const std::string& s);

// Batch size and architecture for a preset at a given input width.
MlpArchitecture preset_architecture(AttackPreset preset, int input_width);
int preset_batch_size(AttackPreset preset);

struct PufDescriptor {
  PufType type = PufType::Arbiter;
  int n = 64;
  int k = 1;
  std::vector<FfLoop> loops;
  WeightModel weight_model = WeightModel::standard_normal();
  double noisiness = 0.0;
};

// One experiment row: a PUF population, an optional input interface of m
// ghost bits, an attack preset, and a CRP escalation schedule shared by all
// sampled instances.
struct ExperimentSpec {
  std::string label;
  PufDescriptor puf;
  int m = 0;
  bool noisy_crps = false;
  AttackPreset preset = AttackPreset::Table1;
  std::vector<std::size_t> schedule;
  double success_threshold = 0.90;
  int instances = 3;
  std::uint64_t seed = 0;
};

// Rejects empty or non-strictly-increasing schedules, thresholds outside
// (0.5, 1], non-positive n/k/instance counts, negative m or noisiness, and
// invalid explicit FF loop sets.
void validate_spec(const ExperimentSpec& spec);

// The spec's label, or one derived from the descriptor ("3-XPUF",
// "FF (4 loops)", with an "Interfaced " prefix when m > 0).
std::string spec_label(const ExperimentSpec& spec);

// Deterministically samples instance `index` of the spec's population,
// including its interface mask when m > 0.
PufInstance make_instance(const ExperimentSpec& spec, int index);

// Samples the instance, generates `crp_count` CRPs, splits 85-5-10, trains
// the preset network, and evaluates on the held-out test part. Fills
// test_accuracy and converged (test accuracy >= spec.success_threshold).
// Deterministic given (spec, index, crp_count); results for one instance do
// not depend on how many other instances the spec asks for.
TrainReport run_attack(const ExperimentSpec& spec, int index,
                       std::size_t crp_count);

// Same, at the spec's largest scheduled budget.
TrainReport run_attack(const ExperimentSpec& spec, int index);

struct AttackRun {
  int instance_index = 0;
  std::size_t crp_count = 0;
  TrainReport report;
};

struct InstanceEscalation {
  int instance_index = 0;
  std::vector<AttackRun> runs;
  bool converged = false;
  std::size_t converged_at = 0;
  double best_accuracy = 0.0;
};

struct EscalationReport {
  ExperimentSpec spec;
  std::vector<InstanceEscalation> instances;
  int converged_count = 0;
  double mean_best_accuracy = 0.0;
};

// Walks the schedule for every instance, stopping an instance at its first
// converged budget.
EscalationReport escalate(const ExperimentSpec& spec);

// Geometric budget ladder 1K, 2K, 5K, 10K, ... truncated below `budget`,
// with `budget` itself as the final step.
std::vector<std::size_t> default_schedule(std::size_t budget);

// Experiment rows of the three result tables. desk_scale caps budgets at
// 500K CRPs and instance counts at 3.
std::vector<ExperimentSpec> preset_table3(bool desk_scale = false);
std::vector<ExperimentSpec> preset_table6(bool desk_scale = false);
std::vector<ExperimentSpec> preset_table7(bool desk_scale = false);

void apply_desk_scale(ExperimentSpec& spec);

// One structured record per training run: every spec field plus the run's
// budget, epoch count, and accuracies. Wall time stays out of the records so
// that identical seeds give byte-identical files.
struct RunRecord {
  std::string label;
  std::string puf_type;
  int n = 0;
  int k = 0;
  std::string loops;
  std::string weight_model;
  double noisiness = 0.0;
  int m = 0;
  bool noisy_crps = false;
  std::string preset;
  std::vector<std::size_t> schedule;
  double success_threshold = 0.0;
  int instances = 0;
  std::uint64_t seed = 0;
  int instance_index = 0;
  std::size_t crp_count = 0;
  int epochs_run = 0;
  double best_validation_accuracy = 0.0;
  double test_accuracy = 0.0;
  bool converged = false;

  bool operator==(const RunRecord&) const = default;
};

std::vector<RunRecord> to_records(const std::vector<EscalationReport>& reports);

// JSON-lines serialization of records; read(write(r)) == r.
void write_records(const std::vector<RunRecord>& records,
                   const std::filesystem::path& path);
std::vector<RunRecord> read_records(const std::filesystem::path& path);

// Human-readable summary, one row per spec: PUF type, CRPs, accuracy, mean
// training time ("No convergence" when no instance converged), and the
// converged instance count.
std::string render_table(const std::vector<EscalationReport>& reports);

// Reads an ExperimentSpec from a JSON file.
ExperimentSpec parse_experiment_spec(const std::filesystem::path& path);

}  // namespace puflab
