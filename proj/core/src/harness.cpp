#include "puflab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <sstream>
#include <stdexcept>

#include "puflab/rng.hpp"

namespace puflab {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr std::size_t kDeskScaleBudgetCap = 500000;
constexpr int kDeskScaleInstanceCap = 3;

// Substream tags under one instance root.
constexpr std::uint64_t kPufTag = 10;
constexpr std::uint64_t kMaskTag = 11;
constexpr std::uint64_t kCrpTag = 12;
constexpr std::uint64_t kSplitTag = 13;
constexpr std::uint64_t kInitTag = 14;
constexpr std::uint64_t kTrainTag = 15;

std::uint64_t instance_root(const ExperimentSpec& spec, int index) {
  return derive_stream(derive_stream(spec.seed, 1),
                       static_cast<std::uint64_t>(index));
}

std::string loops_string(const std::vector<FfLoop>& loops) {
  std::ostringstream os;
  for (std::size_t l = 0; l < loops.size(); ++l) {
    if (l) os << ';';
    os << '(' << loops[l].start << ',' << loops[l].end << ')';
  }
  return os.str();
}

std::vector<FfLoop> loops_from_string(const std::string& text) {
  std::vector<FfLoop> loops;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t semi = text.find(';', pos);
    if (semi == std::string::npos) semi = text.size();
    const std::string tok = text.substr(pos, semi - pos);
    FfLoop loop;
    if (std::sscanf(tok.c_str(), "(%d,%d)", &loop.start, &loop.end) != 2) {
      throw std::runtime_error("malformed loop list '" + text + "'");
    }
    loops.push_back(loop);
    pos = semi + 1;
  }
  return loops;
}

std::string weight_model_string(const WeightModel& model) {
  return model.kind == WeightModelKind::GateDelay ? "gate_delay"
                                                  : "standard_normal";
}

WeightModel weight_model_from_string(const std::string& s) {
  if (s == "standard_normal") return WeightModel::standard_normal();
  if (s == "gate_delay") return WeightModel::gate_delay();
  throw std::runtime_error("unknown weight model '" + s + "'");
}

std::vector<FfLoop> effective_loops(const ExperimentSpec& spec) {
  if (spec.puf.type != PufType::Ff) return {};
  if (!spec.puf.loops.empty()) return spec.puf.loops;
  return default_ff_loops(spec.puf.n, spec.puf.k);
}

ExperimentSpec make_row(std::string label, PufDescriptor puf, int m,
                        bool noisy, AttackPreset preset, std::size_t budget,
                        int instances, std::uint64_t seed) {
  ExperimentSpec spec;
  spec.label = std::move(label);
  spec.puf = std::move(puf);
  spec.m = m;
  spec.noisy_crps = noisy;
  spec.preset = preset;
  spec.schedule = default_schedule(budget);
  spec.instances = instances;
  spec.seed = seed;
  return spec;
}

ordered_json record_to_json(const RunRecord& r) {
  ordered_json j;
  j["label"] = r.label;
  j["puf_type"] = r.puf_type;
  j["n"] = r.n;
  j["k"] = r.k;
  j["loops"] = r.loops;
  j["weight_model"] = r.weight_model;
  j["noisiness"] = r.noisiness;
  j["m"] = r.m;
  j["noisy_crps"] = r.noisy_crps;
  j["preset"] = r.preset;
  j["schedule"] = r.schedule;
  j["success_threshold"] = r.success_threshold;
  j["instances"] = r.instances;
  j["seed"] = r.seed;
  j["instance_index"] = r.instance_index;
  j["crp_count"] = r.crp_count;
  j["epochs_run"] = r.epochs_run;
  j["best_validation_accuracy"] = r.best_validation_accuracy;
  j["test_accuracy"] = r.test_accuracy;
  j["converged"] = r.converged;
  return j;
}

RunRecord record_from_json(const ordered_json& j) {
  RunRecord r;
  r.label = j.at("label").get<std::string>();
  r.puf_type = j.at("puf_type").get<std::string>();
  r.n = j.at("n").get<int>();
  r.k = j.at("k").get<int>();
  r.loops = j.at("loops").get<std::string>();
  r.weight_model = j.at("weight_model").get<std::string>();
  r.noisiness = j.at("noisiness").get<double>();
  r.m = j.at("m").get<int>();
  r.noisy_crps = j.at("noisy_crps").get<bool>();
  r.preset = j.at("preset").get<std::string>();
  r.schedule = j.at("schedule").get<std::vector<std::size_t>>();
  r.success_threshold = j.at("success_threshold").get<double>();
  r.instances = j.at("instances").get<int>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.instance_index = j.at("instance_index").get<int>();
  r.crp_count = j.at("crp_count").get<std::size_t>();
  r.epochs_run = j.at("epochs_run").get<int>();
  r.best_validation_accuracy = j.at("best_validation_accuracy").get<double>();
  r.test_accuracy = j.at("test_accuracy").get<double>();
  r.converged = j.at("converged").get<bool>();
  return r;
}

}  // namespace

std::string to_string(PufType type) {
  switch (type) {
    case PufType::Arbiter: return "arbiter";
    case PufType::Xor: return "xor";
    case PufType::Ff: return "ff";
  }
  throw std::invalid_argument("unknown PUF type");
}

std::string to_string(AttackPreset preset) {
  switch (preset) {
    case AttackPreset::Table1: return "table1";
    case AttackPreset::Table4: return "table4";
    case AttackPreset::SingleUnit: return "single-unit";
  }
  throw std::invalid_argument("unknown preset");
}

PufType puf_type_from_string(const std::string& s) {
  if (s == "arbiter") return PufType::Arbiter;
  if (s == "xor") return PufType::Xor;
  if (s == "ff") return PufType::Ff;
  throw std::runtime_error("unknown PUF type '" + s + "'");
}

AttackPreset preset_from_string(const std::string& s) {
  if (s == "table1") return AttackPreset::Table1;
  if (s == "table4") return AttackPreset::Table4;
  if (s == "single-unit") return AttackPreset::SingleUnit;
  throw std::runtime_error("unknown preset '" + s + "'");
}

MlpArchitecture preset_architecture(AttackPreset preset, int input_width) {
  switch (preset) {
    case AttackPreset::Table1: return MlpArchitecture::table1(input_width);
    case AttackPreset::Table4: return MlpArchitecture::table4(input_width);
    case AttackPreset::SingleUnit:
      return MlpArchitecture::single_unit(input_width);
  }
  throw std::invalid_argument("unknown preset");
}

int preset_batch_size(AttackPreset preset) {
  return preset == AttackPreset::Table4 ? 3000 : 1000;
}

void validate_spec(const ExperimentSpec& spec) {
  if (spec.puf.n < 1) throw std::invalid_argument("spec: n must be >= 1");
  if (spec.puf.k < 1) throw std::invalid_argument("spec: k must be >= 1");
  if (spec.puf.type == PufType::Arbiter && spec.puf.k != 1) {
    throw std::invalid_argument("spec: arbiter PUFs have k = 1");
  }
  if (spec.puf.noisiness < 0.0) {
    throw std::invalid_argument("spec: noisiness must be >= 0");
  }
  if (spec.m < 0) throw std::invalid_argument("spec: m must be >= 0");
  if (spec.instances < 1) {
    throw std::invalid_argument("spec: instances must be >= 1");
  }
  if (spec.schedule.empty()) {
    throw std::invalid_argument("spec: schedule must be nonempty");
  }
  for (std::size_t i = 0; i < spec.schedule.size(); ++i) {
    if (spec.schedule[i] < 20) {
      throw std::invalid_argument("spec: budgets below 20 cannot be split");
    }
    if (i > 0 && spec.schedule[i] <= spec.schedule[i - 1]) {
      throw std::invalid_argument("spec: schedule must be strictly increasing");
    }
  }
  if (!(spec.success_threshold > 0.5) || !(spec.success_threshold <= 1.0)) {
    throw std::invalid_argument("spec: threshold must be in (0.5, 1]");
  }
  if (spec.puf.type == PufType::Ff) {
    validate_loops(spec.puf.n, effective_loops(spec));
  } else if (!spec.puf.loops.empty()) {
    throw std::invalid_argument("spec: loops apply to FF PUFs only");
  }
}

std::string spec_label(const ExperimentSpec& spec) {
  if (!spec.label.empty()) return spec.label;
  std::ostringstream os;
  if (spec.m > 0) os << "Interfaced ";
  switch (spec.puf.type) {
    case PufType::Arbiter: os << "1-XPUF"; break;
    case PufType::Xor: os << spec.puf.k << "-XPUF"; break;
    case PufType::Ff:
      os << "FF (" << effective_loops(spec).size() << " loops)";
      break;
  }
  return os.str();
}

PufInstance make_instance(const ExperimentSpec& spec, int index) {
  validate_spec(spec);
  const std::uint64_t root = instance_root(spec, index);
  PufInstance instance;
  instance.seed = root;

  SplitMix64 puf_rng(derive_stream(root, kPufTag));
  const PufDescriptor& d = spec.puf;
  switch (d.type) {
    case PufType::Arbiter:
      instance.puf = sample_arbiter(puf_rng, d.n, d.weight_model, d.noisiness);
      break;
    case PufType::Xor:
      instance.puf = sample_xor(puf_rng, d.n, d.k, d.weight_model, d.noisiness);
      break;
    case PufType::Ff:
      instance.puf = sample_ff(puf_rng, d.n, effective_loops(spec),
                               d.weight_model, d.noisiness);
      break;
  }

  if (spec.m > 0) {
    SplitMix64 mask_rng(derive_stream(root, kMaskTag));
    instance.mask =
        sample_mask(mask_rng, challenge_width(instance.puf), spec.m);
  }
  return instance;
}

TrainReport run_attack(const ExperimentSpec& spec, int index,
                       std::size_t crp_count) {
  const PufInstance instance = make_instance(spec, index);
  const std::uint64_t root = instance_root(spec, index);

  const CrpSet set = generate_crps(instance, crp_count,
                                   derive_stream(root, kCrpTag),
                                   spec.noisy_crps);
  const SplitCrps parts = split(set, SplitSpec{}, derive_stream(root, kSplitTag));

  const MlpArchitecture arch =
      preset_architecture(spec.preset, input_width(instance));
  MlpModel model = init_model(arch, derive_stream(root, kInitTag));

  TrainConfig config;
  config.batch_size = preset_batch_size(spec.preset);
  config.seed = derive_stream(root, kTrainTag);

  TrainReport report = train(model, parts.train, parts.validation, config);
  report.test_accuracy = evaluate(model, parts.test);
  report.converged = report.test_accuracy >= spec.success_threshold;
  return report;
}

TrainReport run_attack(const ExperimentSpec& spec, int index) {
  validate_spec(spec);
  return run_attack(spec, index, spec.schedule.back());
}

EscalationReport escalate(const ExperimentSpec& spec) {
  validate_spec(spec);
  EscalationReport out;
  out.spec = spec;
  double best_sum = 0.0;
  for (int i = 0; i < spec.instances; ++i) {
    InstanceEscalation escalation;
    escalation.instance_index = i;
    for (std::size_t budget : spec.schedule) {
      AttackRun run;
      run.instance_index = i;
      run.crp_count = budget;
      run.report = run_attack(spec, i, budget);
      escalation.best_accuracy =
          std::max(escalation.best_accuracy, run.report.test_accuracy);
      const bool converged = run.report.converged;
      escalation.runs.push_back(std::move(run));
      if (converged) {
        escalation.converged = true;
        escalation.converged_at = budget;
        break;
      }
    }
    if (escalation.converged) ++out.converged_count;
    best_sum += escalation.best_accuracy;
    out.instances.push_back(std::move(escalation));
  }
  out.mean_best_accuracy = best_sum / static_cast<double>(spec.instances);
  return out;
}

std::vector<std::size_t> default_schedule(std::size_t budget) {
  if (budget < 20) {
    throw std::invalid_argument("default_schedule: budget must be >= 20");
  }
  std::vector<std::size_t> schedule;
  const std::size_t mantissas[] = {1, 2, 5};
  for (std::size_t decade = 1000; decade > 0; decade *= 10) {
    for (std::size_t mantissa : mantissas) {
      const std::size_t step = mantissa * decade;
      if (step >= budget) {
        schedule.push_back(budget);
        return schedule;
      }
      schedule.push_back(step);
    }
  }
  schedule.push_back(budget);
  return schedule;
}

void apply_desk_scale(ExperimentSpec& spec) {
  spec.instances = std::min(spec.instances, kDeskScaleInstanceCap);
  const bool capped =
      !spec.schedule.empty() && spec.schedule.back() > kDeskScaleBudgetCap;
  std::erase_if(spec.schedule,
                [](std::size_t b) { return b > kDeskScaleBudgetCap; });
  if (capped &&
      (spec.schedule.empty() || spec.schedule.back() != kDeskScaleBudgetCap)) {
    spec.schedule.push_back(kDeskScaleBudgetCap);
  }
}

std::vector<ExperimentSpec> preset_table3(bool desk_scale) {
  PufDescriptor arbiter;
  arbiter.type = PufType::Arbiter;
  arbiter.n = 64;
  arbiter.k = 1;
  arbiter.noisiness = 0.01;

  PufDescriptor xor3 = arbiter;
  xor3.type = PufType::Xor;
  xor3.k = 3;

  std::vector<ExperimentSpec> rows;
  rows.push_back(make_row("1-XPUF", arbiter, 0, true, AttackPreset::Table1,
                          5000, 30, 101));
  rows.push_back(make_row("3-XPUF", xor3, 0, true, AttackPreset::Table1,
                          9000, 30, 102));
  rows.push_back(make_row("Interfaced 1-XPUF", arbiter, 16, true,
                          AttackPreset::Table1, 4500000, 30, 103));
  rows.push_back(make_row("Interfaced 3-XPUF", xor3, 16, true,
                          AttackPreset::Table1, 4500000, 30, 104));
  if (desk_scale) {
    for (ExperimentSpec& row : rows) apply_desk_scale(row);
  }
  return rows;
}

std::vector<ExperimentSpec> preset_table6(bool desk_scale) {
  const std::size_t budgets[] = {70000,  180000, 440000, 520000,
                                 600000, 770000, 1000000};
  std::vector<ExperimentSpec> rows;
  for (int loops = 4; loops <= 10; ++loops) {
    PufDescriptor ff;
    ff.type = PufType::Ff;
    ff.n = 64;
    ff.k = loops;
    ff.weight_model = WeightModel::gate_delay();
    rows.push_back(make_row("FF (" + std::to_string(loops) + " loops)", ff, 0,
                            false, AttackPreset::Table4, budgets[loops - 4], 3,
                            600 + static_cast<std::uint64_t>(loops)));
  }
  if (desk_scale) {
    for (ExperimentSpec& row : rows) apply_desk_scale(row);
  }
  return rows;
}

std::vector<ExperimentSpec> preset_table7(bool desk_scale) {
  std::vector<ExperimentSpec> rows;
  for (int loops = 4; loops <= 10; ++loops) {
    PufDescriptor ff;
    ff.type = PufType::Ff;
    ff.n = 64;
    ff.k = loops;
    ff.weight_model = WeightModel::gate_delay();
    const std::size_t budget = loops == 4 ? 370000 : 4500000;
    rows.push_back(make_row(
        "Interfaced FF (" + std::to_string(loops) + " loops)", ff, loops,
        false, AttackPreset::Table4, budget, 3,
        700 + static_cast<std::uint64_t>(loops)));
  }
  if (desk_scale) {
    for (ExperimentSpec& row : rows) apply_desk_scale(row);
  }
  return rows;
}

std::vector<RunRecord> to_records(const std::vector<EscalationReport>& reports) {
  std::vector<RunRecord> records;
  for (const EscalationReport& report : reports) {
    const ExperimentSpec& spec = report.spec;
    RunRecord base;
    base.label = spec_label(spec);
    base.puf_type = to_string(spec.puf.type);
    base.n = spec.puf.n;
    base.k = spec.puf.k;
    base.loops = loops_string(effective_loops(spec));
    base.weight_model = weight_model_string(spec.puf.weight_model);
    base.noisiness = spec.puf.noisiness;
    base.m = spec.m;
    base.noisy_crps = spec.noisy_crps;
    base.preset = to_string(spec.preset);
    base.schedule = spec.schedule;
    base.success_threshold = spec.success_threshold;
    base.instances = spec.instances;
    base.seed = spec.seed;
    for (const InstanceEscalation& escalation : report.instances) {
      for (const AttackRun& run : escalation.runs) {
        RunRecord record = base;
        record.instance_index = run.instance_index;
        record.crp_count = run.crp_count;
        record.epochs_run = run.report.epochs_run;
        record.best_validation_accuracy = run.report.best_validation_accuracy;
        record.test_accuracy = run.report.test_accuracy;
        record.converged = run.report.converged;
        records.push_back(std::move(record));
      }
    }
  }
  return records;
}

void write_records(const std::vector<RunRecord>& records,
                   const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) {
    throw std::runtime_error("write_records: cannot open " + path.string());
  }
  for (const RunRecord& record : records) {
    os << record_to_json(record).dump() << '\n';
  }
  if (!os) {
    throw std::runtime_error("write_records: write failed for " + path.string());
  }
}

std::vector<RunRecord> read_records(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) {
    throw std::runtime_error("read_records: cannot open " + path.string());
  }
  std::vector<RunRecord> records;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      records.push_back(record_from_json(ordered_json::parse(line)));
    } catch (const std::exception& ex) {
      throw std::runtime_error(path.string() + ": line " +
                               std::to_string(lineno) + ": " + ex.what());
    }
  }
  return records;
}

std::string render_table(const std::vector<EscalationReport>& reports) {
  if (reports.empty()) {
    throw std::invalid_argument("render_table: no results");
  }
  std::ostringstream os;
  os << std::left << std::setw(26) << "PUF type" << std::right << std::setw(10)
     << "CRPs" << std::setw(10) << "Accuracy" << std::setw(17) << "Time"
     << std::setw(11) << "Converged" << '\n';
  os << std::string(74, '-') << '\n';
  for (const EscalationReport& report : reports) {
    std::size_t crps = 0;
    double time_sum = 0.0;
    for (const InstanceEscalation& escalation : report.instances) {
      const AttackRun& last = escalation.runs.back();
      crps = std::max(crps, last.crp_count);
      if (escalation.converged) time_sum += last.report.wall_time_sec;
    }
    std::ostringstream acc;
    acc << std::fixed << std::setprecision(1)
        << report.mean_best_accuracy * 100.0 << '%';
    std::ostringstream time;
    if (report.converged_count == 0) {
      time << "No convergence";
    } else {
      time << std::fixed << std::setprecision(1)
           << time_sum / report.converged_count << " sec";
    }
    os << std::left << std::setw(26) << spec_label(report.spec) << std::right
       << std::setw(10) << crps << std::setw(10) << acc.str() << std::setw(17)
       << time.str() << std::setw(11)
       << (std::to_string(report.converged_count) + "/" +
           std::to_string(report.instances.size()))
       << '\n';
  }
  return os.str();
}

ExperimentSpec parse_experiment_spec(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) {
    throw std::runtime_error("parse_experiment_spec: cannot open " +
                             path.string());
  }
  ordered_json j;
  try {
    j = ordered_json::parse(is);
  } catch (const std::exception& ex) {
    throw std::runtime_error(path.string() + ": " + ex.what());
  }

  ExperimentSpec spec;
  for (const auto& [key, value] : j.items()) {
    if (key == "label") {
      spec.label = value.get<std::string>();
    } else if (key == "type") {
      spec.puf.type = puf_type_from_string(value.get<std::string>());
    } else if (key == "n") {
      spec.puf.n = value.get<int>();
    } else if (key == "k") {
      spec.puf.k = value.get<int>();
    } else if (key == "loops") {
      spec.puf.loops = loops_from_string(value.get<std::string>());
    } else if (key == "weight_model") {
      spec.puf.weight_model =
          weight_model_from_string(value.get<std::string>());
    } else if (key == "noisiness") {
      spec.puf.noisiness = value.get<double>();
    } else if (key == "m") {
      spec.m = value.get<int>();
    } else if (key == "noisy_crps") {
      spec.noisy_crps = value.get<bool>();
    } else if (key == "preset") {
      spec.preset = preset_from_string(value.get<std::string>());
    } else if (key == "schedule") {
      spec.schedule = value.get<std::vector<std::size_t>>();
    } else if (key == "success_threshold") {
      spec.success_threshold = value.get<double>();
    } else if (key == "instances") {
      spec.instances = value.get<int>();
    } else if (key == "seed") {
      spec.seed = value.get<std::uint64_t>();
    } else {
      throw std::runtime_error(path.string() + ": unknown spec key '" + key +
                               "'");
    }
  }
  validate_spec(spec);
  return spec;
}

}  // namespace puflab
