// Desk-scale acceptance gate. Runs ten end-to-end criteria and prints one
// verdict line per criterion; the exit code is the failure count.
//
// Usage: acceptance --cli PATH [--work-dir DIR] [--only 1,5,10]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "puflab/challenge.hpp"
#include "puflab/crp_dataset.hpp"
#include "puflab/harness.hpp"
#include "puflab/mlp.hpp"
#include "puflab/obfuscation.hpp"
#include "puflab/puf_models.hpp"
#include "puflab/rng.hpp"

using namespace puflab;

namespace {

struct Options {
  std::string cli;
  std::filesystem::path work_dir = "acceptance_work";
  std::set<int> only;
};

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string format_seconds(double seconds) {
  std::ostringstream os;
  os.precision(1);
  os << std::fixed << seconds << " s";
  return os.str();
}

std::string format_accuracy(double a) {
  std::ostringstream os;
  os.precision(4);
  os << std::fixed << a;
  return os.str();
}

// ---------------------------------------------------------------------------
// Criterion 1: bare arbiter population, preset network, 5K CRPs.

Outcome criterion_1() {
  const ExperimentSpec spec = preset_table3(true)[0];
  double sum = 0.0;
  std::vector<double> accs;
  for (int i = 0; i < 3; ++i) {
    const TrainReport report = run_attack(spec, i, 5000);
    accs.push_back(report.test_accuracy);
    sum += report.test_accuracy;
  }
  const double mean = sum / 3.0;
  Outcome out;
  out.pass = mean >= 0.95;
  std::ostringstream os;
  os << "mean test accuracy " << format_accuracy(mean) << " over 3 instances ("
     << format_accuracy(accs[0]) << ", " << format_accuracy(accs[1]) << ", "
     << format_accuracy(accs[2]) << "); requires >= 0.95";
  out.detail = os.str();
  return out;
}

// ---------------------------------------------------------------------------
// Criterion 2: 3-XOR population, escalation to 30K. Requires every instance
// to converge and at least one to converge within 10K CRPs.

Outcome criterion_2() {
  ExperimentSpec spec = preset_table3(true)[1];
  spec.schedule = default_schedule(30000);
  const EscalationReport report = escalate(spec);

  const bool all = report.converged_count == 3;
  std::size_t earliest = 0;
  std::ostringstream budgets;
  for (const InstanceEscalation& escalation : report.instances) {
    if (budgets.tellp() > 0) budgets << ", ";
    if (escalation.converged) {
      budgets << escalation.converged_at;
      if (earliest == 0 || escalation.converged_at < earliest) {
        earliest = escalation.converged_at;
      }
    } else {
      budgets << "none";
    }
  }
  const bool early = earliest > 0 && earliest <= 10000;

  Outcome out;
  out.pass = all && early;
  std::ostringstream os;
  os << "converged " << report.converged_count << "/3 at budgets {"
     << budgets.str() << "}; requires 3/3 and one budget <= 10000";
  out.detail = os.str();
  return out;
}

// ---------------------------------------------------------------------------
// Criteria 3 and 4: interfaced arbiter and 3-XOR populations stay below the
// success regime through the full 500K escalation.

Outcome resistance_criterion(const ExperimentSpec& spec, double accuracy_cap) {
  const EscalationReport report = escalate(spec);
  Outcome out;
  out.pass = report.converged_count == 0 &&
             report.mean_best_accuracy <= accuracy_cap;
  std::ostringstream os;
  os << "converged " << report.converged_count << "/" << spec.instances
     << ", mean best accuracy " << format_accuracy(report.mean_best_accuracy)
     << "; requires 0 converged and mean <= " << accuracy_cap;
  out.detail = os.str();
  return out;
}

Outcome criterion_3() {
  return resistance_criterion(preset_table3(true)[2], 0.80);
}

Outcome criterion_4() {
  return resistance_criterion(preset_table3(true)[3], 0.65);
}

// ---------------------------------------------------------------------------
// Criterion 5: 4-loop feed-forward population at 70K CRPs.

Outcome criterion_5() {
  const ExperimentSpec spec = preset_table6(true)[0];
  double sum = 0.0;
  std::vector<double> accs;
  for (int i = 0; i < 3; ++i) {
    const TrainReport report = run_attack(spec, i, 70000);
    accs.push_back(report.test_accuracy);
    sum += report.test_accuracy;
  }
  const double mean = sum / 3.0;
  Outcome out;
  out.pass = mean >= 0.90;
  std::ostringstream os;
  os << "mean test accuracy " << format_accuracy(mean) << " over 3 instances ("
     << format_accuracy(accs[0]) << ", " << format_accuracy(accs[1]) << ", "
     << format_accuracy(accs[2]) << "); requires >= 0.90";
  out.detail = os.str();
  return out;
}

// ---------------------------------------------------------------------------
// Criterion 6: interfaced 6-loop feed-forward population resists the full
// escalation.

Outcome criterion_6() {
  ExperimentSpec spec = preset_table7(true)[2];
  spec.instances = 2;
  const EscalationReport report = escalate(spec);
  Outcome out;
  out.pass =
      report.converged_count == 0 && report.mean_best_accuracy < 0.70;
  std::ostringstream os;
  os << "converged " << report.converged_count << "/2, mean best accuracy "
     << format_accuracy(report.mean_best_accuracy)
     << "; requires 0 converged and mean < 0.70";
  out.detail = os.str();
  return out;
}

// ---------------------------------------------------------------------------
// Criterion 7: analytic gradients against central finite differences on both
// preset architectures.

double loss_at(const MlpModel& model, const Eigen::MatrixXd& x,
               const Eigen::VectorXd& y) {
  return bce_loss(forward(model, x), y);
}

double worst_gradient_error(MlpModel model, const Eigen::MatrixXd& x,
                            const Eigen::VectorXd& y) {
  const Gradients grads = backward(model, x, y);
  const double h = 1e-5;
  double worst = 0.0;
  const auto probe = [&](double& param, double analytic) {
    const double keep = param;
    param = keep + h;
    const double up = loss_at(model, x, y);
    param = keep - h;
    const double down = loss_at(model, x, y);
    param = keep;
    const double numeric = (up - down) / (2 * h);
    const double scale =
        std::max({std::abs(numeric), std::abs(analytic), 1e-4});
    worst = std::max(worst, std::abs(numeric - analytic) / scale);
  };
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    for (int r = 0; r < model.weights[l].rows(); ++r) {
      for (int c = 0; c < model.weights[l].cols(); ++c) {
        probe(model.weights[l](r, c), grads.weights[l](r, c));
      }
    }
    for (int r = 0; r < model.biases[l].size(); ++r) {
      probe(model.biases[l](r), grads.biases[l](r));
    }
  }
  return worst;
}

Outcome criterion_7() {
  SplitMix64 rng(77);
  const auto random_batch = [&rng](int width, int count) {
    Eigen::MatrixXd bits(width, count);
    for (int c = 0; c < count; ++c) {
      for (int r = 0; r < width; ++r) {
        bits(r, c) = static_cast<double>(uniform_bit(rng));
      }
    }
    return bits;
  };
  const auto random_labels = [&rng](int count) {
    Eigen::VectorXd y(count);
    for (int i = 0; i < count; ++i) {
      y(i) = static_cast<double>(uniform_bit(rng));
    }
    return y;
  };

  const MlpModel narrow = init_model(MlpArchitecture::table1(64), 701);
  const double err1 = worst_gradient_error(
      narrow, phi_input_layer(random_batch(64, 8)), random_labels(8));

  const MlpModel wide = init_model(MlpArchitecture::table4(60), 702);
  const double err4 = worst_gradient_error(
      wide, phi_input_layer(random_batch(60, 8)), random_labels(8));

  Outcome out;
  out.pass = err1 <= 1e-4 && err4 <= 1e-4;
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << "max relative gradient error " << err1
     << " (32-64-32) and " << err4 << " (64-32-32-64); requires <= 1e-4";
  out.detail = os.str();
  return out;
}

// ---------------------------------------------------------------------------
// Criterion 8: exhaustive small-width equivalences. The feed-forward
// reference walks gate arrival times directly, with no parity transform and
// no weight reduction.

struct OracleStage {
  double straight_top;
  double straight_bottom;
  double cross_top;
  double cross_bottom;
};

std::vector<OracleStage> oracle_draw_gates(std::uint64_t seed, int n) {
  SplitMix64 rng(seed);
  std::vector<OracleStage> gates(n);
  for (int i = 0; i < n; ++i) {
    gates[i].straight_top = 300.0 + 40.0 * normal(rng);
    gates[i].straight_bottom = 300.0 + 40.0 * normal(rng);
    gates[i].cross_top = 300.0 + 40.0 * normal(rng);
    gates[i].cross_bottom = 300.0 + 40.0 * normal(rng);
  }
  return gates;
}

void oracle_step(const OracleStage& g, int bit, double& top, double& bottom) {
  if (bit) {
    top += g.straight_top;
    bottom += g.straight_bottom;
  } else {
    const double new_top = bottom + g.cross_top;
    const double new_bottom = top + g.cross_bottom;
    top = new_top;
    bottom = new_bottom;
  }
}

int oracle_walk_ff(const std::vector<OracleStage>& gates,
                   const std::vector<FfLoop>& loops,
                   const Challenge& external) {
  const int n = static_cast<int>(gates.size());
  std::vector<int> bit_source(n + 1, -1);
  for (std::size_t l = 0; l < loops.size(); ++l) {
    bit_source[loops[l].end] = static_cast<int>(l);
  }
  std::vector<int> inner_bit(loops.size(), -1);
  double top = 0.0;
  double bottom = 0.0;
  std::size_t next_ext = 0;
  for (int stage = 1; stage <= n; ++stage) {
    const int source = bit_source[stage];
    const int bit = source >= 0 ? inner_bit[static_cast<std::size_t>(source)]
                                : external[next_ext++];
    oracle_step(gates[stage - 1], bit, top, bottom);
    for (std::size_t l = 0; l < loops.size(); ++l) {
      if (loops[l].start == stage) {
        inner_bit[l] = top - bottom >= 0.0 ? 1 : 0;
      }
    }
  }
  return top - bottom >= 0.0 ? 1 : 0;
}

Challenge bits_of(std::uint32_t value, int width) {
  Challenge c(width);
  for (int i = 0; i < width; ++i) {
    c[i] = (value >> i) & 1u;
  }
  return c;
}

Outcome criterion_8() {
  long checked = 0;

  SplitMix64 xor_rng(81);
  const XorPuf xpuf =
      sample_xor(xor_rng, 8, 3, WeightModel::standard_normal(), 0.0);
  for (std::uint32_t v = 0; v < 256; ++v) {
    const Challenge c = bits_of(v, 8);
    int expected = 0;
    for (const ArbiterPuf& component : xpuf.components) {
      expected ^= eval_arbiter(component, c);
    }
    if (eval_xor(xpuf, c) != expected) {
      return {false, "XOR decomposition mismatch at challenge " +
                         to_bitstring(c)};
    }
    ++checked;
  }

  const std::vector<std::vector<FfLoop>> loop_sets = {{{2, 5}},
                                                      {{3, 6}, {2, 7}}};
  const std::vector<int> ns = {6, 8};
  for (std::size_t t = 0; t < loop_sets.size(); ++t) {
    const std::uint64_t seed = 82 + t;
    const int n = ns[t];
    const std::vector<OracleStage> gates = oracle_draw_gates(seed, n);
    SplitMix64 ff_rng(seed);
    const FfPuf ff =
        sample_ff(ff_rng, n, loop_sets[t], WeightModel::gate_delay(), 0.0);
    const int width = ff.external_width();
    for (std::uint32_t v = 0; v < (1u << width); ++v) {
      const Challenge external = bits_of(v, width);
      if (eval_ff(ff, external) !=
          oracle_walk_ff(gates, loop_sets[t], external)) {
        return {false, "feed-forward walk mismatch at external challenge " +
                           to_bitstring(external)};
      }
      ++checked;
    }
  }

  SplitMix64 ghost_rng(83);
  const ArbiterPuf inner =
      sample_arbiter(ghost_rng, 4, WeightModel::standard_normal(), 0.0);
  const GhostMask mask = sample_mask(ghost_rng, 4, 2);
  const InterfacedPuf interfaced{inner, mask};
  for (std::uint32_t v = 0; v < 64; ++v) {
    const Challenge input = bits_of(v, 6);
    const int response = eval_interfaced(interfaced, input);
    if (response != eval_arbiter(inner, apply_mask(mask, input))) {
      return {false, "interface extraction mismatch at input " +
                         to_bitstring(input)};
    }
    for (int pos = 1; pos <= 6; ++pos) {
      if (std::find(mask.selected.begin(), mask.selected.end(), pos) !=
          mask.selected.end()) {
        continue;
      }
      Challenge flipped = input;
      flipped[pos - 1] ^= 1u;
      if (eval_interfaced(interfaced, flipped) != response) {
        return {false, "ghost bit " + std::to_string(pos) +
                           " changed the response at input " +
                           to_bitstring(input)};
      }
    }
    ++checked;
  }

  for (std::uint32_t v = 0; v < 256; ++v) {
    const Challenge c = bits_of(v, 8);
    if (inverse_transform(transform_challenge(c)) != c) {
      return {false,
              "parity transform roundtrip failed at " + to_bitstring(c)};
    }
    ++checked;
  }

  return {true, "XOR decomposition, feed-forward walk, interface truth "
                "table, and parity roundtrip hold on " +
                    std::to_string(checked) + " exhaustive cases"};
}

// ---------------------------------------------------------------------------
// Criterion 9: a single sigmoid unit on parity features learns a noise-free
// 64-stage arbiter from 5K CRPs.

Outcome criterion_9() {
  const std::uint64_t seed = 909;
  SplitMix64 rng(derive_stream(seed, 10));
  PufInstance instance;
  instance.puf = sample_arbiter(rng, 64, WeightModel::standard_normal(), 0.0);
  instance.seed = seed;

  const CrpSet set =
      generate_crps(instance, 5000, derive_stream(seed, 12), false);
  const SplitCrps parts = split(set, SplitSpec{}, derive_stream(seed, 13));

  MlpModel model = init_model(MlpArchitecture::single_unit(64),
                              derive_stream(seed, 14));
  TrainConfig config;
  config.adam.learning_rate = 0.05;
  config.patience = 20;
  config.seed = derive_stream(seed, 15);
  train(model, parts.train, parts.validation, config);
  const double accuracy = evaluate(model, parts.test);

  Outcome out;
  out.pass = accuracy >= 0.95;
  out.detail = "single-unit test accuracy " + format_accuracy(accuracy) +
               "; requires >= 0.95";
  return out;
}

// ---------------------------------------------------------------------------
// Criterion 10: the table-3 preset writes byte-identical records across two
// runs.

std::string slurp(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

Outcome criterion_10(const Options& options) {
  std::filesystem::create_directories(options.work_dir);
  const auto first = options.work_dir / "table3_run1.jsonl";
  const auto second = options.work_dir / "table3_run2.jsonl";

  for (const auto& path : {first, second}) {
    std::ostringstream cmd;
    cmd << options.cli << " reproduce --table 3 --desk-scale --report "
        << path << " > " << (path.string() + ".log") << " 2>&1";
    const int rc = std::system(cmd.str().c_str());
    if (rc != 0) {
      return {false, "reproduce run exited with status " +
                         std::to_string(rc) + ", see " + path.string() +
                         ".log"};
    }
  }

  const std::string a = slurp(first);
  const std::string b = slurp(second);
  Outcome out;
  out.pass = !a.empty() && a == b;
  if (a.empty()) {
    out.detail = "first run produced no records";
  } else if (a != b) {
    out.detail = "record files differ between runs";
  } else {
    std::size_t lines = std::count(a.begin(), a.end(), '\n');
    out.detail = "two runs wrote identical records (" +
                 std::to_string(lines) + " lines, " +
                 std::to_string(a.size()) + " bytes)";
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  Options options;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    const auto next = [&]() -> std::string {
      if (i + 1 >= argc) {
        std::cerr << "missing value for " << arg << '\n';
        std::exit(2);
      }
      return argv[++i];
    };
    if (arg == "--cli") {
      options.cli = next();
    } else if (arg == "--work-dir") {
      options.work_dir = next();
    } else if (arg == "--only") {
      std::stringstream list(next());
      std::string token;
      while (std::getline(list, token, ',')) {
        options.only.insert(std::stoi(token));
      }
    } else {
      std::cerr << "unknown argument " << arg << '\n';
      return 2;
    }
  }

  struct Criterion {
    int id;
    std::string name;
    double time_limit_sec;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "bare arbiter attack at 5K CRPs", 60.0, criterion_1},
      {2, "3-XOR attack with escalation to 30K", 600.0, criterion_2},
      {3, "interfaced arbiter (m=16) resistance to 500K", 2700.0,
       criterion_3},
      {4, "interfaced 3-XOR (m=16) resistance to 500K", 3600.0, criterion_4},
      {5, "4-loop feed-forward attack at 70K CRPs", 900.0, criterion_5},
      {6, "interfaced 6-loop feed-forward resistance to 500K", 0.0,
       criterion_6},
      {7, "gradient oracle on both preset networks", 0.0, criterion_7},
      {8, "exhaustive small-width equivalences", 0.0, criterion_8},
      {9, "linear separability with a single sigmoid unit", 0.0, criterion_9},
      {10, "byte-identical records across repeated runs", 0.0,
       [&options]() { return criterion_10(options); }},
  };

  if (!options.only.empty()) {
    for (int id : options.only) {
      if (id < 1 || id > static_cast<int>(criteria.size())) {
        std::cerr << "no criterion " << id << '\n';
        return 2;
      }
    }
  }
  if (options.cli.empty() &&
      (options.only.empty() || options.only.count(10) > 0)) {
    std::cerr << "--cli PATH is required to run criterion 10\n";
    return 2;
  }

  int failures = 0;
  int ran = 0;
  for (const Criterion& criterion : criteria) {
    if (!options.only.empty() && options.only.count(criterion.id) == 0) {
      continue;
    }
    ++ran;
    Outcome outcome;
    const auto start = std::chrono::steady_clock::now();
    try {
      outcome = criterion.run();
    } catch (const std::exception& ex) {
      outcome.pass = false;
      outcome.detail = std::string("exception: ") + ex.what();
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                      start)
            .count();
    std::string timing = format_seconds(elapsed);
    if (criterion.time_limit_sec > 0.0) {
      timing += " of " + format_seconds(criterion.time_limit_sec) + " allowed";
      if (elapsed > criterion.time_limit_sec) {
        outcome.pass = false;
        outcome.detail += "; exceeded the runtime bound";
      }
    }
    if (!outcome.pass) ++failures;
    std::cout << (outcome.pass ? "[PASS]" : "[FAIL]") << " criterion "
              << criterion.id << ": " << criterion.name << " | "
              << outcome.detail << " | " << timing << std::endl;
  }

  std::cout << "acceptance: " << (ran - failures) << "/" << ran
            << " criteria passed" << std::endl;
  return failures;
}
