#include "puflab/mlp.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

#include "puflab/rng.hpp"

namespace puflab {

namespace {

std::vector<std::pair<int, int>> layer_shapes(const MlpArchitecture& arch) {
  std::vector<std::pair<int, int>> shapes;
  int in = arch.input_width;
  for (int h : arch.hidden_sizes) {
    shapes.emplace_back(h, in);
    in = h;
  }
  shapes.emplace_back(1, in);
  return shapes;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double accuracy_of(const Eigen::VectorXd& probabilities,
                   const Eigen::VectorXd& labels) {
  Eigen::Index hits = 0;
  for (Eigen::Index i = 0; i < probabilities.size(); ++i) {
    const int predicted = probabilities[i] >= 0.5 ? 1 : 0;
    if (predicted == static_cast<int>(labels[i])) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(probabilities.size());
}

// Forward pass keeping every layer input; activations[0] is the feature
// batch, activations[l] the tanh output feeding layer l.
struct ForwardTrace {
  std::vector<Eigen::MatrixXd> activations;
  Eigen::RowVectorXd probabilities;
};

ForwardTrace forward_trace(const MlpModel& model,
                           const Eigen::MatrixXd& features) {
  if (features.rows() != model.arch.input_width) {
    throw std::invalid_argument("forward: feature width does not match model");
  }
  ForwardTrace trace;
  trace.activations.reserve(model.weights.size());
  trace.activations.push_back(features);
  const std::size_t layers = model.weights.size();
  for (std::size_t l = 0; l + 1 < layers; ++l) {
    Eigen::MatrixXd z =
        (model.weights[l] * trace.activations[l]).colwise() + model.biases[l];
    trace.activations.push_back(z.array().tanh().matrix());
  }
  Eigen::RowVectorXd z =
      model.weights.back() * trace.activations.back();
  z.array() += model.biases.back()[0];
  trace.probabilities = z.unaryExpr([](double v) { return sigmoid(v); });
  return trace;
}

void check_parameter_shapes(const MlpModel& model) {
  const auto shapes = layer_shapes(model.arch);
  if (model.weights.size() != shapes.size() ||
      model.biases.size() != shapes.size()) {
    throw std::invalid_argument("model has the wrong layer count");
  }
  for (std::size_t l = 0; l < shapes.size(); ++l) {
    if (model.weights[l].rows() != shapes[l].first ||
        model.weights[l].cols() != shapes[l].second ||
        model.biases[l].size() != shapes[l].first) {
      throw std::invalid_argument("model parameter shapes do not chain");
    }
  }
}

std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

[[noreturn]] void parse_fail(const std::filesystem::path& path, int line,
                             const std::string& msg) {
  std::ostringstream os;
  os << path.string() << ": line " << line << ": " << msg;
  throw std::runtime_error(os.str());
}

// Gathers a training batch as a dense feature matrix plus labels, applying
// the parity transform in place when requested.
void gather_batch(const CrpSet& set, const std::vector<std::uint32_t>& perm,
                  std::size_t begin, std::size_t count, bool use_phi,
                  Eigen::MatrixXd& features, Eigen::VectorXd& labels) {
  const auto width = static_cast<std::size_t>(set.meta.width);
  features.resize(static_cast<Eigen::Index>(width),
                  static_cast<Eigen::Index>(count));
  labels.resize(static_cast<Eigen::Index>(count));
  for (std::size_t j = 0; j < count; ++j) {
    const std::uint8_t* row = set.inputs.data() + perm[begin + j] * width;
    double* col = features.col(static_cast<Eigen::Index>(j)).data();
    if (use_phi) {
      double suffix = 1.0;
      for (std::size_t i = width; i-- > 0;) {
        suffix *= row[i] ? 1.0 : -1.0;
        col[i] = suffix;
      }
    } else {
      for (std::size_t i = 0; i < width; ++i) col[i] = row[i];
    }
    labels[static_cast<Eigen::Index>(j)] = set.responses[perm[begin + j]];
  }
}

}  // namespace

void validate_architecture(const MlpArchitecture& arch) {
  if (arch.input_width < 1) {
    throw std::invalid_argument("architecture: input width must be >= 1");
  }
  for (int h : arch.hidden_sizes) {
    if (h < 1) {
      throw std::invalid_argument("architecture: layer widths must be >= 1");
    }
  }
}

MlpModel init_model(const MlpArchitecture& arch, std::uint64_t seed) {
  validate_architecture(arch);
  MlpModel model;
  model.arch = arch;
  SplitMix64 eng(seed);
  for (const auto& [rows, cols] : layer_shapes(arch)) {
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    Eigen::MatrixXd w(rows, cols);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        w(r, c) = limit * (2.0 * uniform_unit(eng) - 1.0);
      }
    }
    model.weights.push_back(std::move(w));
    model.biases.push_back(Eigen::VectorXd::Zero(rows));
  }
  return model;
}

Eigen::MatrixXd phi_input_layer(const Eigen::MatrixXd& bits) {
  Eigen::MatrixXd phi(bits.rows(), bits.cols());
  for (Eigen::Index j = 0; j < bits.cols(); ++j) {
    double suffix = 1.0;
    for (Eigen::Index i = bits.rows(); i-- > 0;) {
      const double b = bits(i, j);
      if (b != 0.0 && b != 1.0) {
        throw std::invalid_argument("phi_input_layer: inputs must be 0 or 1");
      }
      suffix *= b == 1.0 ? 1.0 : -1.0;
      phi(i, j) = suffix;
    }
  }
  return phi;
}

Eigen::MatrixXd feature_matrix(const CrpSet& set, bool use_phi) {
  std::vector<std::uint32_t> identity(set.size());
  std::iota(identity.begin(), identity.end(), 0u);
  Eigen::MatrixXd features;
  Eigen::VectorXd labels;
  gather_batch(set, identity, 0, set.size(), use_phi, features, labels);
  return features;
}

Eigen::VectorXd label_vector(const CrpSet& set) {
  Eigen::VectorXd labels(static_cast<Eigen::Index>(set.size()));
  for (std::size_t i = 0; i < set.size(); ++i) {
    labels[static_cast<Eigen::Index>(i)] = set.responses[i];
  }
  return labels;
}

Eigen::VectorXd forward(const MlpModel& model,
                        const Eigen::MatrixXd& features) {
  check_parameter_shapes(model);
  return forward_trace(model, features).probabilities.transpose();
}

double bce_loss(const Eigen::VectorXd& probabilities,
                const Eigen::VectorXd& labels) {
  if (probabilities.size() != labels.size()) {
    throw std::invalid_argument("bce_loss: length mismatch");
  }
  constexpr double kEps = 1e-7;
  double total = 0.0;
  for (Eigen::Index i = 0; i < probabilities.size(); ++i) {
    const double y = labels[i];
    if (y != 0.0 && y != 1.0) {
      throw std::invalid_argument("bce_loss: labels must be 0 or 1");
    }
    const double p = std::clamp(probabilities[i], kEps, 1.0 - kEps);
    total -= y * std::log(p) + (1.0 - y) * std::log(1.0 - p);
  }
  return total / static_cast<double>(probabilities.size());
}

Gradients backward(const MlpModel& model, const Eigen::MatrixXd& features,
                   const Eigen::VectorXd& labels) {
  check_parameter_shapes(model);
  if (features.cols() != labels.size()) {
    throw std::invalid_argument("backward: batch and label sizes differ");
  }
  const ForwardTrace trace = forward_trace(model, features);
  const auto batch = static_cast<double>(features.cols());
  const std::size_t layers = model.weights.size();

  Gradients grads;
  grads.weights.resize(layers);
  grads.biases.resize(layers);

  Eigen::MatrixXd delta =
      (trace.probabilities - labels.transpose()) / batch;
  for (std::size_t l = layers; l-- > 0;) {
    grads.weights[l] = delta * trace.activations[l].transpose();
    grads.biases[l] = delta.rowwise().sum();
    if (l > 0) {
      delta = (model.weights[l].transpose() * delta).cwiseProduct(
          (1.0 - trace.activations[l].array().square()).matrix());
    }
  }
  return grads;
}

AdamState init_adam(const MlpModel& model) {
  AdamState state;
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    state.m_weights.push_back(
        Eigen::MatrixXd::Zero(model.weights[l].rows(), model.weights[l].cols()));
    state.v_weights.push_back(
        Eigen::MatrixXd::Zero(model.weights[l].rows(), model.weights[l].cols()));
    state.m_biases.push_back(Eigen::VectorXd::Zero(model.biases[l].size()));
    state.v_biases.push_back(Eigen::VectorXd::Zero(model.biases[l].size()));
  }
  return state;
}

void optimizer_step(AdamState& state, MlpModel& model, const Gradients& grads,
                    const AdamConfig& config) {
  if (state.m_weights.size() != model.weights.size()) {
    throw std::invalid_argument("optimizer_step: state does not match model");
  }
  ++state.step;
  const double mc = 1.0 - std::pow(config.beta1, state.step);
  const double vc = 1.0 - std::pow(config.beta2, state.step);
  const auto update = [&](auto& m, auto& v, auto& param, const auto& grad) {
    m = config.beta1 * m + (1.0 - config.beta1) * grad;
    v = (config.beta2 * v.array() +
         (1.0 - config.beta2) * grad.array().square())
            .matrix();
    param.array() -=
        config.learning_rate * (m.array() / mc) /
        ((v.array() / vc).sqrt() + config.epsilon);
  };
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    update(state.m_weights[l], state.v_weights[l], model.weights[l],
           grads.weights[l]);
    update(state.m_biases[l], state.v_biases[l], model.biases[l],
           grads.biases[l]);
  }
}

TrainReport train(MlpModel& model, const CrpSet& train_set,
                  const CrpSet& val_set, const TrainConfig& config) {
  check_parameter_shapes(model);
  if (train_set.size() == 0 || val_set.size() == 0) {
    throw std::invalid_argument("train: datasets must be nonempty");
  }
  if (train_set.meta.width != model.arch.input_width ||
      val_set.meta.width != model.arch.input_width) {
    throw std::invalid_argument("train: dataset width does not match model");
  }
  if (config.batch_size < 1) {
    throw std::invalid_argument("train: batch_size must be >= 1");
  }
  if (config.max_epochs < 1 || config.patience < 1 ||
      config.patience >= config.max_epochs) {
    throw std::invalid_argument("train: need 1 <= patience < max_epochs");
  }

  const auto start_time = std::chrono::steady_clock::now();
  const bool use_phi = model.arch.use_phi_input;
  const Eigen::MatrixXd val_features = feature_matrix(val_set, use_phi);
  const Eigen::VectorXd val_labels = label_vector(val_set);

  AdamState opt = init_adam(model);
  std::vector<std::uint32_t> perm(train_set.size());
  std::iota(perm.begin(), perm.end(), 0u);

  std::vector<Eigen::MatrixXd> best_weights = model.weights;
  std::vector<Eigen::VectorXd> best_biases = model.biases;
  double best_val = -1.0;
  int stale_epochs = 0;

  TrainReport report;
  Eigen::MatrixXd batch_features;
  Eigen::VectorXd batch_labels;
  const auto batch = static_cast<std::size_t>(config.batch_size);

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    SplitMix64 eng(derive_stream(config.seed, static_cast<std::uint64_t>(epoch)));
    fisher_yates_shuffle(perm.begin(), perm.end(), eng);
    for (std::size_t begin = 0; begin < perm.size(); begin += batch) {
      const std::size_t count = std::min(batch, perm.size() - begin);
      gather_batch(train_set, perm, begin, count, use_phi, batch_features,
                   batch_labels);
      const Gradients grads = backward(model, batch_features, batch_labels);
      optimizer_step(opt, model, grads, config.adam);
    }

    const double val_acc =
        accuracy_of(forward(model, val_features), val_labels);
    report.epochs_run = epoch;
    if (val_acc > best_val) {
      best_val = val_acc;
      best_weights = model.weights;
      best_biases = model.biases;
      stale_epochs = 0;
    } else {
      ++stale_epochs;
    }
    if (stale_epochs >= config.patience) break;
  }

  model.weights = std::move(best_weights);
  model.biases = std::move(best_biases);
  report.best_validation_accuracy = best_val;
  report.wall_time_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                    start_time)
          .count();
  return report;
}

double evaluate(const MlpModel& model, const CrpSet& test_set) {
  if (test_set.size() == 0) {
    throw std::invalid_argument("evaluate: dataset must be nonempty");
  }
  const Eigen::MatrixXd features =
      feature_matrix(test_set, model.arch.use_phi_input);
  return accuracy_of(forward(model, features), label_vector(test_set));
}

void write_model(const MlpModel& model, const std::filesystem::path& path) {
  check_parameter_shapes(model);
  std::ofstream os(path);
  if (!os) {
    throw std::runtime_error("write_model: cannot open " + path.string());
  }
  os << "#mlp input=" << model.arch.input_width << " hidden=";
  for (std::size_t i = 0; i < model.arch.hidden_sizes.size(); ++i) {
    if (i) os << ',';
    os << model.arch.hidden_sizes[i];
  }
  os << " phi=" << (model.arch.use_phi_input ? 1 : 0) << '\n';
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    const auto& w = model.weights[l];
    os << 'W' << l << ' ' << w.rows() << ' ' << w.cols() << '\n';
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) {
        if (c) os << ' ';
        os << fmt_double(w(r, c));
      }
      os << '\n';
    }
    os << 'b' << l << ' ' << model.biases[l].size() << '\n';
    for (Eigen::Index r = 0; r < model.biases[l].size(); ++r) {
      if (r) os << ' ';
      os << fmt_double(model.biases[l][r]);
    }
    os << '\n';
  }
  if (!os) {
    throw std::runtime_error("write_model: write failed for " + path.string());
  }
}

MlpModel read_model(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) {
    throw std::runtime_error("read_model: cannot open " + path.string());
  }
  int lineno = 0;
  std::string text;
  auto next_line = [&]() {
    if (!std::getline(is, text)) {
      parse_fail(path, lineno + 1, "unexpected end of file");
    }
    ++lineno;
    if (!text.empty() && text.back() == '\r') text.pop_back();
  };
  auto parse_doubles = [&](Eigen::Index expected, double* out) {
    std::string_view rest = text;
    Eigen::Index got = 0;
    while (!rest.empty()) {
      const std::size_t sp = rest.find(' ');
      const std::string_view tok =
          sp == std::string_view::npos ? rest : rest.substr(0, sp);
      rest = sp == std::string_view::npos ? std::string_view{}
                                          : rest.substr(sp + 1);
      if (tok.empty()) continue;
      if (got == expected) parse_fail(path, lineno, "too many values");
      double value = 0.0;
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
      if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
        parse_fail(path, lineno, "malformed float '" + std::string(tok) + "'");
      }
      out[got++] = value;
    }
    if (got != expected) {
      parse_fail(path, lineno, "expected " + std::to_string(expected) + " values");
    }
  };

  next_line();
  MlpArchitecture arch;
  {
    std::istringstream hs(text);
    std::string tag, input_tok, hidden_tok, phi_tok;
    hs >> tag >> input_tok >> hidden_tok >> phi_tok;
    if (tag != "#mlp" || input_tok.rfind("input=", 0) != 0 ||
        hidden_tok.rfind("hidden=", 0) != 0 || phi_tok.rfind("phi=", 0) != 0) {
      parse_fail(path, lineno, "expected '#mlp input=... hidden=... phi=...'");
    }
    arch.input_width = std::stoi(input_tok.substr(6));
    const std::string hidden = hidden_tok.substr(7);
    std::size_t pos = 0;
    while (pos < hidden.size()) {
      std::size_t comma = hidden.find(',', pos);
      if (comma == std::string::npos) comma = hidden.size();
      arch.hidden_sizes.push_back(std::stoi(hidden.substr(pos, comma - pos)));
      pos = comma + 1;
    }
    arch.use_phi_input = phi_tok.substr(4) == "1";
  }
  validate_architecture(arch);

  MlpModel model;
  model.arch = arch;
  const auto shapes = layer_shapes(arch);
  for (std::size_t l = 0; l < shapes.size(); ++l) {
    next_line();
    std::istringstream hs(text);
    std::string tag;
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
    hs >> tag >> rows >> cols;
    if (tag != "W" + std::to_string(l) || rows != shapes[l].first ||
        cols != shapes[l].second) {
      parse_fail(path, lineno, "expected 'W" + std::to_string(l) + " " +
                                   std::to_string(shapes[l].first) + " " +
                                   std::to_string(shapes[l].second) + "'");
    }
    Eigen::MatrixXd w(rows, cols);
    std::vector<double> row(static_cast<std::size_t>(cols));
    for (Eigen::Index r = 0; r < rows; ++r) {
      next_line();
      parse_doubles(cols, row.data());
      for (Eigen::Index c = 0; c < cols; ++c) w(r, c) = row[static_cast<std::size_t>(c)];
    }
    model.weights.push_back(std::move(w));

    next_line();
    std::istringstream bs(text);
    Eigen::Index size = 0;
    bs >> tag >> size;
    if (tag != "b" + std::to_string(l) || size != shapes[l].first) {
      parse_fail(path, lineno, "expected 'b" + std::to_string(l) + " " +
                                   std::to_string(shapes[l].first) + "'");
    }
    Eigen::VectorXd b(size);
    next_line();
    parse_doubles(size, b.data());
    model.biases.push_back(std::move(b));
  }
  return model;
}

}  // namespace puflab
