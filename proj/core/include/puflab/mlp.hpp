#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "puflab/crp_dataset.hpp"

namespace puflab {

// Feedforward network shape: input_width inputs, tanh hidden layers of the
// given sizes, one sigmoid output unit. hidden_sizes may be empty only for
// the degenerate single-unit configuration used to probe linear
// separability. With use_phi_input, raw challenge bits pass through the
// parity transform before the first dense layer.
struct MlpArchitecture {
  int input_width = 0;
  std::vector<int> hidden_sizes;
  bool use_phi_input = true;

  static MlpArchitecture table1(int input_width) {
    return {input_width, {32, 64, 32}, true};
  }
  static MlpArchitecture table4(int input_width) {
    return {input_width, {64, 32, 32, 64}, true};
  }
  static MlpArchitecture single_unit(int input_width) {
    return {input_width, {}, true};
  }

  bool operator==(const MlpArchitecture&) const = default;
};

void validate_architecture(const MlpArchitecture& arch);

// weights[l] has shape (layer l output size, layer l input size); biases[l]
// matches the output size. Layer count is hidden_sizes.size() + 1.
struct MlpModel {
  MlpArchitecture arch;
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
};

// Symmetric uniform init with half-range sqrt(6 / (fan_in + fan_out)),
// biases zero. Weights are drawn row-major per layer, deterministically
// from the seed.
MlpModel init_model(const MlpArchitecture& arch, std::uint64_t seed);

// Batch matrices hold one sample per column. phi_input_layer maps a 0/1
// matrix to columnwise parity features (suffix products over each column).
// Rejects entries outside {0,1}.
Eigen::MatrixXd phi_input_layer(const Eigen::MatrixXd& bits);

// Dense (width x count) feature matrix for a CRP set: parity features when
// use_phi, raw 0/1 bits otherwise.
Eigen::MatrixXd feature_matrix(const CrpSet& set, bool use_phi);
Eigen::VectorXd label_vector(const CrpSet& set);

// Output probabilities, one per input column, each in (0,1).
Eigen::VectorXd forward(const MlpModel& model, const Eigen::MatrixXd& features);

// Mean of -[y log p + (1-y) log(1-p)] with p clamped to [1e-7, 1 - 1e-7].
double bce_loss(const Eigen::VectorXd& probabilities,
                const Eigen::VectorXd& labels);

struct Gradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
};

// Exact gradients of mean BCE over the batch w.r.t. every parameter.
Gradients backward(const MlpModel& model, const Eigen::MatrixXd& features,
                   const Eigen::VectorXd& labels);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  std::vector<Eigen::MatrixXd> m_weights;
  std::vector<Eigen::MatrixXd> v_weights;
  std::vector<Eigen::VectorXd> m_biases;
  std::vector<Eigen::VectorXd> v_biases;
  long step = 0;
};

AdamState init_adam(const MlpModel& model);

// One adaptive-moment update with bias correction.
void optimizer_step(AdamState& state, MlpModel& model, const Gradients& grads,
                    const AdamConfig& config);

struct TrainConfig {
  int max_epochs = 300;
  int patience = 5;
  int batch_size = 1000;
  AdamConfig adam;
  std::uint64_t seed = 0;
};

// test_accuracy and converged are filled by the harness after an evaluate()
// call on held-out data; train() itself reports the epochs and the best
// validation accuracy seen.
struct TrainReport {
  int epochs_run = 0;
  double best_validation_accuracy = 0.0;
  double test_accuracy = 0.0;
  bool converged = false;
  double wall_time_sec = 0.0;
};

// Minibatch training with a seeded shuffle per epoch. Stops after `patience`
// consecutive epochs without a strict validation-accuracy improvement, or at
// max_epochs, and restores the parameters of the best validation epoch.
TrainReport train(MlpModel& model, const CrpSet& train_set,
                  const CrpSet& val_set, const TrainConfig& config);

// Fraction of thresholded predictions (p >= 0.5 reads as 1) matching labels.
double evaluate(const MlpModel& model, const CrpSet& test_set);

// Text checkpoint: architecture header plus row-major matrices at 17
// significant digits; read(write(m)) is exact.
void write_model(const MlpModel& model, const std::filesystem::path& path);
MlpModel read_model(const std::filesystem::path& path);

}  // namespace puflab
