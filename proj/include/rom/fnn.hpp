#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "rom/io.hpp"

namespace rom {

struct FnnArchitecture {
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden{45, 60, 80, 25};
  std::size_t output_dim = 0;

  /// Throws ConfigError unless there is at least one hidden layer and every width is positive.
  void validate() const;
  /// input, hidden..., output
  std::vector<std::size_t> widths() const;
};

/// Dense layers acting on row vectors: z = a W + b. ReLU on hidden layers,
/// identity on the output layer.
struct FnnModel {
  std::vector<Eigen::MatrixXd> weights;  // layer l: width(l) x width(l+1)
  std::vector<Eigen::VectorXd> biases;
  /// Output scaling: prediction = mean + std * network output.
  Eigen::VectorXd output_mean;
  Eigen::VectorXd output_std;

  std::size_t input_dim() const;
  std::size_t output_dim() const;
  /// Zero weights, zero biases and identity output scaling.
  static FnnModel zeros(const FnnArchitecture& arch);
};

struct FnnGradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
};

/// Network output for each row of `x` (no output scaling).
Eigen::MatrixXd fnn_forward(const FnnModel& model, const Eigen::MatrixXd& x);
Eigen::VectorXd fnn_forward(const FnnModel& model, const Eigen::VectorXd& x);

/// fnn_forward followed by the output scaling.
Eigen::MatrixXd fnn_predict(const FnnModel& model, const Eigen::MatrixXd& x);

/// (1/M_b) sum_m ||y_m - f(x_m)||^2 on the network output.
double fnn_loss(const FnnModel& model, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y);

/// Exact gradient of fnn_loss by reverse-mode accumulation. The ReLU
/// derivative at 0 is taken as 0.
FnnGradients fnn_backward(const FnnModel& model, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y);

struct FnnTrainingConfig {
  std::size_t epochs = 600;
  std::size_t batch_size = 32;
  double learning_rate = 0.01;
  double decay_factor = 0.5;
  std::size_t decay_every = 150;  // epochs
  std::uint64_t seed = 1;

  void validate() const;
};

struct FnnTrainingResult {
  FnnModel model;
  std::vector<double> loss_history;  // epoch-mean training loss on standardized targets
};

/// Mini-batch SGD from a seeded He-uniform initialization. `x` should already
/// be normalized; targets are standardized per column internally. Throws
/// NumericalError when the loss becomes non-finite.
FnnTrainingResult fnn_train(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                            const FnnArchitecture& arch, const FnnTrainingConfig& config = {});

json to_json(const FnnModel& model);
FnnModel fnn_from_json(const json& j);

}  // namespace rom
