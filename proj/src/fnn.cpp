#include "rom/fnn.hpp"

#include <cmath>
#include <numeric>

#include "rom/errors.hpp"
#include "rom/random.hpp"

namespace rom {
namespace {

void check_input(const FnnModel& model, const Eigen::MatrixXd& x) {
  if (model.weights.empty()) throw DataError("FNN: model has no layers");
  if (static_cast<std::size_t>(x.cols()) != model.input_dim()) {
    throw DataError("FNN: expected " + std::to_string(model.input_dim()) + " inputs, got " +
                    std::to_string(x.cols()));
  }
}

/// Pre-activations of every layer.
std::vector<Eigen::MatrixXd> forward_all(const FnnModel& model, const Eigen::MatrixXd& x) {
  std::vector<Eigen::MatrixXd> z(model.weights.size());
  Eigen::MatrixXd a = x;
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    z[l] = a * model.weights[l];
    z[l].rowwise() += model.biases[l].transpose();
    if (l + 1 < model.weights.size()) a = z[l].cwiseMax(0.0);
  }
  return z;
}

}  // namespace

void FnnArchitecture::validate() const {
  if (input_dim == 0 || output_dim == 0) throw ConfigError("FNN: input and output widths must be positive");
  if (hidden.empty()) throw ConfigError("FNN: at least one hidden layer is required");
  for (auto w : hidden) {
    if (w == 0) throw ConfigError("FNN: hidden widths must be positive");
  }
}

std::vector<std::size_t> FnnArchitecture::widths() const {
  std::vector<std::size_t> w{input_dim};
  w.insert(w.end(), hidden.begin(), hidden.end());
  w.push_back(output_dim);
  return w;
}

std::size_t FnnModel::input_dim() const {
  return weights.empty() ? 0 : static_cast<std::size_t>(weights.front().rows());
}

std::size_t FnnModel::output_dim() const {
  return weights.empty() ? 0 : static_cast<std::size_t>(weights.back().cols());
}

FnnModel FnnModel::zeros(const FnnArchitecture& arch) {
  arch.validate();
  const auto w = arch.widths();
  FnnModel model;
  for (std::size_t l = 0; l + 1 < w.size(); ++l) {
    model.weights.push_back(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(w[l]), static_cast<Eigen::Index>(w[l + 1])));
    model.biases.push_back(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(w[l + 1])));
  }
  model.output_mean = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(arch.output_dim));
  model.output_std = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(arch.output_dim));
  return model;
}

Eigen::MatrixXd fnn_forward(const FnnModel& model, const Eigen::MatrixXd& x) {
  check_input(model, x);
  return forward_all(model, x).back();
}

Eigen::VectorXd fnn_forward(const FnnModel& model, const Eigen::VectorXd& x) {
  const Eigen::MatrixXd row = x.transpose();
  return fnn_forward(model, row).row(0).transpose();
}

Eigen::MatrixXd fnn_predict(const FnnModel& model, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd out = fnn_forward(model, x);
  out = out.array().rowwise() * model.output_std.transpose().array();
  out.rowwise() += model.output_mean.transpose();
  return out;
}

double fnn_loss(const FnnModel& model, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  if (x.rows() == 0) throw DataError("FNN: empty batch");
  if (y.rows() != x.rows() || static_cast<std::size_t>(y.cols()) != model.output_dim()) {
    throw DataError("FNN: target shape does not match the batch");
  }
  return (fnn_forward(model, x) - y).squaredNorm() / static_cast<double>(x.rows());
}

FnnGradients fnn_backward(const FnnModel& model, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  check_input(model, x);
  if (x.rows() == 0) throw DataError("FNN: empty batch");
  if (y.rows() != x.rows() || static_cast<std::size_t>(y.cols()) != model.output_dim()) {
    throw DataError("FNN: target shape does not match the batch");
  }
  const std::size_t layers = model.weights.size();
  const auto z = forward_all(model, x);
  FnnGradients g;
  g.weights.resize(layers);
  g.biases.resize(layers);
  Eigen::MatrixXd delta = 2.0 * (z.back() - y) / static_cast<double>(x.rows());
  for (std::size_t l = layers; l-- > 0;) {
    const Eigen::MatrixXd input = l == 0 ? x : Eigen::MatrixXd(z[l - 1].cwiseMax(0.0));
    g.weights[l] = input.transpose() * delta;
    g.biases[l] = delta.colwise().sum().transpose();
    if (l > 0) {
      delta = (delta * model.weights[l].transpose()).array() * (z[l - 1].array() > 0.0).cast<double>();
    }
  }
  return g;
}

void FnnTrainingConfig::validate() const {
  if (epochs < 1) throw ConfigError("FNN: epochs must be at least 1");
  if (batch_size < 1) throw ConfigError("FNN: batch size must be at least 1");
  if (!(learning_rate > 0.0)) throw ConfigError("FNN: learning rate must be positive");
  if (!(decay_factor > 0.0)) throw ConfigError("FNN: decay factor must be positive");
}

FnnTrainingResult fnn_train(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                            const FnnArchitecture& arch, const FnnTrainingConfig& config) {
  config.validate();
  arch.validate();
  if (x.rows() < 1) throw DataError("FNN: at least one training sample is required");
  if (y.rows() != x.rows()) throw DataError("FNN: inputs and targets row counts differ");
  if (static_cast<std::size_t>(x.cols()) != arch.input_dim ||
      static_cast<std::size_t>(y.cols()) != arch.output_dim) {
    throw DataError("FNN: data shape does not match the architecture");
  }
  const Eigen::Index m = x.rows();

  FnnTrainingResult result;
  FnnModel& model = result.model;
  model = FnnModel::zeros(arch);
  model.output_mean = y.colwise().mean().transpose();
  for (Eigen::Index d = 0; d < y.cols(); ++d) {
    const double var = m > 1 ? (y.col(d).array() - model.output_mean[d]).square().sum() / static_cast<double>(m - 1) : 0.0;
    model.output_std[d] = var > 0.0 ? std::sqrt(var) : 1.0;
  }
  Eigen::MatrixXd ys = y.rowwise() - model.output_mean.transpose();
  ys = ys.array().rowwise() / model.output_std.transpose().array();

  Rng rng(config.seed);
  for (auto& w : model.weights) {
    const double limit = std::sqrt(6.0 / static_cast<double>(w.rows()));
    for (Eigen::Index c = 0; c < w.cols(); ++c) {
      for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = rng.uniform(-limit, limit);
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const auto batch = static_cast<Eigen::Index>(config.batch_size);
  double lr = config.learning_rate;
  Eigen::MatrixXd xb, yb;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    if (epoch > 0 && config.decay_every > 0 && epoch % config.decay_every == 0) lr *= config.decay_factor;
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    double loss_sum = 0.0;
    for (Eigen::Index start = 0; start < m; start += batch) {
      const Eigen::Index count = std::min(batch, m - start);
      xb.resize(count, x.cols());
      yb.resize(count, ys.cols());
      for (Eigen::Index r = 0; r < count; ++r) {
        xb.row(r) = x.row(order[static_cast<std::size_t>(start + r)]);
        yb.row(r) = ys.row(order[static_cast<std::size_t>(start + r)]);
      }
      loss_sum += fnn_loss(model, xb, yb) * static_cast<double>(count);
      const FnnGradients g = fnn_backward(model, xb, yb);
      for (std::size_t l = 0; l < model.weights.size(); ++l) {
        model.weights[l] -= lr * g.weights[l];
        model.biases[l] -= lr * g.biases[l];
      }
    }
    const double epoch_loss = loss_sum / static_cast<double>(m);
    if (!std::isfinite(epoch_loss)) {
      throw NumericalError("FNN: training diverged at epoch " + std::to_string(epoch + 1) +
                           " with learning rate " + format_double(lr));
    }
    result.loss_history.push_back(epoch_loss);
  }
  return result;
}

json to_json(const FnnModel& model) {
  json arch = json::array({model.input_dim()});
  json weights = json::array();
  json biases = json::array();
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    arch.push_back(model.weights[l].cols());
    weights.push_back(to_json(model.weights[l]));
    biases.push_back(to_json(model.biases[l]));
  }
  return json{{"arch", arch},
              {"weights", weights},
              {"biases", biases},
              {"standardize", {{"mean", to_json(model.output_mean)}, {"std", to_json(model.output_std)}}}};
}

FnnModel fnn_from_json(const json& j) {
  try {
    const auto arch = j.at("arch").get<std::vector<std::size_t>>();
    FnnModel model;
    for (const auto& w : j.at("weights")) model.weights.push_back(matrix_from_json(w));
    for (const auto& b : j.at("biases")) model.biases.push_back(vector_from_json(b));
    model.output_mean = vector_from_json(j.at("standardize").at("mean"));
    model.output_std = vector_from_json(j.at("standardize").at("std"));
    if (arch.size() != model.weights.size() + 1 || model.biases.size() != model.weights.size()) {
      throw DataError("FNN JSON: layer counts are inconsistent");
    }
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
      if (static_cast<std::size_t>(model.weights[l].rows()) != arch[l] ||
          static_cast<std::size_t>(model.weights[l].cols()) != arch[l + 1] ||
          static_cast<std::size_t>(model.biases[l].size()) != arch[l + 1]) {
        throw DataError("FNN JSON: layer " + std::to_string(l) + " shape does not match arch");
      }
    }
    if (static_cast<std::size_t>(model.output_mean.size()) != arch.back() ||
        model.output_std.size() != model.output_mean.size()) {
      throw DataError("FNN JSON: standardization length does not match the output width");
    }
    return model;
  } catch (const json::exception& e) {
    throw DataError(std::string("invalid FNN JSON: ") + e.what());
  }
}

}  // namespace rom
