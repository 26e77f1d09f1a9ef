#include "rom/pca.hpp"

#include <algorithm>
#include <limits>

#include <Eigen/SVD>

#include "rom/errors.hpp"

namespace rom {

PcaModel fit_pca(const Eigen::MatrixXd& signals, std::size_t retained) {
  const auto m = static_cast<std::size_t>(signals.rows());
  const auto n = static_cast<std::size_t>(signals.cols());
  if (m < 2) throw ConfigError("PCA needs at least 2 samples");
  if (retained < 1 || retained > std::min(m, n)) {
    throw ConfigError("PCA component count C = " + std::to_string(retained) + " must lie in [1, " +
                      std::to_string(std::min(m, n)) + "]");
  }
  PcaModel model;
  model.mean = signals.colwise().mean().transpose();
  const Eigen::MatrixXd centered = signals.rowwise() - model.mean.transpose();

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
  model.singular_values = svd.singularValues();
  const double s_max = model.singular_values.size() > 0 ? model.singular_values[0] : 0.0;
  const double tolerance =
      static_cast<double>(std::max(m, n)) * std::numeric_limits<double>::epsilon() * s_max;
  std::size_t rank = 0;
  for (Eigen::Index i = 0; i < model.singular_values.size(); ++i) {
    if (model.singular_values[i] > tolerance) ++rank;
  }
  if (rank < retained) {
    throw DataError("PCA: centered data has rank " + std::to_string(rank) + " < C = " +
                    std::to_string(retained));
  }
  model.components = svd.matrixV().leftCols(static_cast<Eigen::Index>(retained)).transpose();
  for (Eigen::Index r = 0; r < model.components.rows(); ++r) {
    Eigen::Index pivot = 0;
    model.components.row(r).cwiseAbs().maxCoeff(&pivot);
    if (model.components(r, pivot) < 0.0) model.components.row(r) *= -1.0;
  }
  return model;
}

Eigen::VectorXd project(const PcaModel& model, const Eigen::VectorXd& signal) {
  if (signal.size() != model.mean.size()) {
    throw DataError("PCA project: signal length " + std::to_string(signal.size()) +
                    " does not match model length " + std::to_string(model.mean.size()));
  }
  return model.components * (signal - model.mean);
}

Eigen::VectorXd pca_reconstruct(const PcaModel& model, const Eigen::VectorXd& scores) {
  if (static_cast<std::size_t>(scores.size()) != model.retained()) {
    throw DataError("PCA reconstruct: expected " + std::to_string(model.retained()) +
                    " scores, got " + std::to_string(scores.size()));
  }
  return model.mean + model.components.transpose() * scores;
}

json to_json(const PcaModel& model) {
  return json{{"mean", to_json(model.mean)},
              {"components", to_json(model.components)},
              {"c", model.retained()},
              {"singular_values", to_json(model.singular_values)}};
}

PcaModel pca_from_json(const json& j) {
  try {
    PcaModel model;
    model.mean = vector_from_json(j.at("mean"));
    model.components = matrix_from_json(j.at("components"));
    if (j.contains("singular_values")) model.singular_values = vector_from_json(j.at("singular_values"));
    if (model.retained() != j.at("c").get<std::size_t>() ||
        model.components.cols() != model.mean.size()) {
      throw DataError("PCA JSON: inconsistent shapes");
    }
    return model;
  } catch (const json::exception& e) {
    throw DataError(std::string("invalid PCA JSON: ") + e.what());
  }
}

}  // namespace rom
