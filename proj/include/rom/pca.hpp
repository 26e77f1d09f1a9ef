#pragma once

#include <Eigen/Core>

#include "rom/io.hpp"

namespace rom {

/// Linear reduction onto the top-C principal directions of a signal matrix.
struct PcaModel {
  Eigen::VectorXd mean;        // length N
  Eigen::MatrixXd components;  // C x N, orthonormal rows
  Eigen::VectorXd singular_values;  // all singular values of the centered fit matrix

  std::size_t retained() const noexcept { return static_cast<std::size_t>(components.rows()); }
};

/// Rows of `signals` are samples. Components are the top-C right singular
/// vectors of the centered matrix, largest-magnitude entry made positive.
/// Throws DataError when the centered matrix has rank below C.
PcaModel fit_pca(const Eigen::MatrixXd& signals, std::size_t retained);

Eigen::VectorXd project(const PcaModel& model, const Eigen::VectorXd& signal);
Eigen::VectorXd pca_reconstruct(const PcaModel& model, const Eigen::VectorXd& scores);

json to_json(const PcaModel& model);
PcaModel pca_from_json(const json& j);

}  // namespace rom
