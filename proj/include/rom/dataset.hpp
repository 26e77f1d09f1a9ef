#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "rom/param_space.hpp"
#include "rom/synthetic_model.hpp"

namespace rom {

/// Design points and their torque signals, one row per sample.
struct Dataset {
  ParameterSpace space;
  std::vector<DesignPoint> points;
  Eigen::MatrixXd signals;  // M x N
  std::string config_digest;
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return points.size(); }
  std::size_t signal_length() const noexcept { return static_cast<std::size_t>(signals.cols()); }

  /// M x P matrix of normalized inputs.
  Eigen::MatrixXd normalized_inputs() const;
  /// Rows [begin, end).
  Dataset slice(std::size_t begin, std::size_t end) const;
};

/// Samples M uniform design points from `seed` and evaluates the synthetic
/// model on each (in parallel; the result does not depend on thread count).
Dataset batch_generate(const SyntheticModelConfig& config, const ParameterSpace& space,
                       std::size_t m, std::size_t n, std::uint64_t seed);

/// CSV with header p1..pP,tau_0..tau_{N-1}; values with 17 significant digits.
std::string dataset_to_csv(const Dataset& dataset);
void write_dataset(const Dataset& dataset, const std::filesystem::path& path);
/// `space` supplies bounds for validation; its dimension fixes the column split.
Dataset read_dataset(const std::filesystem::path& path, const ParameterSpace& space);

/// Sidecar metadata written next to a dataset CSV.
json dataset_metadata(const Dataset& dataset);

}  // namespace rom
