#pragma once

#include <cstddef>

#include <Eigen/Core>

namespace rom {

/// Torque over exactly one period, sampled at beta_n = n * period / N.
struct TorqueSignal {
  Eigen::VectorXd values;
  double period_degrees = 30.0;

  std::size_t size() const noexcept { return static_cast<std::size_t>(values.size()); }
  double angle_degrees(std::size_t n) const noexcept {
    return period_degrees * static_cast<double>(n) / static_cast<double>(values.size());
  }
};

}  // namespace rom
