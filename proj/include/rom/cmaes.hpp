#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace rom {

struct CmaesOptions {
  double sigma0 = 0.3;
  /// Box constraints; empty means unbounded. Handled by coordinate-wise reflection.
  std::vector<double> lower;
  std::vector<double> upper;
  std::size_t budget = 3000;  // objective evaluations
  std::uint64_t seed = 1;
  std::size_t population = 0;  // 0 selects 4 + floor(3 ln d)
  double tol_x = 1e-12;
  double max_condition = 1e14;
};

struct CmaesResult {
  Eigen::VectorXd best_x;
  double best_value = 0.0;
  std::size_t evaluations = 0;
  std::size_t generations = 0;
  std::string stop_reason;
};

using Objective = std::function<double(const Eigen::VectorXd&)>;

/// (mu/mu_w, lambda)-CMA-ES with cumulative step-size adaptation and
/// rank-one plus rank-mu covariance updates. Non-finite objective values rank
/// last. Deterministic given options.seed. Throws ValidationError if the
/// objective is not finite at `init`.
CmaesResult cmaes_minimize(const Objective& objective, const Eigen::VectorXd& init,
                           const CmaesOptions& options = {});

}  // namespace rom
