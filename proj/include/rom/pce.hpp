#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include <Eigen/Core>

#include "rom/io.hpp"

namespace rom {

/// Per-dimension polynomial degrees of one multivariate basis function.
struct MultiIndex {
  std::vector<int> degrees;

  int total_degree() const noexcept;
  /// (sum_i degrees_i^q)^(1/q), q in (0, 1].
  double quasi_norm(double q) const;

  bool operator==(const MultiIndex&) const = default;
};

/// Orthonormal Legendre polynomial sqrt(2d+1) P_d(x) (unit second moment
/// under the uniform measure on [-1, 1]). Throws ValidationError if |x| > 1 + 1e-12.
double legendre_eval(int degree, double x);

/// All multi-indices of dimension `dim` with q-quasi-norm <= max_degree,
/// sorted by total degree, then lexicographically descending. Throws
/// ConfigError when more than `cap` terms would be produced.
std::vector<MultiIndex> build_basis(std::size_t dim, int max_degree, double q,
                                    std::size_t cap = 20000);

/// Entry (m, k) = prod_i psi_{alpha_k,i}(x_{m,i}). Rows of `points` must lie in [-1, 1]^P.
Eigen::MatrixXd evaluate_basis_matrix(const Eigen::MatrixXd& points,
                                      const std::vector<MultiIndex>& basis);

struct LeastSquaresFit {
  Eigen::MatrixXd coefficients;  // K x D
  Eigen::VectorXd loo_error;     // per output, relative to the output variance
  double condition_number = 0.0;
};

/// Ordinary least squares through a Householder QR of the design matrix.
/// Throws NumericalError when cond(design) > 1e12.
LeastSquaresFit fit_least_squares(const Eigen::MatrixXd& design, const Eigen::MatrixXd& targets);

struct PceModel {
  std::size_t input_dim = 0;
  std::vector<MultiIndex> basis;
  Eigen::MatrixXd coefficients;  // |basis| x D
  json meta = json::object();

  std::size_t output_dim() const noexcept { return static_cast<std::size_t>(coefficients.cols()); }
};

struct LarOptions {
  int min_degree = 1;
  int max_degree = 5;
  double q = 0.75;
  /// Adaptive search stops as soon as the corrected LOO error reaches this value.
  double target_loo = 1e-10;
  std::size_t basis_cap = 20000;
  /// Upper bound on LAR steps per output; 0 means min(K - 1, M - 2).
  std::size_t max_active = 0;
  /// Stop a LAR path once this many consecutive steps fail to improve the
  /// corrected LOO error (0 disables); at least 10% of the steps taken so far.
  std::size_t patience = 20;
};

/// Sparse adaptive PCE: for each candidate degree, least-angle regression on
/// the standardized basis gives a nested sequence of active sets; each is
/// refit by OLS and scored with the corrected leave-one-out error. Outputs are
/// fitted independently over the shared candidate bases; the returned model
/// holds the union of the selected terms.
PceModel fit_lar_adaptive(const Eigen::MatrixXd& points, const Eigen::MatrixXd& targets,
                          const LarOptions& options = {});

/// Full-basis OLS fit at one degree and q.
PceModel fit_pce_ols(const Eigen::MatrixXd& points, const Eigen::MatrixXd& targets, int degree,
                     double q = 1.0);

Eigen::VectorXd pce_predict(const PceModel& model, const Eigen::VectorXd& x);
/// Row-wise prediction, M x D.
Eigen::MatrixXd pce_predict(const PceModel& model, const Eigen::MatrixXd& points);

json to_json(const PceModel& model);
PceModel pce_from_json(const json& j);

/// Result of one LAR path (exposed for tests): active sets are the prefixes of
/// `path`, scores[s] belongs to the first s terms (scores[0] = intercept only).
struct LarPath {
  std::vector<std::size_t> path;  // basis column indices, excluding the constant
  std::vector<double> corrected_loo;
  std::size_t best_size = 0;
};

/// `design` includes the constant column at index `constant_column`.
LarPath lar_path(const Eigen::MatrixXd& design, std::size_t constant_column,
                 const Eigen::VectorXd& target, const LarOptions& options = {});

}  // namespace rom
