#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "rom/io.hpp"

namespace rom {

struct GpHyperparams {
  Eigen::VectorXd lengthscales;  // theta, one per input dimension
  double signal_variance = 1.0;
  double jitter = 0.0;  // added to the kernel diagonal
};

/// sv * exp(-1/2 sum_i ((a_i - b_i) / theta_i)^2)
double kernel(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b,
              const GpHyperparams& hp);

/// Cross-covariance matrix, rows of `a` against rows of `b`.
Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                              const GpHyperparams& hp);

/// Affine target scaling: y_model = (y - mean) / std.
struct Standardization {
  double mean = 0.0;
  double std = 1.0;
};

/// Zero-mean GP conditioned on (X, y) for one scalar output.
struct GpModel {
  Eigen::MatrixXd x;         // M x P training inputs
  Eigen::MatrixXd cholesky;  // lower factor of K + jitter I; may be empty (see keep_factor)
  Eigen::VectorXd alpha;     // (K + jitter I)^-1 y_model
  GpHyperparams hp;
  Standardization standardize;
};

struct GpFitOptions {
  /// Retry with jitter 1e-10, 1e-8, 1e-6 when the factorization fails.
  bool jitter_ladder = false;
  bool keep_factor = true;
};

/// Factorizes K + jitter I (a pivot below 1e-14 max K_ii counts as failure)
/// and solves for alpha. y is used as given, with the identity standardization.
/// Throws NumericalError on failure.
GpModel gp_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const GpHyperparams& hp,
               const GpFitOptions& options = {});

double gp_predict_mean_at(const GpModel& model, const Eigen::Ref<const Eigen::VectorXd>& query);
/// Row-wise means for an M* x P query matrix.
Eigen::VectorXd gp_predict_mean(const GpModel& model, const Eigen::MatrixXd& queries);

/// Predictive variance, clamped at 0 (warning when below -1e-9). Requires the
/// Cholesky factor.
double gp_predict_var(const GpModel& model, const Eigen::Ref<const Eigen::VectorXd>& query);

/// -1/2 y^T alpha - sum log L_ii - M/2 log 2 pi. Throws like gp_fit.
double log_marginal_likelihood(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                               const GpHyperparams& hp);

struct GpTrainOptions {
  std::size_t budget = 3000;  // CMA-ES evaluations per output
  double sigma0 = 0.5;        // CMA-ES step size in log space
  double lengthscale_min = 1e-2;
  double lengthscale_max = 1e2;
  double variance_min = 1e-3;
  double variance_max = 1e3;
  double jitter = 1e-10;
  /// Hyperparameters are tuned on the first `subset` rows (0 = all); the final
  /// model is always conditioned on every row.
  std::size_t subset = 0;
  /// CMA-ES seed, shared by every output so that identical columns get identical models.
  std::uint64_t seed = 1;
  bool keep_factors = false;
};

/// Independent GP per column of Y: targets standardized, (theta, sv) tuned by
/// maximizing the log marginal likelihood with CMA-ES in log space, then the
/// model is refit at the optimum. Constant columns skip tuning.
std::vector<GpModel> gp_train(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                              const GpTrainOptions& options = {});

json to_json(const GpModel& model);
GpModel gp_from_json(const json& j, bool keep_factor = true);

/// Several outputs over shared inputs: {"x": ..., "outputs": [{"alpha", "theta",
/// "sv", "jitter", "standardize"}, ...]}. Loading refactors every output to
/// verify the stored state; `keep_factors` decides whether factors are retained.
json gp_models_to_json(const std::vector<GpModel>& models);
std::vector<GpModel> gp_models_from_json(const json& j, bool keep_factors = false);

}  // namespace rom
