#include "rom/cmaes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "rom/errors.hpp"
#include "rom/random.hpp"

namespace rom {
namespace {

double reflect(double x, double lo, double hi) {
  const double width = hi - lo;
  double t = std::fmod(x - lo, 2.0 * width);
  if (t < 0.0) t += 2.0 * width;
  return t <= width ? lo + t : hi - (t - width);
}

double safe_eval(const Objective& f, const Eigen::VectorXd& x) {
  const double v = f(x);
  return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

}  // namespace

CmaesResult cmaes_minimize(const Objective& objective, const Eigen::VectorXd& init,
                           const CmaesOptions& options) {
  const auto n = static_cast<std::size_t>(init.size());
  if (n == 0) throw ConfigError("CMA-ES: dimension must be positive");
  const bool bounded = !options.lower.empty() || !options.upper.empty();
  if (bounded) {
    if (options.lower.size() != n || options.upper.size() != n) {
      throw ConfigError("CMA-ES: bounds must match the dimension");
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (!(options.lower[i] < options.upper[i])) throw ConfigError("CMA-ES: empty bound interval");
      if (init[static_cast<Eigen::Index>(i)] < options.lower[i] ||
          init[static_cast<Eigen::Index>(i)] > options.upper[i]) {
        throw ValidationError("CMA-ES: initial point outside the bounds");
      }
    }
  }
  if (!(options.sigma0 > 0.0)) throw ConfigError("CMA-ES: sigma0 must be positive");

  const double dn = static_cast<double>(n);
  const std::size_t lambda = options.population > 0
                                 ? options.population
                                 : 4 + static_cast<std::size_t>(std::floor(3.0 * std::log(dn)));
  if (lambda < 2) throw ConfigError("CMA-ES: population must be at least 2");
  if (options.budget < lambda) throw ConfigError("CMA-ES: budget smaller than the population");
  const std::size_t mu = lambda / 2;

  Eigen::VectorXd weights(static_cast<Eigen::Index>(mu));
  for (std::size_t i = 0; i < mu; ++i) {
    weights[static_cast<Eigen::Index>(i)] =
        std::log(static_cast<double>(mu) + 0.5) - std::log(static_cast<double>(i + 1));
  }
  weights /= weights.sum();
  const double mueff = 1.0 / weights.squaredNorm();

  const double cc = (4.0 + mueff / dn) / (dn + 4.0 + 2.0 * mueff / dn);
  const double cs = (mueff + 2.0) / (dn + mueff + 5.0);
  const double c1 = 2.0 / ((dn + 1.3) * (dn + 1.3) + mueff);
  const double cmu =
      std::min(1.0 - c1, 2.0 * (mueff - 2.0 + 1.0 / mueff) / ((dn + 2.0) * (dn + 2.0) + mueff));
  const double damps = 1.0 + 2.0 * std::max(0.0, std::sqrt((mueff - 1.0) / (dn + 1.0)) - 1.0) + cs;
  const double chi_n = std::sqrt(dn) * (1.0 - 1.0 / (4.0 * dn) + 1.0 / (21.0 * dn * dn));

  CmaesResult result;
  result.best_x = init;
  result.best_value = safe_eval(objective, init);
  result.evaluations = 1;
  if (!std::isfinite(result.best_value)) {
    throw ValidationError("CMA-ES: objective is not finite at the initial point");
  }

  Rng rng(options.seed);
  Eigen::VectorXd mean = init;
  double sigma = options.sigma0;
  Eigen::VectorXd pc = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  Eigen::VectorXd ps = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  Eigen::MatrixXd basis = cov;
  Eigen::VectorXd scale = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n));  // sqrt of eigenvalues

  Eigen::MatrixXd xs(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(lambda));
  Eigen::MatrixXd ys(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(lambda));
  std::vector<double> values(lambda);
  std::vector<std::size_t> order(lambda);

  result.stop_reason = "budget";
  while (result.evaluations + lambda <= options.budget) {
    for (std::size_t k = 0; k < lambda; ++k) {
      Eigen::VectorXd z(static_cast<Eigen::Index>(n));
      for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
      Eigen::VectorXd x = mean + sigma * (basis * scale.cwiseProduct(z));
      if (bounded) {
        for (std::size_t i = 0; i < n; ++i) {
          const auto ii = static_cast<Eigen::Index>(i);
          x[ii] = reflect(x[ii], options.lower[i], options.upper[i]);
        }
      }
      const auto kk = static_cast<Eigen::Index>(k);
      xs.col(kk) = x;
      ys.col(kk) = (x - mean) / sigma;
      values[k] = safe_eval(objective, x);
      ++result.evaluations;
      if (values[k] < result.best_value) {
        result.best_value = values[k];
        result.best_x = x;
      }
    }
    ++result.generations;
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

    Eigen::VectorXd step = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < mu; ++i) {
      step += weights[static_cast<Eigen::Index>(i)] * ys.col(static_cast<Eigen::Index>(order[i]));
    }
    mean += sigma * step;

    const Eigen::VectorXd inv_sqrt_step = basis * (basis.transpose() * step).cwiseQuotient(scale);
    ps = (1.0 - cs) * ps + std::sqrt(cs * (2.0 - cs) * mueff) * inv_sqrt_step;
    const double ps_norm = ps.norm();
    const double decay = 1.0 - std::pow(1.0 - cs, 2.0 * static_cast<double>(result.generations));
    const bool hsig = ps_norm / std::sqrt(decay) / chi_n < 1.4 + 2.0 / (dn + 1.0);
    pc = (1.0 - cc) * pc + (hsig ? std::sqrt(cc * (2.0 - cc) * mueff) : 0.0) * step;

    Eigen::MatrixXd rank_mu = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < mu; ++i) {
      const auto y = ys.col(static_cast<Eigen::Index>(order[i]));
      rank_mu += weights[static_cast<Eigen::Index>(i)] * y * y.transpose();
    }
    cov = (1.0 - c1 - cmu) * cov +
          c1 * (pc * pc.transpose() + (hsig ? 0.0 : cc * (2.0 - cc)) * cov) + cmu * rank_mu;
    cov = 0.5 * (cov + cov.transpose());
    sigma *= std::exp(cs / damps * (ps_norm / chi_n - 1.0));

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    Eigen::VectorXd evals = eig.eigenvalues().cwiseMax(0.0);
    const double max_eval = evals.maxCoeff();
    const double min_eval = evals.minCoeff();
    if (!(min_eval > 0.0) || max_eval / min_eval > options.max_condition) {
      result.stop_reason = "condition";
      break;
    }
    basis = eig.eigenvectors();
    scale = evals.cwiseSqrt();
    if (sigma * scale.maxCoeff() < options.tol_x) {
      result.stop_reason = "tol_x";
      break;
    }
    if (!std::isfinite(sigma)) {
      result.stop_reason = "sigma";
      break;
    }
  }
  return result;
}

}  // namespace rom
