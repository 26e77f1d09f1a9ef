#include "rom/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Cholesky>

#include "rom/cmaes.hpp"
#include "rom/errors.hpp"
#include "rom/log.hpp"
#include "rom/parallel.hpp"

namespace rom {
namespace {

constexpr double kPivotTolerance = 1e-14;
constexpr double kJitterLadder[] = {1e-10, 1e-8, 1e-6};

void check_hyperparams(const GpHyperparams& hp, Eigen::Index dim) {
  if (hp.lengthscales.size() != dim) {
    throw ConfigError("GP: expected " + std::to_string(dim) + " lengthscales, got " +
                      std::to_string(hp.lengthscales.size()));
  }
  if (!(hp.lengthscales.array() > 0.0).all()) throw ConfigError("GP: lengthscales must be positive");
  if (!(hp.signal_variance > 0.0)) throw ConfigError("GP: signal variance must be positive");
  if (!(hp.jitter >= 0.0)) throw ConfigError("GP: jitter must be nonnegative");
}

/// Lower Cholesky factor of K + jitter I, or false when a pivot is too small.
bool factorize(const Eigen::MatrixXd& k, double jitter, Eigen::MatrixXd& factor) {
  Eigen::MatrixXd a = k;
  a.diagonal().array() += jitter;
  const double max_diag = a.diagonal().maxCoeff();
  Eigen::LLT<Eigen::MatrixXd, Eigen::Lower> llt(a);
  if (llt.info() != Eigen::Success) return false;
  factor = llt.matrixL();
  const double min_pivot = factor.diagonal().cwiseAbs2().minCoeff();
  return std::isfinite(min_pivot) && min_pivot > kPivotTolerance * max_diag;
}

Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                  const Eigen::VectorXd& lengthscales) {
  const Eigen::RowVectorXd inv = lengthscales.cwiseInverse().transpose();
  const Eigen::MatrixXd sa = a.array().rowwise() * inv.array();
  const Eigen::MatrixXd sb = b.array().rowwise() * inv.array();
  Eigen::MatrixXd d = -2.0 * sa * sb.transpose();
  d.colwise() += sa.rowwise().squaredNorm();
  d.rowwise() += sb.rowwise().squaredNorm().transpose();
  return d.cwiseMax(0.0);
}

Eigen::MatrixXd symmetric_kernel(const Eigen::MatrixXd& x, const GpHyperparams& hp) {
  Eigen::MatrixXd k = (-0.5 * squared_distances(x, x, hp.lengthscales).array()).exp() * hp.signal_variance;
  k.diagonal().setConstant(hp.signal_variance);
  return 0.5 * (k + k.transpose());
}

double lml_or_inf(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const GpHyperparams& hp) {
  Eigen::MatrixXd factor;
  if (!factorize(symmetric_kernel(x, hp), hp.jitter, factor)) {
    return -std::numeric_limits<double>::infinity();
  }
  const Eigen::VectorXd v = factor.triangularView<Eigen::Lower>().solve(y);
  return -0.5 * v.squaredNorm() - factor.diagonal().array().log().sum() -
         0.5 * static_cast<double>(y.size()) * std::log(2.0 * std::numbers::pi);
}

GpHyperparams unpack(const Eigen::VectorXd& z, double jitter) {
  const Eigen::Index p = z.size() - 1;
  return GpHyperparams{z.head(p).array().exp().matrix(), std::exp(z[p]), jitter};
}

GpModel train_one(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const GpTrainOptions& options,
                  std::uint64_t seed) {
  const Eigen::Index m = x.rows();
  const Eigen::Index p = x.cols();
  Standardization st;
  st.mean = y.mean();
  const double var = m > 1 ? (y.array() - st.mean).square().sum() / static_cast<double>(m - 1) : 0.0;
  st.std = std::sqrt(var);
  const bool constant = !(st.std > 1e-12 * std::max(1.0, std::abs(st.mean)));
  if (constant) st.std = 1.0;
  const Eigen::VectorXd ys = (y.array() - st.mean) / st.std;

  GpHyperparams hp{Eigen::VectorXd::Ones(p), 1.0, options.jitter};
  if (!constant) {
    const Eigen::Index rows =
        options.subset > 0 ? std::min<Eigen::Index>(m, static_cast<Eigen::Index>(options.subset)) : m;
    const Eigen::MatrixXd xt = x.topRows(rows);
    const Eigen::VectorXd yt = ys.head(rows);

    // Warm start: isotropic lengthscale grid with the signal variance profiled.
    const double lo = std::log(options.lengthscale_min);
    const double hi = std::log(options.lengthscale_max);
    const double vlo = std::log(options.variance_min);
    const double vhi = std::log(options.variance_max);
    Eigen::VectorXd init;
    double best = -std::numeric_limits<double>::infinity();
    for (double ell : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0}) {
      const double log_ell = std::clamp(std::log(ell), lo, hi);
      GpHyperparams trial{Eigen::VectorXd::Constant(p, std::exp(log_ell)), 1.0, options.jitter};
      Eigen::MatrixXd factor;
      if (!factorize(symmetric_kernel(xt, trial), trial.jitter, factor)) continue;
      const Eigen::VectorXd v = factor.triangularView<Eigen::Lower>().solve(yt);
      const double log_sv = std::clamp(std::log(v.squaredNorm() / static_cast<double>(rows)), vlo, vhi);
      trial.signal_variance = std::exp(log_sv);
      const double value = lml_or_inf(xt, yt, trial);
      if (value > best) {
        best = value;
        init = Eigen::VectorXd::Constant(p + 1, log_ell);
        init[p] = log_sv;
      }
    }
    if (!std::isfinite(best)) {
      throw NumericalError("GP: log marginal likelihood is not finite for any starting hyperparameters");
    }
    CmaesOptions cma;
    cma.sigma0 = options.sigma0;
    cma.budget = options.budget;
    cma.seed = seed;
    cma.lower.assign(static_cast<std::size_t>(p), lo);
    cma.upper.assign(static_cast<std::size_t>(p), hi);
    cma.lower.push_back(vlo);
    cma.upper.push_back(vhi);
    const double jitter = options.jitter;
    const CmaesResult result = cmaes_minimize(
        [&](const Eigen::VectorXd& z) { return -lml_or_inf(xt, yt, unpack(z, jitter)); }, init, cma);
    hp = unpack(result.best_x, jitter);
  }
  GpModel model = gp_fit(x, ys, hp, GpFitOptions{true, options.keep_factors});
  model.standardize = st;
  return model;
}

}  // namespace

double kernel(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b,
              const GpHyperparams& hp) {
  const double s = ((a - b).array() / hp.lengthscales.array()).square().sum();
  return hp.signal_variance * std::exp(-0.5 * s);
}

Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                              const GpHyperparams& hp) {
  check_hyperparams(hp, a.cols());
  if (b.cols() != a.cols()) throw DataError("GP: input dimensions differ");
  return (-0.5 * squared_distances(a, b, hp.lengthscales).array()).exp() * hp.signal_variance;
}

GpModel gp_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const GpHyperparams& hp,
               const GpFitOptions& options) {
  if (x.rows() < 1) throw DataError("GP: at least one training point is required");
  if (y.size() != x.rows()) throw DataError("GP: inputs and targets row counts differ");
  check_hyperparams(hp, x.cols());
  if (!y.allFinite() || !x.allFinite()) throw DataError("GP: training data must be finite");

  GpModel model;
  model.x = x;
  model.hp = hp;
  const Eigen::MatrixXd k = symmetric_kernel(x, hp);
  Eigen::MatrixXd factor;
  bool ok = factorize(k, hp.jitter, factor);
  if (!ok && options.jitter_ladder) {
    for (double jitter : kJitterLadder) {
      if (jitter <= hp.jitter) continue;
      log_warning("GP: Cholesky failed at jitter " + format_double(model.hp.jitter) +
                  ", retrying with " + format_double(jitter));
      model.hp.jitter = jitter;
      if ((ok = factorize(k, jitter, factor))) break;
    }
  }
  if (!ok) {
    throw NumericalError("GP: Cholesky factorization failed at jitter " +
                         format_double(model.hp.jitter) + "; increase the jitter");
  }
  const Eigen::VectorXd v = factor.triangularView<Eigen::Lower>().solve(y);
  model.alpha = factor.transpose().triangularView<Eigen::Upper>().solve(v);
  if (options.keep_factor) model.cholesky = std::move(factor);
  return model;
}

double gp_predict_mean_at(const GpModel& model, const Eigen::Ref<const Eigen::VectorXd>& query) {
  if (query.size() != model.x.cols()) throw DataError("GP predict: input dimension mismatch");
  double s = 0.0;
  const Eigen::ArrayXd inv = model.hp.lengthscales.array().inverse();
  for (Eigen::Index i = 0; i < model.x.rows(); ++i) {
    const double d = ((model.x.row(i).transpose() - query).array() * inv).square().sum();
    s += model.alpha[i] * std::exp(-0.5 * d);
  }
  return model.standardize.mean + model.standardize.std * model.hp.signal_variance * s;
}

Eigen::VectorXd gp_predict_mean(const GpModel& model, const Eigen::MatrixXd& queries) {
  if (queries.cols() != model.x.cols()) throw DataError("GP predict: input dimension mismatch");
  const Eigen::MatrixXd k = kernel_matrix(queries, model.x, model.hp);
  return (model.standardize.std * (k * model.alpha)).array() + model.standardize.mean;
}

double gp_predict_var(const GpModel& model, const Eigen::Ref<const Eigen::VectorXd>& query) {
  if (query.size() != model.x.cols()) throw DataError("GP predict: input dimension mismatch");
  if (model.cholesky.rows() != model.x.rows()) {
    throw ConfigError("GP: model holds no Cholesky factor; load or fit it with keep_factor");
  }
  Eigen::VectorXd kx(model.x.rows());
  for (Eigen::Index i = 0; i < model.x.rows(); ++i) kx[i] = kernel(model.x.row(i).transpose(), query, model.hp);
  const Eigen::VectorXd v = model.cholesky.triangularView<Eigen::Lower>().solve(kx);
  double var = model.hp.signal_variance - v.squaredNorm();
  if (var < -1e-9) log_warning("GP: predictive variance " + format_double(var) + " clamped to 0");
  var = std::max(var, 0.0);
  return var * model.standardize.std * model.standardize.std;
}

double log_marginal_likelihood(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                               const GpHyperparams& hp) {
  const GpModel model = gp_fit(x, y, hp);
  return -0.5 * y.dot(model.alpha) - model.cholesky.diagonal().array().log().sum() -
         0.5 * static_cast<double>(y.size()) * std::log(2.0 * std::numbers::pi);
}

std::vector<GpModel> gp_train(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                              const GpTrainOptions& options) {
  if (y.cols() < 1) throw ConfigError("GP: at least one output is required");
  if (x.rows() != y.rows()) throw DataError("GP: inputs and targets row counts differ");
  if (x.rows() < 2) throw DataError("GP: at least two training points are required");
  std::vector<GpModel> models(static_cast<std::size_t>(y.cols()));
  parallel_for(models.size(), [&](std::size_t d) {
    try {
      models[d] = train_one(x, y.col(static_cast<Eigen::Index>(d)), options, options.seed);
    } catch (const Error& e) {
      rethrow_with_context(e, "GP output " + std::to_string(d));
    }
  });
  return models;
}

namespace {

json output_json(const GpModel& model) {
  return json{{"alpha", to_json(model.alpha)},
              {"theta", to_json(model.hp.lengthscales)},
              {"sv", model.hp.signal_variance},
              {"jitter", model.hp.jitter},
              {"standardize", {{"mean", model.standardize.mean}, {"std", model.standardize.std}}}};
}

GpModel output_from_json(const Eigen::MatrixXd& x, const json& j, bool keep_factor) {
  GpModel model;
  model.x = x;
  model.alpha = vector_from_json(j.at("alpha"));
  model.hp.lengthscales = vector_from_json(j.at("theta"));
  model.hp.signal_variance = j.at("sv").get<double>();
  model.hp.jitter = j.at("jitter").get<double>();
  model.standardize.mean = j.at("standardize").at("mean").get<double>();
  model.standardize.std = j.at("standardize").at("std").get<double>();
  check_hyperparams(model.hp, x.cols());
  if (model.alpha.size() != x.rows()) throw DataError("GP JSON: alpha length does not match x");
  Eigen::MatrixXd factor;
  if (!factorize(symmetric_kernel(x, model.hp), model.hp.jitter, factor)) {
    throw NumericalError("GP JSON: stored hyperparameters do not give a valid Cholesky factor");
  }
  if (keep_factor) model.cholesky = std::move(factor);
  return model;
}

}  // namespace

json to_json(const GpModel& model) {
  json j = output_json(model);
  j["x"] = to_json(model.x);
  return j;
}

GpModel gp_from_json(const json& j, bool keep_factor) {
  try {
    return output_from_json(matrix_from_json(j.at("x")), j, keep_factor);
  } catch (const json::exception& e) {
    throw DataError(std::string("invalid GP JSON: ") + e.what());
  }
}

json gp_models_to_json(const std::vector<GpModel>& models) {
  if (models.empty()) throw ConfigError("GP: no models to serialize");
  json outputs = json::array();
  for (const auto& m : models) {
    if (m.x.rows() != models.front().x.rows() || m.x != models.front().x) {
      throw DataError("GP: models do not share training inputs");
    }
    outputs.push_back(output_json(m));
  }
  return json{{"x", to_json(models.front().x)}, {"outputs", outputs}};
}

std::vector<GpModel> gp_models_from_json(const json& j, bool keep_factors) {
  try {
    const Eigen::MatrixXd x = matrix_from_json(j.at("x"));
    const json& outputs = j.at("outputs");
    std::vector<GpModel> models(outputs.size());
    parallel_for(models.size(), [&](std::size_t d) { models[d] = output_from_json(x, outputs[d], keep_factors); });
    return models;
  } catch (const json::exception& e) {
    throw DataError(std::string("invalid GP JSON: ") + e.what());
  }
}

}  // namespace rom
