#include "rom/pce.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "rom/errors.hpp"
#include "rom/parallel.hpp"

namespace rom {
namespace {

constexpr double kDomainSlack = 1e-12;
constexpr double kMaxCondition = 1e12;

void check_domain(double x) {
  if (!(std::abs(x) <= 1.0 + kDomainSlack)) {
    throw ValidationError("PCE input " + format_double(x) + " outside [-1, 1]");
  }
}

/// psi_0..psi_max at x.
void legendre_table(double x, int max_degree, double* out) {
  double prev = 1.0;
  double curr = x;
  out[0] = 1.0;
  if (max_degree >= 1) out[1] = std::sqrt(3.0) * x;
  for (int d = 1; d < max_degree; ++d) {
    const double next = ((2.0 * d + 1.0) * x * curr - d * prev) / (d + 1.0);
    prev = curr;
    curr = next;
    out[d + 1] = std::sqrt(2.0 * (d + 1) + 1.0) * curr;
  }
}

void enumerate(std::size_t dim, std::size_t pos, double budget, double q, int max_degree,
               std::vector<int>& current, std::vector<MultiIndex>& out, std::size_t cap) {
  if (pos == dim) {
    out.push_back(MultiIndex{current});
    if (out.size() > cap) {
      throw ConfigError("PCE basis exceeds the configured cap of " + std::to_string(cap) +
                        " terms");
    }
    return;
  }
  for (int d = 0; d <= max_degree; ++d) {
    const double cost = d == 0 ? 0.0 : std::pow(static_cast<double>(d), q);
    if (cost > budget) break;
    current[pos] = d;
    enumerate(dim, pos + 1, budget - cost, q, max_degree, current, out, cap);
  }
  current[pos] = 0;
}

struct SparseTerm {
  std::vector<std::pair<int, int>> factors;  // (dim, degree) with degree > 0
};

std::vector<SparseTerm> sparse_terms(const std::vector<MultiIndex>& basis, int& max_degree) {
  std::vector<SparseTerm> terms(basis.size());
  max_degree = 0;
  for (std::size_t k = 0; k < basis.size(); ++k) {
    for (std::size_t i = 0; i < basis[k].degrees.size(); ++i) {
      const int d = basis[k].degrees[i];
      if (d > 0) {
        terms[k].factors.emplace_back(static_cast<int>(i), d);
        max_degree = std::max(max_degree, d);
      }
    }
  }
  return terms;
}

double variance(const Eigen::VectorXd& y) {
  if (y.size() < 2) return 0.0;
  return (y.array() - y.mean()).square().sum() / static_cast<double>(y.size() - 1);
}

/// Standardized non-constant columns and their Gram matrix; shared by all
/// outputs at one candidate degree.
struct LarDesign {
  const Eigen::MatrixXd* design = nullptr;
  std::size_t constant_column = 0;
  std::vector<std::size_t> columns;  // design column of each standardized column
  Eigen::MatrixXd standardized;      // M x K', centered, unit l2 norm
  Eigen::MatrixXd gram;              // K' x K'
};

LarDesign prepare_lar(const Eigen::MatrixXd& design, std::size_t constant_column) {
  LarDesign lar;
  lar.design = &design;
  lar.constant_column = constant_column;
  const Eigen::Index m = design.rows();
  std::vector<std::size_t> keep;
  std::vector<double> norms;
  Eigen::VectorXd means = design.colwise().mean().transpose();
  for (Eigen::Index k = 0; k < design.cols(); ++k) {
    if (static_cast<std::size_t>(k) == constant_column) continue;
    const double norm = (design.col(k).array() - means[k]).matrix().norm();
    if (norm > 1e-12 * std::sqrt(static_cast<double>(m))) {
      keep.push_back(static_cast<std::size_t>(k));
      norms.push_back(norm);
    }
  }
  lar.columns = keep;
  lar.standardized.resize(m, static_cast<Eigen::Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) {
    const auto k = static_cast<Eigen::Index>(keep[j]);
    lar.standardized.col(static_cast<Eigen::Index>(j)) =
        (design.col(k).array() - means[k]).matrix() / norms[j];
  }
  lar.gram.resize(static_cast<Eigen::Index>(keep.size()), static_cast<Eigen::Index>(keep.size()));
  lar.gram.setZero();
  lar.gram.selfadjointView<Eigen::Lower>().rankUpdate(lar.standardized.transpose());
  lar.gram.triangularView<Eigen::StrictlyUpper>() = lar.gram.transpose();
  return lar;
}

/// Incremental orthonormal basis of span{1, selected columns} in sample space,
/// maintaining fitted values, hat diagonal and tr((Psi^T Psi)^-1).
class IncrementalOls {
 public:
  IncrementalOls(const Eigen::VectorXd& y, const Eigen::VectorXd& constant)
      : y_(y), fitted_(Eigen::VectorXd::Zero(y.size())), hat_(Eigen::VectorXd::Zero(y.size())) {
    append(constant);
  }

  bool append(const Eigen::VectorXd& column) {
    Eigen::VectorXd u = column;
    const Eigen::Index a = static_cast<Eigen::Index>(basis_.size());
    Eigen::VectorXd r = Eigen::VectorXd::Zero(a);
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index i = 0; i < a; ++i) {
        const double proj = basis_[static_cast<std::size_t>(i)].dot(u);
        r[i] += proj;
        u -= proj * basis_[static_cast<std::size_t>(i)];
      }
    }
    const double rho = u.norm();
    if (!(rho > 1e-10 * column.norm())) return false;
    u /= rho;
    // New column of R^-1: [-R_old^-1 r / rho; 1 / rho].
    Eigen::MatrixXd grown = Eigen::MatrixXd::Zero(a + 1, a + 1);
    grown.topLeftCorner(a, a) = r_inverse_;
    grown.col(a).head(a) = -r_inverse_ * r / rho;
    grown(a, a) = 1.0 / rho;
    trace_ += grown.col(a).squaredNorm();
    r_inverse_ = std::move(grown);
    fitted_ += u * u.dot(y_);
    hat_ += u.cwiseAbs2();
    basis_.push_back(std::move(u));
    return true;
  }

  std::size_t terms() const noexcept { return basis_.size(); }

  /// Corrected relative LOO error; +inf when undefined.
  double corrected_loo(double y_variance) const {
    const auto m = static_cast<double>(y_.size());
    const auto k = static_cast<double>(basis_.size());
    if (m <= k) return std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (Eigen::Index i = 0; i < y_.size(); ++i) {
      const double denom = 1.0 - hat_[i];
      if (!(denom > 1e-10)) return std::numeric_limits<double>::infinity();
      const double delta = (y_[i] - fitted_[i]) / denom;
      sum += delta * delta;
    }
    const double loo = sum / m;
    const double correction = m / (m - k) * (1.0 + trace_);
    return y_variance > 0.0 ? correction * loo / y_variance : correction * loo;
  }

 private:
  const Eigen::VectorXd& y_;
  Eigen::VectorXd fitted_;
  Eigen::VectorXd hat_;
  std::vector<Eigen::VectorXd> basis_;
  Eigen::MatrixXd r_inverse_ = Eigen::MatrixXd(0, 0);
  double trace_ = 0.0;
};

LarPath run_lar(const LarDesign& lar, const Eigen::VectorXd& y, const LarOptions& options) {
  const Eigen::MatrixXd& design = *lar.design;
  const auto m = static_cast<std::size_t>(design.rows());
  const auto kp = lar.columns.size();
  const double y_var = variance(y);

  LarPath result;
  IncrementalOls ols(y, design.col(static_cast<Eigen::Index>(lar.constant_column)));
  result.corrected_loo.push_back(ols.corrected_loo(y_var));
  double best = result.corrected_loo.back();
  result.best_size = 0;
  if (y_var == 0.0 || kp == 0 || m < 3) return result;

  std::size_t max_steps = std::min(kp, m - 2);
  if (options.max_active > 0) max_steps = std::min(max_steps, options.max_active);

  const Eigen::VectorXd yc = y.array() - y.mean();
  Eigen::VectorXd corr = lar.standardized.transpose() * yc;
  const double initial = corr.cwiseAbs().maxCoeff();
  if (!(initial > 0.0)) return result;

  std::vector<char> state(kp, 0);  // 0 inactive, 1 active, 2 excluded (collinear)
  std::vector<Eigen::Index> active;
  Eigen::MatrixXd chol(0, 0);  // lower Cholesky factor of the active Gram
  std::size_t since_improvement = 0;

  while (active.size() < max_steps) {
    Eigen::Index pick = -1;
    double c_max = -1.0;
    for (std::size_t j = 0; j < kp; ++j) {
      if (state[j] != 0) continue;
      const double c = std::abs(corr[static_cast<Eigen::Index>(j)]);
      if (c > c_max) {
        c_max = c;
        pick = static_cast<Eigen::Index>(j);
      }
    }
    if (pick < 0) break;
    // Active correlations share one magnitude; take it from them when present.
    const double c_level = active.empty() ? c_max : std::abs(corr[active.front()]);
    if (!(c_level > 1e-12 * initial)) break;

    // Grow the Cholesky factor of the active Gram matrix.
    const auto a = static_cast<Eigen::Index>(active.size());
    Eigen::VectorXd cross(a);
    for (Eigen::Index i = 0; i < a; ++i) cross[i] = lar.gram(active[static_cast<std::size_t>(i)], pick);
    Eigen::VectorXd l = a > 0 ? chol.triangularView<Eigen::Lower>().solve(cross) : Eigen::VectorXd();
    const double diag2 = lar.gram(pick, pick) - l.squaredNorm();
    if (!(diag2 > 1e-10)) {
      state[static_cast<std::size_t>(pick)] = 2;
      continue;
    }
    if (!ols.append(design.col(static_cast<Eigen::Index>(lar.columns[static_cast<std::size_t>(pick)])))) {
      state[static_cast<std::size_t>(pick)] = 2;
      continue;
    }
    Eigen::MatrixXd grown = Eigen::MatrixXd::Zero(a + 1, a + 1);
    grown.topLeftCorner(a, a) = chol;
    grown.row(a).head(a) = l.transpose();
    grown(a, a) = std::sqrt(diag2);
    chol = std::move(grown);
    active.push_back(pick);
    state[static_cast<std::size_t>(pick)] = 1;
    result.path.push_back(lar.columns[static_cast<std::size_t>(pick)]);

    const double score = ols.corrected_loo(y_var);
    result.corrected_loo.push_back(score);
    if (score < best) {
      best = score;
      result.best_size = result.path.size();
      since_improvement = 0;
    } else {
      ++since_improvement;
    }
    if (score <= options.target_loo) break;
    if (options.patience > 0 &&
        since_improvement >= std::max(options.patience, result.path.size() / 10)) {
      break;
    }

    // Equiangular direction and step length.
    const auto na = static_cast<Eigen::Index>(active.size());
    Eigen::VectorXd signs(na);
    for (Eigen::Index i = 0; i < na; ++i) {
      signs[i] = corr[active[static_cast<std::size_t>(i)]] >= 0.0 ? 1.0 : -1.0;
    }
    Eigen::VectorXd w = chol.triangularView<Eigen::Lower>().solve(signs);
    w = chol.transpose().triangularView<Eigen::Upper>().solve(w);
    const double norm_factor = 1.0 / std::sqrt(signs.dot(w));
    w *= norm_factor;
    Eigen::VectorXd along = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(kp));
    for (Eigen::Index i = 0; i < na; ++i) along += lar.gram.col(active[static_cast<std::size_t>(i)]) * w[i];

    const double c_now = std::abs(corr[active.front()]);
    double gamma = c_now / norm_factor;
    for (std::size_t j = 0; j < kp; ++j) {
      if (state[j] != 0) continue;
      const double cj = corr[static_cast<Eigen::Index>(j)];
      const double aj = along[static_cast<Eigen::Index>(j)];
      const double g1 = (c_now - cj) / (norm_factor - aj);
      const double g2 = (c_now + cj) / (norm_factor + aj);
      if (g1 > 1e-15 && g1 < gamma) gamma = g1;
      if (g2 > 1e-15 && g2 < gamma) gamma = g2;
    }
    corr -= gamma * along;
  }
  return result;
}

struct OutputSelection {
  double loo = std::numeric_limits<double>::infinity();
  int degree = 0;
  std::vector<MultiIndex> terms;  // constant first
  int worse_in_a_row = 0;
  bool done = false;
};

}  // namespace

int MultiIndex::total_degree() const noexcept {
  return std::accumulate(degrees.begin(), degrees.end(), 0);
}

double MultiIndex::quasi_norm(double q) const {
  double sum = 0.0;
  for (int d : degrees) {
    if (d > 0) sum += std::pow(static_cast<double>(d), q);
  }
  return std::pow(sum, 1.0 / q);
}

double legendre_eval(int degree, double x) {
  if (degree < 0) throw ConfigError("Legendre degree must be nonnegative");
  check_domain(x);
  std::vector<double> table(static_cast<std::size_t>(degree) + 1);
  legendre_table(x, degree, table.data());
  return table[static_cast<std::size_t>(degree)];
}

std::vector<MultiIndex> build_basis(std::size_t dim, int max_degree, double q, std::size_t cap) {
  if (max_degree < 0) throw ConfigError("PCE degree must be nonnegative");
  if (!(q > 0.0 && q <= 1.0)) throw ConfigError("PCE q-norm must lie in (0, 1]");
  if (dim == 0) throw ConfigError("PCE input dimension must be positive");
  std::vector<MultiIndex> out;
  std::vector<int> current(dim, 0);
  const double budget = std::pow(static_cast<double>(max_degree), q) * (1.0 + 1e-12);
  enumerate(dim, 0, budget, q, max_degree, current, out, cap);
  std::sort(out.begin(), out.end(), [](const MultiIndex& a, const MultiIndex& b) {
    const int da = a.total_degree();
    const int db = b.total_degree();
    if (da != db) return da < db;
    return a.degrees > b.degrees;
  });
  return out;
}

Eigen::MatrixXd evaluate_basis_matrix(const Eigen::MatrixXd& points,
                                      const std::vector<MultiIndex>& basis) {
  int max_degree = 0;
  const auto terms = sparse_terms(basis, max_degree);
  const Eigen::Index m = points.rows();
  const Eigen::Index p = points.cols();
  for (const auto& mi : basis) {
    if (static_cast<Eigen::Index>(mi.degrees.size()) != p) {
      throw DataError("PCE basis dimension does not match input dimension");
    }
  }
  Eigen::MatrixXd psi(m, static_cast<Eigen::Index>(basis.size()));
  std::vector<double> table(static_cast<std::size_t>(p * (max_degree + 1)));
  for (Eigen::Index r = 0; r < m; ++r) {
    for (Eigen::Index i = 0; i < p; ++i) {
      const double x = points(r, i);
      check_domain(x);
      legendre_table(std::clamp(x, -1.0, 1.0), max_degree,
                     table.data() + static_cast<std::size_t>(i * (max_degree + 1)));
    }
    for (std::size_t k = 0; k < terms.size(); ++k) {
      double value = 1.0;
      for (auto [dim, deg] : terms[k].factors) {
        value *= table[static_cast<std::size_t>(dim * (max_degree + 1) + deg)];
      }
      psi(r, static_cast<Eigen::Index>(k)) = value;
    }
  }
  return psi;
}

LeastSquaresFit fit_least_squares(const Eigen::MatrixXd& design, const Eigen::MatrixXd& targets) {
  const Eigen::Index m = design.rows();
  const Eigen::Index k = design.cols();
  if (targets.rows() != m) throw DataError("least squares: design and targets row counts differ");
  if (k == 0) throw ConfigError("least squares: empty basis");
  if (m < k) {
    throw NumericalError("least squares: " + std::to_string(m) + " samples for " +
                         std::to_string(k) + " terms; use LAR or more data");
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(design);
  const Eigen::MatrixXd r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(r).singularValues();
  LeastSquaresFit fit;
  fit.condition_number = sv[k - 1] > 0.0 ? sv[0] / sv[k - 1] : std::numeric_limits<double>::infinity();
  if (!(fit.condition_number <= kMaxCondition)) {
    throw NumericalError("least squares: design condition number " +
                         format_double(fit.condition_number) +
                         " exceeds 1e12; use LAR or more data");
  }
  const Eigen::MatrixXd qty = qr.householderQ().transpose() * targets;
  fit.coefficients = r.triangularView<Eigen::Upper>().solve(qty.topRows(k));

  const Eigen::MatrixXd q_thin = qr.householderQ() * Eigen::MatrixXd::Identity(m, k);
  const Eigen::VectorXd hat = q_thin.rowwise().squaredNorm();
  const Eigen::MatrixXd residual = targets - design * fit.coefficients;
  fit.loo_error.resize(targets.cols());
  for (Eigen::Index d = 0; d < targets.cols(); ++d) {
    double sum = 0.0;
    bool defined = true;
    for (Eigen::Index i = 0; i < m; ++i) {
      const double denom = 1.0 - hat[i];
      if (!(denom > 1e-10)) {
        defined = false;
        break;
      }
      sum += std::pow(residual(i, d) / denom, 2);
    }
    const double var = variance(targets.col(d));
    const double loo = sum / static_cast<double>(m);
    fit.loo_error[d] = !defined ? std::numeric_limits<double>::infinity()
                                : (var > 0.0 ? loo / var : loo);
  }
  return fit;
}

LarPath lar_path(const Eigen::MatrixXd& design, std::size_t constant_column,
                 const Eigen::VectorXd& target, const LarOptions& options) {
  if (design.rows() != target.size()) throw DataError("LAR: design and target sizes differ");
  const LarDesign lar = prepare_lar(design, constant_column);
  return run_lar(lar, target, options);
}

PceModel fit_lar_adaptive(const Eigen::MatrixXd& points, const Eigen::MatrixXd& targets,
                          const LarOptions& options) {
  if (points.rows() != targets.rows()) throw DataError("PCE: inputs and targets row counts differ");
  if (points.rows() < 3) throw DataError("PCE: at least 3 samples are required");
  if (options.min_degree < 0 || options.max_degree < options.min_degree) {
    throw ConfigError("PCE: degree range must be nonempty and ascending");
  }
  const auto dim = static_cast<std::size_t>(points.cols());
  const auto outputs = static_cast<std::size_t>(targets.cols());
  std::vector<OutputSelection> selections(outputs);

  for (int degree = options.min_degree; degree <= options.max_degree; ++degree) {
    if (std::all_of(selections.begin(), selections.end(), [](const auto& s) { return s.done; })) break;
    const auto basis = build_basis(dim, degree, options.q, options.basis_cap);
    const Eigen::MatrixXd psi = evaluate_basis_matrix(points, basis);
    const LarDesign lar = prepare_lar(psi, 0);
    parallel_for(outputs, [&](std::size_t d) {
      auto& sel = selections[d];
      if (sel.done) return;
      const Eigen::VectorXd y = targets.col(static_cast<Eigen::Index>(d));
      const LarPath path = run_lar(lar, y, options);
      const double score = path.corrected_loo[path.best_size];
      if (score < sel.loo) {
        sel.loo = score;
        sel.degree = degree;
        sel.terms.assign(1, basis[0]);
        for (std::size_t s = 0; s < path.best_size; ++s) sel.terms.push_back(basis[path.path[s]]);
        sel.worse_in_a_row = 0;
      } else {
        ++sel.worse_in_a_row;
      }
      if (sel.loo <= options.target_loo || sel.worse_in_a_row >= 2) sel.done = true;
    });
  }
  for (std::size_t d = 0; d < outputs; ++d) {
    if (!std::isfinite(selections[d].loo) && selections[d].terms.empty()) {
      throw NumericalError("PCE: no candidate basis achieved a finite LOO error for output " +
                           std::to_string(d));
    }
  }

  // Union of selected terms, ordered like the full basis.
  std::vector<MultiIndex> union_terms;
  for (const auto& sel : selections) {
    for (const auto& t : sel.terms) {
      if (std::find(union_terms.begin(), union_terms.end(), t) == union_terms.end()) {
        union_terms.push_back(t);
      }
    }
  }
  std::sort(union_terms.begin(), union_terms.end(), [](const MultiIndex& a, const MultiIndex& b) {
    const int da = a.total_degree();
    const int db = b.total_degree();
    if (da != db) return da < db;
    return a.degrees > b.degrees;
  });

  PceModel model;
  model.input_dim = dim;
  model.basis = union_terms;
  model.coefficients = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(union_terms.size()),
                                             static_cast<Eigen::Index>(outputs));
  json per_output = json::array();
  std::vector<std::string> failures(outputs);
  parallel_for(outputs, [&](std::size_t d) {
    const auto& sel = selections[d];
    const Eigen::MatrixXd design = evaluate_basis_matrix(points, sel.terms);
    const LeastSquaresFit fit = fit_least_squares(design, targets.col(static_cast<Eigen::Index>(d)));
    for (std::size_t t = 0; t < sel.terms.size(); ++t) {
      const auto pos = std::find(union_terms.begin(), union_terms.end(), sel.terms[t]) - union_terms.begin();
      model.coefficients(pos, static_cast<Eigen::Index>(d)) = fit.coefficients(static_cast<Eigen::Index>(t), 0);
    }
  });
  for (const auto& sel : selections) {
    per_output.push_back({{"degree", sel.degree}, {"terms", sel.terms.size()}, {"loo", sel.loo}});
  }
  model.meta = json{{"method", "lar"},
                    {"q", options.q},
                    {"degree_range", {options.min_degree, options.max_degree}},
                    {"target_loo", std::isfinite(options.target_loo) ? json(options.target_loo) : json("inf")},
                    {"outputs", per_output}};
  return model;
}

PceModel fit_pce_ols(const Eigen::MatrixXd& points, const Eigen::MatrixXd& targets, int degree,
                     double q) {
  PceModel model;
  model.input_dim = static_cast<std::size_t>(points.cols());
  model.basis = build_basis(model.input_dim, degree, q);
  const LeastSquaresFit fit = fit_least_squares(evaluate_basis_matrix(points, model.basis), targets);
  model.coefficients = fit.coefficients;
  model.meta = json{{"method", "ols"}, {"degree", degree}, {"q", q}, {"loo", to_json(fit.loo_error)}};
  return model;
}

Eigen::VectorXd pce_predict(const PceModel& model, const Eigen::VectorXd& x) {
  if (static_cast<std::size_t>(x.size()) != model.input_dim) {
    throw DataError("PCE predict: expected " + std::to_string(model.input_dim) + " inputs");
  }
  const Eigen::MatrixXd row = x.transpose();
  return (evaluate_basis_matrix(row, model.basis) * model.coefficients).transpose();
}

Eigen::MatrixXd pce_predict(const PceModel& model, const Eigen::MatrixXd& points) {
  if (static_cast<std::size_t>(points.cols()) != model.input_dim) {
    throw DataError("PCE predict: expected " + std::to_string(model.input_dim) + " inputs");
  }
  return evaluate_basis_matrix(points, model.basis) * model.coefficients;
}

json to_json(const PceModel& model) {
  json basis = json::array();
  for (const auto& mi : model.basis) basis.push_back(mi.degrees);
  return json{{"p", model.input_dim},
              {"basis", basis},
              {"coeffs", to_json(model.coefficients)},
              {"meta", model.meta}};
}

PceModel pce_from_json(const json& j) {
  try {
    PceModel model;
    model.input_dim = j.at("p").get<std::size_t>();
    for (const auto& b : j.at("basis")) {
      MultiIndex mi{b.get<std::vector<int>>()};
      if (mi.degrees.size() != model.input_dim) throw DataError("PCE JSON: basis dimension mismatch");
      model.basis.push_back(std::move(mi));
    }
    model.coefficients = matrix_from_json(j.at("coeffs"));
    if (static_cast<std::size_t>(model.coefficients.rows()) != model.basis.size()) {
      throw DataError("PCE JSON: coefficient rows do not match basis size");
    }
    model.meta = j.value("meta", json::object());
    return model;
  } catch (const json::exception& e) {
    throw DataError(std::string("invalid PCE JSON: ") + e.what());
  }
}

}  // namespace rom
