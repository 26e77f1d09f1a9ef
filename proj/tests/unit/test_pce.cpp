#include <doctest.h>

#include <limits>

#include "../oracles.hpp"
#include "rom/errors.hpp"
#include "rom/pce.hpp"

using namespace rom;

namespace {

std::size_t binomial(std::size_t n, std::size_t k) {
  std::size_t r = 1;
  for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

TEST_CASE("Legendre polynomials match the explicit formula") {
  for (int d = 0; d <= 12; ++d) {
    for (double x : {-1.0, -0.73, -0.2, 0.0, 0.31, 0.9, 1.0}) {
      CHECK(legendre_eval(d, x) == doctest::Approx(oracle::legendre_explicit(d, x)).epsilon(1e-11));
    }
  }
  CHECK_THROWS_AS(legendre_eval(2, 1.01), ValidationError);
}

TEST_CASE("Legendre polynomials are orthonormal under U(-1, 1)") {
  Eigen::VectorXd nodes, weights;
  oracle::gauss_legendre(20, nodes, weights);
  for (int a = 0; a <= 8; ++a) {
    for (int b = 0; b <= 8; ++b) {
      double s = 0;
      for (Eigen::Index i = 0; i < nodes.size(); ++i) s += 0.5 * weights[i] * legendre_eval(a, nodes[i]) * legendre_eval(b, nodes[i]);
      CHECK(s == doctest::Approx(a == b ? 1.0 : 0.0).epsilon(1e-12).scale(1.0));
    }
  }
}

TEST_CASE("basis size and truncation") {
  CHECK(build_basis(20, 2, 1.0).size() == 231);
  CHECK(build_basis(5, 4, 1.0).size() == binomial(9, 4));
  // Nested-loop enumeration of the hyperbolic set in 3 dimensions.
  for (double q : {0.5, 0.75}) {
    std::size_t count = 0;
    for (int a = 0; a <= 4; ++a)
      for (int b = 0; b <= 4; ++b)
        for (int c = 0; c <= 4; ++c)
          if (std::pow(std::pow(a, q) + std::pow(b, q) + std::pow(c, q), 1.0 / q) <= 4.0 + 1e-9) ++count;
    CHECK(build_basis(3, 4, q).size() == count);
  }
  const auto basis = build_basis(3, 2, 1.0);
  CHECK(basis.front().total_degree() == 0);
  for (std::size_t i = 1; i < basis.size(); ++i) CHECK(basis[i - 1].total_degree() <= basis[i].total_degree());
  CHECK_THROWS_AS(build_basis(20, 6, 1.0, 1000), ConfigError);
}

TEST_CASE("OLS recovers an exact degree-2 expansion in 20 dimensions") {
  const auto basis = build_basis(20, 2, 1.0);
  const Eigen::MatrixXd x = oracle::random_matrix(700, 20, 11);
  Eigen::VectorXd truth = oracle::random_matrix(231, 1, 12).col(0);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(700);
  for (Eigen::Index m = 0; m < 700; ++m) {
    for (std::size_t k = 0; k < basis.size(); ++k) {
      double v = truth[static_cast<Eigen::Index>(k)];
      for (int i = 0; i < 20; ++i) v *= oracle::legendre_explicit(basis[k].degrees[static_cast<std::size_t>(i)], x(m, i));
      y[m] += v;
    }
  }
  const PceModel model = fit_pce_ols(x, y, 2);
  REQUIRE(model.basis.size() == 231);
  CHECK((model.coefficients.col(0) - truth).norm() / truth.norm() < 1e-10);
}

TEST_CASE("OLS leave-one-out error equals brute-force refits") {
  const Eigen::MatrixXd x = oracle::random_matrix(40, 2, 21);
  const auto basis = build_basis(2, 3, 1.0);
  const Eigen::MatrixXd design = evaluate_basis_matrix(x, basis);
  Eigen::VectorXd y(40);
  for (Eigen::Index m = 0; m < 40; ++m) y[m] = std::exp(x(m, 0)) * std::cos(2 * x(m, 1));
  const LeastSquaresFit fit = fit_least_squares(design, y);
  double sum = 0;
  for (Eigen::Index out = 0; out < 40; ++out) {
    Eigen::MatrixXd a(39, design.cols());
    Eigen::VectorXd b(39);
    for (Eigen::Index m = 0, r = 0; m < 40; ++m) {
      if (m == out) continue;
      a.row(r) = design.row(m);
      b[r++] = y[m];
    }
    const Eigen::VectorXd coef = a.colPivHouseholderQr().solve(b);
    const double e = y[out] - design.row(out).dot(coef);
    sum += e * e;
  }
  const double var = (y.array() - y.mean()).square().sum() / 39.0;
  CHECK(fit.loo_error[0] == doctest::Approx(sum / 40.0 / var).epsilon(1e-8));
}

TEST_CASE("ill-conditioned OLS raises a numerical error") {
  Eigen::MatrixXd design = oracle::random_matrix(30, 4, 3);
  design.col(3) = design.col(2) * (1 + 1e-15);
  CHECK_THROWS_AS(fit_least_squares(design, Eigen::VectorXd::Ones(30)), NumericalError);
}

TEST_CASE("LAR finds a sparse truth first and adaptive LAR recovers it") {
  const std::size_t dim = 6;
  const Eigen::MatrixXd x = oracle::random_matrix(120, dim, 31);
  const Eigen::MatrixXd xv = oracle::random_matrix(300, dim, 32);
  auto f = [](const Eigen::RowVectorXd& p) {
    return 2.0 + 1.5 * oracle::legendre_explicit(1, p[0]) - 0.8 * oracle::legendre_explicit(2, p[3]) +
           0.4 * oracle::legendre_explicit(1, p[1]) * oracle::legendre_explicit(1, p[5]);
  };
  Eigen::VectorXd y(120), yv(300);
  for (Eigen::Index m = 0; m < 120; ++m) y[m] = f(x.row(m));
  for (Eigen::Index m = 0; m < 300; ++m) yv[m] = f(xv.row(m));

  const auto basis = build_basis(dim, 3, 1.0);
  const LarPath path = lar_path(evaluate_basis_matrix(x, basis), 0, y);
  REQUIRE(path.path.size() >= 3);
  std::vector<MultiIndex> first;
  for (std::size_t i = 0; i < 3; ++i) first.push_back(basis[path.path[i]]);
  auto has = [&](std::vector<int> d) { return std::find(first.begin(), first.end(), MultiIndex{d}) != first.end(); };
  CHECK(has({1, 0, 0, 0, 0, 0}));
  CHECK(has({0, 0, 0, 2, 0, 0}));
  CHECK(has({0, 1, 0, 0, 0, 1}));
  CHECK(path.best_size == 3);

  const PceModel model = fit_lar_adaptive(x, y);
  CHECK(model.basis.size() == 4);
  const Eigen::VectorXd pred = pce_predict(model, xv).col(0);
  CHECK((pred - yv).norm() / yv.norm() < 1e-10);
  const PceModel back = pce_from_json(to_json(model));
  CHECK((pce_predict(back, xv) - pce_predict(model, xv)).norm() == 0.0);
}

TEST_CASE("prediction rejects inputs outside the unit box") {
  const Eigen::MatrixXd x = oracle::random_matrix(30, 2, 41);
  const PceModel model = fit_pce_ols(x, x.col(0), 1);
  CHECK_THROWS_AS(pce_predict(model, Eigen::VectorXd(Eigen::Vector2d(1.5, 0))), ValidationError);
  CHECK_THROWS(pce_predict(model, Eigen::VectorXd(Eigen::Vector3d(0, 0, 0))));
}

TEST_CASE("small PCE cases") {
  CHECK(legendre_eval(0, 0.37) == 1.0);
  CHECK(legendre_eval(1, 0.5) == doctest::Approx(0.8660254037844386).epsilon(1e-15));

  const auto b2 = build_basis(2, 2, 1.0);
  const std::vector<std::vector<int>> expected{{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};
  REQUIRE(b2.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) CHECK(b2[i].degrees == expected[i]);

  const auto full = build_basis(4, 4, 1.0);
  for (const auto& m : build_basis(4, 4, 0.5)) CHECK(std::find(full.begin(), full.end(), m) != full.end());

  const Eigen::MatrixXd pts = oracle::random_matrix(10, 3, 1);
  const auto b = build_basis(3, 3, 1.0);
  const Eigen::MatrixXd psi = evaluate_basis_matrix(pts, b);
  CHECK((psi.col(0).array() == 1.0).all());
  const Eigen::MatrixXd origin = evaluate_basis_matrix(Eigen::MatrixXd::Zero(1, 3), b);
  for (std::size_t k = 0; k < b.size(); ++k) {
    bool odd = false;
    for (int d : b[k].degrees) odd = odd || (d % 2 == 1);
    if (odd) CHECK(origin(0, static_cast<Eigen::Index>(k)) == 0.0);
  }
}

TEST_CASE("Monte Carlo Gram matrix is close to the identity") {
  const auto b = build_basis(3, 2, 1.0);
  const Eigen::MatrixXd psi = evaluate_basis_matrix(oracle::random_matrix(100000, 3, 2), b);
  const Eigen::MatrixXd gram = psi.transpose() * psi / 100000.0;
  CHECK((gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("OLS hand cases") {
  Eigen::MatrixXd x(2, 1);
  x << -1, 1;
  Eigen::VectorXd y(2);
  y << -std::sqrt(3.0), std::sqrt(3.0);
  const PceModel m = fit_pce_ols(x, y, 1);
  CHECK(std::abs(m.coefficients(0, 0)) < 1e-14);
  CHECK(m.coefficients(1, 0) == doctest::Approx(1.0).epsilon(1e-14));

  const Eigen::MatrixXd pts = oracle::random_matrix(30, 2, 3);
  CHECK(fit_pce_ols(pts, Eigen::VectorXd::Zero(30), 2).coefficients.cwiseAbs().maxCoeff() == 0.0);

  // Interpolation with M = K.
  const Eigen::MatrixXd sq = oracle::random_matrix(10, 3, 4);
  Eigen::VectorXd t(10);
  for (Eigen::Index i = 0; i < 10; ++i) t[i] = std::exp(sq(i, 0) - sq(i, 2));
  const PceModel interp = fit_pce_ols(sq, t, 2);
  REQUIRE(interp.basis.size() == 10);
  CHECK((pce_predict(interp, sq).col(0) - t).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("constant model and mean identity") {
  PceModel c;
  c.input_dim = 2;
  c.basis = {MultiIndex{{0, 0}}};
  c.coefficients = Eigen::MatrixXd::Constant(1, 1, 4.25);
  CHECK(pce_predict(c, oracle::random_matrix(5, 2, 5)).col(0).isApprox(Eigen::VectorXd::Constant(5, 4.25)));

  const Eigen::MatrixXd x = oracle::random_matrix(200, 3, 6);
  Eigen::VectorXd y(200);
  for (Eigen::Index i = 0; i < 200; ++i) y[i] = 1.0 + x(i, 0) + 0.5 * x(i, 1) * x(i, 2) - 0.3 * x(i, 2) * x(i, 2);
  const PceModel m = fit_pce_ols(x, y, 2);
  const Eigen::VectorXd pred = pce_predict(m, oracle::random_matrix(100000, 3, 7)).col(0);
  const double mean = pred.mean();
  const double se = std::sqrt((pred.array() - mean).square().sum() / (pred.size() - 1) / pred.size());
  CHECK(std::abs(mean - m.coefficients(0, 0)) < 3 * se);
}

TEST_CASE("LAR recovers 3 of 231 terms from 200 samples") {
  const auto basis = build_basis(20, 2, 1.0);
  const Eigen::MatrixXd x = oracle::random_matrix(200, 20, 51);
  const Eigen::MatrixXd xv = oracle::random_matrix(500, 20, 52);
  const std::vector<std::size_t> truth_terms{0, 5, 120};
  const std::vector<double> truth_coef{3.0, -1.25, 0.7};
  const Eigen::MatrixXd psi = evaluate_basis_matrix(x, basis), psiv = evaluate_basis_matrix(xv, basis);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(200), yv = Eigen::VectorXd::Zero(500);
  for (std::size_t i = 0; i < 3; ++i) {
    y += truth_coef[i] * psi.col(static_cast<Eigen::Index>(truth_terms[i]));
    yv += truth_coef[i] * psiv.col(static_cast<Eigen::Index>(truth_terms[i]));
  }
  LarOptions opt;
  opt.min_degree = 2;
  opt.max_degree = 2;
  opt.q = 1.0;
  const PceModel m = fit_lar_adaptive(x, y, opt);
  for (std::size_t i : truth_terms) CHECK(std::find(m.basis.begin(), m.basis.end(), basis[i]) != m.basis.end());
  CHECK((pce_predict(m, xv).col(0) - yv).norm() / yv.norm() < 1e-6);
}

TEST_CASE("an infinite LOO target stops after the first degree") {
  const Eigen::MatrixXd x = oracle::random_matrix(60, 2, 61);
  Eigen::VectorXd y(60);
  for (Eigen::Index i = 0; i < 60; ++i) y[i] = std::sin(3 * x(i, 0)) * x(i, 1);
  LarOptions opt;
  opt.target_loo = std::numeric_limits<double>::infinity();
  const PceModel m = fit_lar_adaptive(x, y, opt);
  CHECK(m.meta.at("outputs").at(0).at("degree").get<int>() == 1);
  for (const auto& b : m.basis) CHECK(b.total_degree() <= 1);
}
