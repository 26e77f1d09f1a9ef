#include <doctest.h>

#include "../oracles.hpp"
#include "rom/errors.hpp"
#include "rom/dataset.hpp"
#include "rom/pca.hpp"
#include "rom/synthetic_model.hpp"

using namespace rom;

TEST_CASE("PCA subspace matches the covariance eigenvectors") {
  // Rank-3 structure plus tiny noise in 10 dimensions.
  const Eigen::MatrixXd scores = oracle::random_matrix(200, 3, 1) * Eigen::Vector3d(5, 2, 1).asDiagonal();
  const Eigen::MatrixXd basis = oracle::random_matrix(3, 10, 2);
  const Eigen::MatrixXd x = (scores * basis + 1e-3 * oracle::random_matrix(200, 10, 3)).rowwise() +
                            Eigen::RowVectorXd::LinSpaced(10, 1, 10);
  const PcaModel model = fit_pca(x, 3);
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - mean;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(centered.transpose() * centered);
  const Eigen::MatrixXd top = es.eigenvectors().rightCols(3);
  // Projectors onto the two 3-dimensional subspaces coincide.
  const Eigen::MatrixXd p_model = model.components.transpose() * model.components;
  const Eigen::MatrixXd p_oracle = top * top.transpose();
  CHECK((p_model - p_oracle).norm() < 1e-8);
  for (int i = 0; i < 3; ++i) {
    CHECK(model.singular_values[i] * model.singular_values[i] ==
          doctest::Approx(es.eigenvalues()[9 - i]).epsilon(1e-10));
  }
}

TEST_CASE("full-rank PCA reconstructs exactly and signs are canonical") {
  const Eigen::MatrixXd x = oracle::random_matrix(30, 6, 4);
  const PcaModel model = fit_pca(x, 6);
  for (Eigen::Index r = 0; r < 30; ++r) {
    const Eigen::VectorXd row = x.row(r).transpose();
    CHECK((pca_reconstruct(model, project(model, row)) - row).norm() < 1e-12);
  }
  for (Eigen::Index c = 0; c < 6; ++c) {
    Eigen::Index pivot = 0;
    model.components.row(c).cwiseAbs().maxCoeff(&pivot);
    CHECK(model.components(c, pivot) > 0);
  }
  const PcaModel back = pca_from_json(to_json(model));
  CHECK(back.components == model.components);
}

TEST_CASE("PCA rejects too many components and rank deficiency") {
  const Eigen::MatrixXd x = oracle::random_matrix(5, 8, 5);
  CHECK_THROWS_AS(fit_pca(x, 6), ConfigError);
  Eigen::MatrixXd low = oracle::random_matrix(20, 1, 6) * oracle::random_matrix(1, 8, 7);
  CHECK_THROWS_AS(fit_pca(low, 3), DataError);
}

TEST_CASE("small PCA cases") {
  Eigen::MatrixXd toy(3, 2);
  toy << 1, 0, 0, 1, -1, 0;
  const PcaModel t = fit_pca(toy, 1);
  CHECK(std::abs(std::abs(t.components(0, 0)) - 1.0) < 1e-12);
  CHECK(std::abs(t.components(0, 1)) < 1e-12);
  CHECK(project(t, t.mean).cwiseAbs().maxCoeff() < 1e-15);

  // Points on an affine line in R^6.
  const Eigen::VectorXd dir = oracle::random_matrix(6, 1, 9).col(0);
  Eigen::MatrixXd line(15, 6);
  for (Eigen::Index i = 0; i < 15; ++i) line.row(i) = (Eigen::VectorXd::Constant(6, 2.0) + (i - 7) * 0.3 * dir).transpose();
  const PcaModel one = fit_pca(line, 1);
  for (Eigen::Index i = 0; i < 15; ++i) {
    const Eigen::VectorXd row = line.row(i).transpose();
    CHECK((pca_reconstruct(one, project(one, row)) - row).norm() < 1e-9);
  }

  const Eigen::MatrixXd x = oracle::random_matrix(50, 12, 10);
  const PcaModel m = fit_pca(x, 8);
  CHECK((m.components * m.components.transpose() - Eigen::MatrixXd::Identity(8, 8)).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("more components never increase the reconstruction error") {
  const Dataset d = batch_generate(default_config(NoiseVariant::noisy), default_space(), 200, 120, 12);
  auto mae = [&](std::size_t c) {
    const PcaModel m = fit_pca(d.signals, c);
    double s = 0;
    for (Eigen::Index r = 0; r < d.signals.rows(); ++r) {
      const Eigen::VectorXd row = d.signals.row(r).transpose();
      s += (pca_reconstruct(m, project(m, row)) - row).cwiseAbs().sum();
    }
    return s / static_cast<double>(d.signals.rows());
  };
  CHECK(mae(21) <= mae(11));
}
