#include <doctest.h>

#include "rom/cmaes.hpp"
#include "rom/errors.hpp"

using namespace rom;

TEST_CASE("CMA-ES minimizes the sphere and is deterministic") {
  auto sphere = [](const Eigen::VectorXd& x) { return x.squaredNorm(); };
  CmaesOptions options;
  options.budget = 5000;
  options.seed = 3;
  options.sigma0 = 0.5;
  const Eigen::VectorXd init = Eigen::VectorXd::Constant(5, 1.0);
  const CmaesResult a = cmaes_minimize(sphere, init, options);
  CHECK(a.best_value < 1e-10);
  CHECK(a.evaluations <= 5000);
  const CmaesResult b = cmaes_minimize(sphere, init, options);
  CHECK(a.best_x == b.best_x);
  CHECK(a.evaluations == b.evaluations);
  options.seed = 4;
  CHECK(cmaes_minimize(sphere, init, options).best_x != a.best_x);
}

TEST_CASE("CMA-ES solves Rosenbrock in two dimensions") {
  auto rosen = [](const Eigen::VectorXd& x) {
    return 100 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1 - x[0], 2);
  };
  CmaesOptions options;
  options.budget = 20000;
  const CmaesResult r = cmaes_minimize(rosen, Eigen::Vector2d(-1.2, 1.0), options);
  CHECK(r.best_value < 1e-6);
  CHECK((r.best_x - Eigen::Vector2d(1, 1)).norm() < 1e-2);
}

TEST_CASE("bounds keep every evaluated point feasible") {
  bool outside = false;
  auto shifted = [&](const Eigen::VectorXd& x) {
    if ((x.array() < 0.0).any() || (x.array() > 1.0).any()) outside = true;
    return (x.array() - 2.0).square().sum();
  };
  CmaesOptions options;
  options.lower = {0.0, 0.0, 0.0};
  options.upper = {1.0, 1.0, 1.0};
  options.budget = 2000;
  const CmaesResult r = cmaes_minimize(shifted, Eigen::Vector3d(0.5, 0.5, 0.5), options);
  CHECK_FALSE(outside);
  CHECK((r.best_x.array() - 1.0).abs().maxCoeff() < 1e-3);
}

TEST_CASE("non-finite objective values are tolerated away from the start") {
  auto f = [](const Eigen::VectorXd& x) {
    return x[0] < -0.5 ? std::numeric_limits<double>::quiet_NaN() : (x.array() - 0.2).square().sum();
  };
  CmaesOptions options;
  options.budget = 3000;
  const CmaesResult r = cmaes_minimize(f, Eigen::Vector2d(0.0, 0.0), options);
  CHECK(r.best_value < 1e-10);
  CHECK_THROWS_AS(cmaes_minimize(f, Eigen::Vector2d(-1.0, 0.0), options), ValidationError);
}

TEST_CASE("option validation") {
  auto f = [](const Eigen::VectorXd& x) { return x.squaredNorm(); };
  CmaesOptions options;
  options.budget = 2;
  CHECK_THROWS_AS(cmaes_minimize(f, Eigen::Vector2d(0, 0), options), ConfigError);
  options.budget = 100;
  options.lower = {0.0, 0.0};
  options.upper = {1.0, 1.0};
  CHECK_THROWS_AS(cmaes_minimize(f, Eigen::Vector2d(2, 0), options), ValidationError);
}
