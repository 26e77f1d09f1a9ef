#include <doctest.h>

#include <limits>

#include "../oracles.hpp"
#include "rom/errors.hpp"
#include "rom/parallel.hpp"
#include "rom/uq.hpp"

using namespace rom;

TEST_CASE("moment accumulation matches two-pass moments") {
  const Eigen::MatrixXd x = oracle::random_matrix(1000, 4, 1, -3, 7);
  MomentAccumulator all, a, b;
  for (Eigen::Index i = 0; i < 1000; ++i) {
    all.add(x.row(i).transpose());
    (i < 377 ? a : b).add(x.row(i).transpose());
  }
  a.merge(b);
  const Eigen::VectorXd mean = x.colwise().mean().transpose();
  const Eigen::VectorXd m2 = (x.rowwise() - mean.transpose()).colwise().squaredNorm().transpose();
  CHECK((all.mean - mean).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((a.mean - mean).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(((a.m2 - m2).array() / m2.array()).abs().maxCoeff() < 1e-12);
  CHECK(((all.m2 - m2).array() / m2.array()).abs().maxCoeff() < 1e-12);
}

TEST_CASE("linear passthrough reproduces uniform moments") {
  const ParameterSpace space = default_space();
  const Eigen::VectorXd slope = Eigen::VectorXd::LinSpaced(20, 0.1, 2.0);
  // Output 0 is a + b.x, output 1 is (x_0)^2, both in normalized coordinates.
  BatchEvaluator f = [&](const std::vector<DesignPoint>& pts) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(pts.size()), 2);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Eigen::VectorXd z = normalize(space, pts[i]);
      out(static_cast<Eigen::Index>(i), 0) = 3.0 + slope.dot(z);
      out(static_cast<Eigen::Index>(i), 1) = z[0] * z[0];
    }
    return out;
  };
  const std::size_t n = 11000;
  const McStatistics s = monte_carlo(f, space, n, 9);
  const double var0 = slope.squaredNorm() / 3.0;
  const double var1 = 1.0 / 5.0 - 1.0 / 9.0;
  CHECK(std::abs(s.mean[0] - 3.0) < 3 * std::sqrt(var0 / n));
  CHECK(std::abs(s.mean[1] - 1.0 / 3.0) < 3 * std::sqrt(var1 / n));
  // Standard error of the sample std is about std * sqrt((kurtosis - 1) / (4n)); 1 bounds the excess here.
  CHECK(std::abs(s.std[0] - std::sqrt(var0)) < 3 * std::sqrt(var0 / n));
  CHECK(std::abs(s.std[1] - std::sqrt(var1)) < 3 * std::sqrt(var1 / n));
}

TEST_CASE("Monte Carlo results do not depend on the thread count") {
  const ParameterSpace space = default_space();
  const auto eval = synthetic_evaluator(default_config(NoiseVariant::noisy), space, 32);
  const int saved = thread_count();
  set_thread_count(1);
  const McStatistics a = monte_carlo(eval, space, 1300, 5, 100);
  set_thread_count(3);
  const McStatistics b = monte_carlo(eval, space, 1300, 5, 100);
  set_thread_count(saved);
  CHECK(a.mean == b.mean);
  CHECK(a.std == b.std);
  CHECK(to_json(a) == to_json(mc_statistics_from_json(to_json(a))));
}

TEST_CASE("evaluator failures name the sample") {
  const ParameterSpace space = default_space();
  const double marker = sample_uniform(space, 50, 2)[17][0];
  BatchEvaluator bad = [&](const std::vector<DesignPoint>& pts) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(pts.size()), 3);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (pts[i][0] == marker) out(static_cast<Eigen::Index>(i), 1) = NAN;
    }
    return out;
  };
  try {
    monte_carlo(bad, space, 50, 2, 10);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::numerical);
    CHECK(std::string(e.what()).find("sample 17") != std::string::npos);
  }
}

TEST_CASE("comparison uses the reference magnitude") {
  McStatistics ref, cand;
  ref.mean = Eigen::Vector2d(2, -4);
  ref.std = Eigen::Vector2d(1, 0.5);
  cand.mean = Eigen::Vector2d(2.2, -3.0);
  cand.std = Eigen::Vector2d(1.1, 0.5);
  const UqComparison c = compare_stats(cand, ref);
  CHECK(c.ape_mean[0] == doctest::Approx(0.1));
  CHECK(c.ape_mean[1] == doctest::Approx(0.25));
  CHECK(c.ape_std[0] == doctest::Approx(0.1));
  CHECK(c.signal_ape_mean == doctest::Approx(0.175));
  ref.std[1] = 0;
  CHECK_THROWS_AS(compare_stats(cand, ref), DataError);
}

TEST_CASE("constant and passthrough evaluators") {
  const ParameterSpace space = default_space();
  BatchEvaluator constant = [](const std::vector<DesignPoint>& pts) {
    return Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(pts.size()), 4, 2.75);
  };
  const McStatistics c = monte_carlo(constant, space, 1000, 1);
  CHECK((c.mean.array() - 2.75).abs().maxCoeff() < 1e-14);
  CHECK(c.std.cwiseAbs().maxCoeff() < 1e-14);

  BatchEvaluator first = [](const std::vector<DesignPoint>& pts) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(pts.size()), 3);
    for (std::size_t i = 0; i < pts.size(); ++i) out.row(static_cast<Eigen::Index>(i)).setConstant(pts[i][0]);
    return out;
  };
  const double width = space.upper()[0] - space.lower()[0];
  const double mid = 0.5 * (space.upper()[0] + space.lower()[0]);
  const double sd = width / std::sqrt(12.0);
  const McStatistics s = monte_carlo(first, space, 100000, 4);
  CHECK(std::abs(s.mean[0] - mid) < 3 * sd / std::sqrt(100000.0));
  CHECK(std::abs(s.std[0] - sd) < 0.02 * sd);
  const McStatistics again = monte_carlo(first, space, 100000, 4);
  CHECK(again.mean == s.mean);
  CHECK(again.std == s.std);

  // The mean error shrinks roughly like n^-1/2: averaged over seeds it drops with n.
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t n : {1000u, 10000u, 100000u}) {
    double err = 0;
    for (std::uint64_t seed = 1; seed <= 8; ++seed) err += std::abs(monte_carlo(first, space, n, seed).mean[0] - mid);
    err /= 8;
    CHECK(err < prev);
    CHECK(err < 4 * sd / std::sqrt(static_cast<double>(n)));
    prev = err;
  }
}

TEST_CASE("comparison of identical and scaled statistics") {
  McStatistics ref;
  ref.mean = Eigen::Vector3d(1, 2, 3);
  ref.std = Eigen::Vector3d(0.5, 0.4, 0.3);
  const UqComparison same = compare_stats(ref, ref);
  CHECK(same.ape_mean.cwiseAbs().maxCoeff() == 0.0);
  CHECK(same.signal_ape_std == 0.0);
  McStatistics scaled = ref;
  scaled.mean *= 1.01;
  CHECK((compare_stats(scaled, ref).ape_mean.array() - 0.01).abs().maxCoeff() < 1e-14);
}
