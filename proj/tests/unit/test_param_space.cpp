#include <doctest.h>

#include "../oracles.hpp"
#include "rom/errors.hpp"
#include "rom/param_space.hpp"

using namespace rom;

TEST_CASE("default space has 20 named parameters with ordered bounds") {
  const ParameterSpace s = default_space();
  CHECK(s.dimension() == 20);
  for (std::size_t i = 0; i < 20; ++i) CHECK(s.lower()[i] < s.upper()[i]);
  CHECK(space_from_json(to_json(s)) == s);
}

TEST_CASE("normalize and denormalize are inverse affine maps") {
  const ParameterSpace s({"a", "b"}, {2.0, -4.0}, {6.0, 0.0});
  const std::vector<double> lo{2.0, -4.0}, hi{6.0, 0.0}, mid{4.0, -2.0};
  CHECK(normalize(s, std::span<const double>(lo)).isApprox(Eigen::Vector2d(-1, -1)));
  CHECK(normalize(s, std::span<const double>(hi)).isApprox(Eigen::Vector2d(1, 1)));
  CHECK(normalize(s, std::span<const double>(mid)).norm() < 1e-15);
  const std::vector<double> z{0.5, -0.25};
  const DesignPoint p = denormalize(s, std::span<const double>(z));
  CHECK(p[0] == doctest::Approx(5.0));
  CHECK(p[1] == doctest::Approx(-2.5));
}

TEST_CASE("invalid spaces and out-of-range points are rejected") {
  CHECK_THROWS_AS(ParameterSpace({"a"}, {1.0}, {1.0}), ValidationError);
  CHECK_THROWS_AS(ParameterSpace({"a", "b"}, {0.0}, {1.0, 2.0}), ValidationError);
  const ParameterSpace s({"a"}, {0.0}, {1.0});
  CHECK_THROWS_AS(DesignPoint(s, {1.5}), ValidationError);
  CHECK_THROWS_AS(DesignPoint(s, {0.5, 0.5}), ValidationError);
  CHECK_THROWS_AS(DesignPoint(s, {std::nan("")}), ValidationError);
}

TEST_CASE("uniform sampling passes a KS test per coordinate and is seeded") {
  const ParameterSpace s = default_space();
  const std::size_t n = 4000;
  const auto pts = sample_uniform(s, n, 42);
  // 1% critical value of the one-sample KS statistic.
  const double critical = 1.628 / std::sqrt(static_cast<double>(n));
  for (std::size_t d = 0; d < s.dimension(); ++d) {
    std::vector<double> u;
    for (const auto& p : pts) u.push_back((p[d] - s.lower()[d]) / (s.upper()[d] - s.lower()[d]));
    CHECK(oracle::ks_uniform(u) < critical);
  }
  CHECK(sample_uniform(s, 5, 42) == std::vector<DesignPoint>(pts.begin(), pts.begin() + 5));
  CHECK_FALSE(sample_uniform(s, 5, 43) == sample_uniform(s, 5, 42));
}

TEST_CASE("default bounds and the affine map at known points") {
  const ParameterSpace s = default_space();
  CHECK(s.lower()[0] == 6.1);
  CHECK(s.upper()[0] == 6.7);
  CHECK(s.lower()[4] == 142.5);
  CHECK(s.upper()[4] == 157.5);
  std::vector<double> mid(20);
  for (std::size_t i = 0; i < 20; ++i) mid[i] = 0.5 * (s.lower()[i] + s.upper()[i]);
  mid[0] = 6.4;
  CHECK(std::abs(normalize(s, std::span<const double>(mid))[0]) < 1e-12);
  std::vector<double> z(20, 0.0);
  z[0] = 1.0;
  const DesignPoint p = denormalize(s, std::span<const double>(z));
  CHECK(p[0] == doctest::Approx(6.7).epsilon(1e-15));
  CHECK(p[4] == doctest::Approx(150.0).epsilon(1e-15));
  for (const auto& q : sample_uniform(s, 50, 3)) {
    const Eigen::VectorXd x = normalize(s, q);
    const DesignPoint back = denormalize(s, std::span<const double>(x.data(), 20));
    for (std::size_t i = 0; i < 20; ++i) CHECK(std::abs(back[i] - q[i]) <= 1e-12 * std::abs(q[i]));
  }
}

TEST_CASE("sample mean of the first parameter is within three standard errors of the midpoint") {
  const ParameterSpace s = default_space();
  const std::size_t n = 100000;
  double sum = 0;
  for (const auto& p : sample_uniform(s, n, 17)) sum += p[0];
  const double se = 0.6 / std::sqrt(12.0 * n);
  CHECK(std::abs(sum / n - 6.4) < 3 * se);
}
