#include <cmath>
#include <vector>

#include "doctest.h"

#include "core/limit.hpp"
#include "oracles.hpp"

using rdl::NumericError;
using rdl::ValidationError;
using namespace rdl::limit;

TEST_CASE("limit shape parameters are the initial masses over k") {
  const BetaParams unit = limit_beta_params({1.0, 1.0, 1.0});
  CHECK(unit.a == doctest::Approx(1.0));
  CHECK(unit.b == doctest::Approx(1.0));

  const BetaParams tight = limit_beta_params({1.0, 1.0, 0.1});
  CHECK(tight.a == doctest::Approx(10.0));
  CHECK(tight.b == doctest::Approx(10.0));

  const BetaParams spread = limit_beta_params({1.0, 1.0, 10.0});
  CHECK(spread.a == doctest::Approx(0.1));
  CHECK(spread.b == doctest::Approx(0.1));

  const BetaParams skew = limit_beta_params({2.0, 3.0, 0.5});
  CHECK(skew.a == doctest::Approx(4.0));
  CHECK(skew.b == doctest::Approx(6.0));
}

TEST_CASE("beta parameters must be positive") {
  CHECK_THROWS_AS((BetaParams{0.0, 1.0}.validate()), ValidationError);
  CHECK_THROWS_AS((BetaParams{1.0, -1.0}.validate()), ValidationError);
  CHECK_NOTHROW(BetaParams{0.1, 0.1}.validate());
}

TEST_CASE("beta cdf agrees with quadrature across shapes") {
  const double xs[] = {0.0, 0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99, 1.0};
  const BetaParams shapes[] = {{1.0, 1.0}, {2.0, 1.0},   {2.0, 3.0},
                               {10.0, 10.0}, {0.1, 0.1}, {5.0, 0.5}};
  for (const BetaParams& shape : shapes) {
    for (const double x : xs) {
      const double expected = oracle::beta_cdf_quadrature(shape.a, shape.b, x);
      CHECK(beta_cdf(shape, x) == doctest::Approx(expected).epsilon(1e-8));
    }
  }
}

TEST_CASE("beta cdf matches the binomial closed form for integer shapes") {
  const double xs[] = {0.05, 0.3, 0.5, 0.8};
  const int shapes[][2] = {{1, 1}, {2, 3}, {4, 2}, {6, 6}};
  for (const auto& ab : shapes) {
    for (const double x : xs) {
      const double expected = oracle::beta_cdf_binomial(ab[0], ab[1], x);
      CHECK(beta_cdf({static_cast<double>(ab[0]), static_cast<double>(ab[1])}, x) ==
            doctest::Approx(expected).epsilon(1e-12));
    }
  }
}

TEST_CASE("uniform cdf is the identity") {
  const BetaParams uniform{1.0, 1.0};
  for (double x = 0.0; x <= 1.0; x += 0.125) {
    CHECK(beta_cdf(uniform, x) == doctest::Approx(x).epsilon(1e-12));
  }
}

TEST_CASE("beta cdf respects the tail symmetry") {
  const BetaParams shapes[] = {{0.1, 0.1}, {2.0, 3.0}, {10.0, 10.0}, {5.0, 0.5}};
  for (const BetaParams& shape : shapes) {
    const BetaParams swapped{shape.b, shape.a};
    for (double x = 0.05; x < 1.0; x += 0.1) {
      CHECK(beta_cdf(shape, x) ==
            doctest::Approx(1.0 - beta_cdf(swapped, 1.0 - x)).epsilon(1e-12));
    }
  }
}

TEST_CASE("beta cdf is monotone and hits the endpoints") {
  const BetaParams shape{0.1, 0.1};
  CHECK(beta_cdf(shape, 0.0) == 0.0);
  CHECK(beta_cdf(shape, 1.0) == 1.0);
  double prev = 0.0;
  for (double x = 0.01; x < 1.0; x += 0.01) {
    const double value = beta_cdf(shape, x);
    CHECK(value >= prev);
    prev = value;
  }
  CHECK_THROWS_AS(beta_cdf(shape, -0.1), ValidationError);
  CHECK_THROWS_AS(beta_cdf(shape, 1.1), ValidationError);
}

TEST_CASE("empirical distributions sort and validate their samples") {
  const EmpiricalDistribution dist =
      EmpiricalDistribution::from_samples({0.9, 0.1, 0.5, 0.5});
  CHECK(dist.samples == std::vector<double>{0.1, 0.5, 0.5, 0.9});
  CHECK(dist.count() == 4);
  CHECK_THROWS_AS(EmpiricalDistribution::from_samples({0.5, 1.5}), ValidationError);
  CHECK_THROWS_AS(EmpiricalDistribution::from_samples({-0.01}), ValidationError);
}

TEST_CASE("ks distance matches hand-computed step-function cases") {
  const auto uniform_cdf = [](double x) { return x; };

  const auto two = EmpiricalDistribution::from_samples({0.25, 0.75});
  CHECK(ks_statistic(two, uniform_cdf) == doctest::Approx(0.25).epsilon(1e-15));

  const auto one = EmpiricalDistribution::from_samples({0.5});
  CHECK(ks_statistic(one, uniform_cdf) == doctest::Approx(0.5).epsilon(1e-15));

  // All mass at zero against Uniform: the gap is the full unit.
  const auto degenerate = EmpiricalDistribution::from_samples({0.0, 0.0});
  CHECK(ks_statistic(degenerate, uniform_cdf) == doctest::Approx(1.0).epsilon(1e-15));

  CHECK_THROWS_AS(ks_statistic(EmpiricalDistribution{}, uniform_cdf), ValidationError);
}

TEST_CASE("mid-quantile samples sit at ks distance 1/(2n) from their own law") {
  const int n = 100;

  // Uniform: quantiles are immediate.
  std::vector<double> uniform_q(n);
  for (int i = 0; i < n; ++i) uniform_q[i] = (i + 0.5) / n;
  const auto uniform = EmpiricalDistribution::from_samples(uniform_q);
  CHECK(ks_statistic(uniform, [](double x) { return x; }) ==
        doctest::Approx(0.5 / n).epsilon(1e-12));

  // Beta(2, 3): invert the closed-form cdf by bisection, then measure
  // with the library cdf. Both implementations must line up for the
  // distance to collapse to 1/(2n).
  const BetaParams shape{2.0, 3.0};
  std::vector<double> beta_q(n);
  for (int i = 0; i < n; ++i) {
    const double target = (i + 0.5) / n;
    double lo = 0.0, hi = 1.0;
    for (int iter = 0; iter < 80; ++iter) {
      const double mid = 0.5 * (lo + hi);
      (oracle::beta_cdf_binomial(2, 3, mid) < target ? lo : hi) = mid;
    }
    beta_q[i] = 0.5 * (lo + hi);
  }
  const auto beta_samples = EmpiricalDistribution::from_samples(beta_q);
  const double d =
      ks_statistic(beta_samples, [&](double x) { return beta_cdf(shape, x); });
  CHECK(d == doctest::Approx(0.5 / n).epsilon(1e-6));
}

TEST_CASE("sample moments use the unbiased variance") {
  const auto dist = EmpiricalDistribution::from_samples({0.0, 1.0});
  const Moments m = sample_moments(dist);
  CHECK(m.mean == doctest::Approx(0.5));
  CHECK(m.variance == doctest::Approx(0.5));  // ((.5)^2 + (.5)^2) / (2 - 1)

  CHECK_THROWS_AS(sample_moments(EmpiricalDistribution::from_samples({0.5})),
                  ValidationError);
}

TEST_CASE("martingale z-score is the standardized drift of the endpoint mean") {
  const std::vector<double> endpoints{0.0, 1.0, 0.0, 1.0};
  // mean .5, sd sqrt(1/3), se = sd/2
  CHECK(martingale_z(endpoints, 0.5) == doctest::Approx(0.0));
  const double se = std::sqrt(1.0 / 3.0) / 2.0;
  CHECK(martingale_z(endpoints, 0.4) == doctest::Approx(0.1 / se).epsilon(1e-12));

  const std::vector<double> flat{0.5, 0.5, 0.5};
  CHECK(martingale_z(flat, 0.5) == 0.0);
  CHECK(std::isinf(martingale_z(flat, 0.4)));

  const std::vector<double> single{0.5};
  CHECK_THROWS_AS(martingale_z(single, 0.5), ValidationError);
}
