#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"

#include "core/regression.hpp"

using rdl::NumericError;
using rdl::ValidationError;
using namespace rdl::regression;
namespace process = rdl::process;

namespace {

DesignMatrix make_design(std::vector<std::string> columns,
                         const std::vector<std::vector<double>>& rows) {
  DesignMatrix x;
  x.columns = std::move(columns);
  x.values.resize(static_cast<Eigen::Index>(rows.size()),
                  static_cast<Eigen::Index>(x.columns.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      x.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return x;
}

}  // namespace

TEST_CASE("collinear-free points on a line are fit exactly") {
  // n > p guard requires a third point; keep it on the same line so the
  // coefficients stay (1, 2) exactly.
  const DesignMatrix x =
      make_design({"(intercept)", "slope"}, {{1.0, 0.0}, {1.0, 1.0}, {1.0, 2.0}});
  const std::vector<double> y{1.0, 3.0, 5.0};
  const RegressionResult fit = ols_fit(x, y);
  CHECK(fit.beta[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit.beta[1] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit.n == 3);
}

TEST_CASE("intercept-only regression recovers the mean") {
  const DesignMatrix x = make_design({"(intercept)"}, {{1.0}, {1.0}, {1.0}});
  const std::vector<double> y{1.0, 2.0, 3.0};
  const RegressionResult fit = ols_fit(x, y);
  CHECK(fit.beta[0] == doctest::Approx(2.0).epsilon(1e-14));
  // SE of the mean: s / sqrt(n) with s = 1.
  CHECK(fit.se[0] == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-12));
}

TEST_CASE("simple linear regression matches the closed-form estimates") {
  // y on a single regressor plus intercept; textbook formulas on the side.
  const std::vector<double> xs{1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
  const std::vector<double> y{1.1, 1.9, 3.2, 3.8, 5.1, 5.9};

  std::vector<std::vector<double>> rows;
  for (const double v : xs) rows.push_back({1.0, v});
  const RegressionResult fit = ols_fit(make_design({"(intercept)", "x"}, rows), y);

  const double n = static_cast<double>(xs.size());
  double x_mean = 0.0, y_mean = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    x_mean += xs[i] / n;
    y_mean += y[i] / n;
  }
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - x_mean) * (xs[i] - x_mean);
    sxy += (xs[i] - x_mean) * (y[i] - y_mean);
  }
  const double slope = sxy / sxx;
  const double intercept = y_mean - slope * x_mean;
  double rss = 0.0, tss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = y[i] - intercept - slope * xs[i];
    rss += r * r;
    tss += (y[i] - y_mean) * (y[i] - y_mean);
  }
  const double s2 = rss / (n - 2.0);
  const double se_slope = std::sqrt(s2 / sxx);
  const double se_intercept = std::sqrt(s2 * (1.0 / n + x_mean * x_mean / sxx));

  CHECK(fit.beta[0] == doctest::Approx(intercept).epsilon(1e-12));
  CHECK(fit.beta[1] == doctest::Approx(slope).epsilon(1e-12));
  CHECK(fit.se[0] == doctest::Approx(se_intercept).epsilon(1e-10));
  CHECK(fit.se[1] == doctest::Approx(se_slope).epsilon(1e-10));
  CHECK(fit.r_squared == doctest::Approx(1.0 - rss / tss).epsilon(1e-12));
  CHECK(fit.t_stat[1] == doctest::Approx(slope / se_slope).epsilon(1e-10));
}

TEST_CASE("noiseless targets are recovered to 1e-8 on a random well-conditioned design") {
  std::mt19937 gen(77);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int n = 200, p = 10;

  DesignMatrix x;
  x.columns.push_back("(intercept)");
  for (int j = 1; j < p; ++j) x.columns.push_back("c" + std::to_string(j));
  x.values.resize(n, p);
  for (int i = 0; i < n; ++i) {
    x.values(i, 0) = 1.0;
    for (int j = 1; j < p; ++j) x.values(i, j) = normal(gen);
  }

  std::vector<double> beta_star(p);
  for (int j = 0; j < p; ++j) beta_star[j] = normal(gen);
  std::vector<double> y(n);
  for (int i = 0; i < n; ++i) {
    double value = 0.0;
    for (int j = 0; j < p; ++j) value += x.values(i, j) * beta_star[j];
    y[i] = value;
  }

  const RegressionResult fit = ols_fit(x, y);
  for (int j = 0; j < p; ++j) {
    CHECK(std::fabs(fit.beta[j] - beta_star[j]) < 1e-8);
  }
  CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("residuals are orthogonal to every design column") {
  std::mt19937 gen(99);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int n = 150, p = 6;

  DesignMatrix x;
  x.columns.push_back("(intercept)");
  for (int j = 1; j < p; ++j) x.columns.push_back("c" + std::to_string(j));
  x.values.resize(n, p);
  std::vector<double> y(n);
  for (int i = 0; i < n; ++i) {
    x.values(i, 0) = 1.0;
    for (int j = 1; j < p; ++j) x.values(i, j) = normal(gen);
    y[i] = normal(gen) * 3.0 + 0.5;
  }

  const RegressionResult fit = ols_fit(x, y);
  Eigen::VectorXd residual(n);
  for (int i = 0; i < n; ++i) {
    double predicted = 0.0;
    for (int j = 0; j < p; ++j) predicted += x.values(i, j) * fit.beta[j];
    residual(i) = y[i] - predicted;
  }
  const Eigen::VectorXd xtr = x.values.transpose() * residual;
  // Relative to the scale of X^T y.
  Eigen::VectorXd y_vec = Eigen::Map<const Eigen::VectorXd>(y.data(), n);
  const double scale = (x.values.transpose() * y_vec).norm();
  CHECK(xtr.norm() / scale < 1e-8);
}

TEST_CASE("rescaling a column rescales its coefficient and standard error") {
  std::mt19937 gen(11);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int n = 80;
  DesignMatrix x = make_design({"(intercept)", "a", "b"}, {});
  x.values.resize(n, 3);
  std::vector<double> y(n);
  for (int i = 0; i < n; ++i) {
    x.values(i, 0) = 1.0;
    x.values(i, 1) = normal(gen);
    x.values(i, 2) = normal(gen) * 2.0 + 1.0;
    y[i] = 2.0 + 0.7 * x.values(i, 1) - 0.3 * x.values(i, 2) + normal(gen);
  }
  const RegressionResult base = ols_fit(x, y);

  const double c = 10.0;
  DesignMatrix scaled = x;
  for (int i = 0; i < n; ++i) scaled.values(i, 1) *= c;
  const RegressionResult rescaled = ols_fit(scaled, y);

  CHECK(rescaled.beta[1] == doctest::Approx(base.beta[1] / c).epsilon(1e-10));
  CHECK(rescaled.se[1] == doctest::Approx(base.se[1] / c).epsilon(1e-10));
  CHECK(rescaled.beta[0] == doctest::Approx(base.beta[0]).epsilon(1e-10));
  CHECK(rescaled.r_squared == doctest::Approx(base.r_squared).epsilon(1e-10));
  CHECK(rescaled.t_stat[1] == doctest::Approx(base.t_stat[1]).epsilon(1e-8));
}

TEST_CASE("exactly collinear columns raise a named rank error") {
  const int n = 20;
  DesignMatrix x = make_design({"(intercept)", "treatment", "treatment_copy"}, {});
  x.values.resize(n, 3);
  std::vector<double> y(n);
  std::mt19937 gen(3);
  std::bernoulli_distribution flip(0.5);
  for (int i = 0; i < n; ++i) {
    x.values(i, 0) = 1.0;
    x.values(i, 1) = flip(gen) ? 1.0 : 0.0;
    x.values(i, 2) = x.values(i, 1);
    y[i] = static_cast<double>(i);
  }
  CHECK_THROWS_WITH_AS(ols_fit(x, y), doctest::Contains("rank deficient"), NumericError);
}

TEST_CASE("design matrix validation") {
  DesignMatrix empty;
  std::vector<double> y{1.0};
  CHECK_THROWS_AS(ols_fit(empty, y), ValidationError);

  // n must exceed p.
  const DesignMatrix square = make_design({"(intercept)", "x"}, {{1.0, 0.0}, {1.0, 1.0}});
  const std::vector<double> y2{1.0, 2.0};
  CHECK_THROWS_AS(ols_fit(square, y2), ValidationError);

  const DesignMatrix dup =
      make_design({"x", "x"}, {{1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}});
  const std::vector<double> y3{1.0, 2.0, 3.0};
  CHECK_THROWS_AS(ols_fit(dup, y3), ValidationError);

  // Outcome length mismatch.
  const DesignMatrix ok = make_design({"x"}, {{1.0}, {2.0}, {3.0}});
  const std::vector<double> y_short{1.0, 2.0};
  CHECK_THROWS_AS(ols_fit(ok, y_short), ValidationError);
}

TEST_CASE("synthetic cohorts are deterministic and respect their spec") {
  SynthCohortSpec spec;
  spec.n = 500;
  spec.covariates = {
      {"confinement", CovariateSpec::Kind::kBinary, 0.4, 0, 1, 0, 1},
      {"age", CovariateSpec::Kind::kUniform, 0.5, 18.0, 70.0, 0, 1},
      {"priors", CovariateSpec::Kind::kNormal, 0.5, 0, 1, 1.5, 2.0},
  };
  spec.true_beta = {0.2, 0.1286, -0.01, 0.05};
  spec.noise_sd = 0.5;
  spec.seed = 42;

  const SynthCohort first = generate_synth_cohort(spec);
  const SynthCohort second = generate_synth_cohort(spec);
  CHECK(first.x.values == second.x.values);
  CHECK(first.y == second.y);

  SynthCohortSpec other = spec;
  other.seed = 43;
  const SynthCohort third = generate_synth_cohort(other);
  CHECK(first.y != third.y);

  REQUIRE(first.x.columns.size() == 4);
  CHECK(first.x.columns[0] == "(intercept)");
  CHECK(first.x.columns[1] == "confinement");
  for (int i = 0; i < 500; ++i) {
    CHECK(first.x.values(i, 0) == 1.0);
    const double b = first.x.values(i, 1);
    CHECK((b == 0.0 || b == 1.0));
    CHECK(first.x.values(i, 2) >= 18.0);
    CHECK(first.x.values(i, 2) < 70.0);
  }
}

TEST_CASE("a noiseless synthetic cohort is fit exactly") {
  SynthCohortSpec spec;
  spec.n = 300;
  spec.covariates = {
      {"confinement", CovariateSpec::Kind::kBinary, 0.5, 0, 1, 0, 1},
      {"risk", CovariateSpec::Kind::kNormal, 0.5, 0, 1, 0.0, 1.0},
  };
  spec.true_beta = {1.0, 0.1286, -0.4};
  spec.noise_sd = 0.0;
  spec.seed = 7;

  const SynthCohort cohort = generate_synth_cohort(spec);
  const RegressionResult fit = ols_fit(cohort.x, cohort.y);
  for (std::size_t j = 0; j < spec.true_beta.size(); ++j) {
    CHECK(std::fabs(fit.beta[j] - spec.true_beta[j]) < 1e-8);
  }
}

TEST_CASE("synth spec validation") {
  SynthCohortSpec spec;
  spec.n = 10;
  spec.covariates = {{"x", CovariateSpec::Kind::kNormal, 0.5, 0, 1, 0, 1}};
  spec.true_beta = {0.0};  // needs 2 entries
  CHECK_THROWS_AS(spec.validate(), ValidationError);

  spec.true_beta = {0.0, 1.0};
  CHECK_NOTHROW(spec.validate());

  spec.noise_sd = -1.0;
  CHECK_THROWS_AS(spec.validate(), ValidationError);
  spec.noise_sd = 0.0;  // noiseless is allowed
  CHECK_NOTHROW(spec.validate());

  spec.n = 2;  // not more than the column count
  CHECK_THROWS_AS(spec.validate(), ValidationError);

  CovariateSpec bad_p{"b", CovariateSpec::Kind::kBinary, 1.5, 0, 1, 0, 1};
  CHECK_THROWS_AS(bad_p.validate(), ValidationError);
  CovariateSpec bad_range{"u", CovariateSpec::Kind::kUniform, 0.5, 2.0, 1.0, 0, 1};
  CHECK_THROWS_AS(bad_range.validate(), ValidationError);
}

TEST_CASE("cumulative outcomes sum rule-mapped decisions over a window") {
  using process::DecisionOutcome;
  process::Trajectory all_low;
  all_low.probabilities = {0.5, 0.4, 0.3, 0.2};
  all_low.outcomes = {DecisionOutcome::kLowRisk, DecisionOutcome::kLowRisk,
                      DecisionOutcome::kLowRisk};
  process::Trajectory mixed;
  mixed.probabilities = {0.5, 0.6, 0.7, 0.6};
  mixed.outcomes = {DecisionOutcome::kHighRisk, DecisionOutcome::kHighRisk,
                    DecisionOutcome::kLowRisk};
  const std::vector<process::Trajectory> trajectories{all_low, mixed};

  SentenceRule per_day;  // 1 per high-risk outcome, whole trajectory
  const std::vector<double> days = cumulative_outcomes(trajectories, per_day);
  REQUIRE(days.size() == 2);
  CHECK(days[0] == doctest::Approx(0.0));
  CHECK(days[1] == doctest::Approx(2.0));

  SentenceRule weighted;
  weighted.high_risk_contribution = 30.0;
  weighted.low_risk_contribution = 1.0;
  const std::vector<double> mixed_days = cumulative_outcomes(trajectories, weighted);
  CHECK(mixed_days[0] == doctest::Approx(3.0));
  CHECK(mixed_days[1] == doctest::Approx(61.0));

  SentenceRule windowed;
  windowed.window_steps = 2;
  const std::vector<double> first_two = cumulative_outcomes(trajectories, windowed);
  CHECK(first_two[1] == doctest::Approx(2.0));
  windowed.window_steps = 1;
  CHECK(cumulative_outcomes(trajectories, windowed)[1] == doctest::Approx(1.0));

  CHECK(cumulative_outcomes({}, per_day).empty());
}
