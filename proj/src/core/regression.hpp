#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "core/error.hpp"
#include "core/process.hpp"

namespace rdl::regression {

struct DesignMatrix {
  std::vector<std::string> columns;
  Eigen::MatrixXd values;  // one row per observation

  void validate() const;  // unique names, >= 1 column, rows > columns
};

struct RegressionResult {
  std::vector<std::string> columns;
  std::vector<double> beta;
  std::vector<double> se;      // homoskedastic
  std::vector<double> t_stat;
  double r_squared = 0.0;
  std::uint64_t n = 0;
};

// Least squares via column-pivoted QR. Rank deficiency is detected at a
// pivot tolerance of 1e-10 relative to the largest column norm and
// reported with the dependent column names.
RegressionResult ols_fit(const DesignMatrix& x, std::span<const double> y);

struct CovariateSpec {
  enum class Kind : std::uint8_t { kBinary, kUniform, kNormal };
  std::string name;
  Kind kind = Kind::kNormal;
  double p = 0.5;                  // kBinary: success probability
  double lo = 0.0, hi = 1.0;       // kUniform bounds
  double mean = 0.0, sd = 1.0;     // kNormal parameters

  void validate() const;
};

// Synthetic study population with a known coefficient vector. The
// design is an intercept column followed by the covariates in order;
// true_beta aligns with that layout.
struct SynthCohortSpec {
  std::uint64_t n = 0;
  std::vector<CovariateSpec> covariates;
  std::vector<double> true_beta;  // size = covariates.size() + 1
  double noise_sd = 1.0;          // >= 0; zero gives an exactly solvable system
  std::uint64_t seed = 0;

  void validate() const;
};

struct SynthCohort {
  DesignMatrix x;
  std::vector<double> y;
};

// Y = X beta* + noise_sd * eps with eps iid standard normal;
// deterministic given the seed.
SynthCohort generate_synth_cohort(const SynthCohortSpec& spec);

// Maps each decision in a trajectory to a sentence-length contribution
// and sums over a window of decisions from the start.
struct SentenceRule {
  double high_risk_contribution = 1.0;
  double low_risk_contribution = 0.0;
  std::uint64_t window_steps = 0;  // 0 means the whole trajectory

  void validate() const;
};

std::vector<double> cumulative_outcomes(std::span<const process::Trajectory> trajectories,
                                        const SentenceRule& rule);

}  // namespace rdl::regression
