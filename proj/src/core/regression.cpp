#include "core/regression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

#include "core/rng.hpp"

namespace rdl::regression {

namespace {

constexpr double kRankTolerance = 1e-10;

struct NormalSampler {
  CounterRng& rng;
  bool have_spare = false;
  double spare = 0.0;

  double next() {
    if (have_spare) {
      have_spare = false;
      return spare;
    }
    // Box-Muller; 1 - u keeps the log argument in (0, 1].
    const double u1 = 1.0 - rng.next_unit();
    const double u2 = rng.next_unit();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare = radius * std::sin(angle);
    have_spare = true;
    return radius * std::cos(angle);
  }
};

}  // namespace

void DesignMatrix::validate() const {
  if (columns.empty()) throw ValidationError("design matrix: needs at least one column");
  if (static_cast<std::size_t>(values.cols()) != columns.size()) {
    throw ValidationError("design matrix: column names do not match value columns");
  }
  std::set<std::string> seen;
  for (const auto& name : columns) {
    if (!seen.insert(name).second) {
      throw ValidationError("design matrix: duplicate column '" + name + "'");
    }
  }
  if (values.rows() <= values.cols()) {
    throw ValidationError("design matrix: needs more observations than columns");
  }
}

RegressionResult ols_fit(const DesignMatrix& x, std::span<const double> y) {
  x.validate();
  const auto n = static_cast<std::size_t>(x.values.rows());
  const auto p = static_cast<std::size_t>(x.values.cols());
  if (y.size() != n) {
    throw ValidationError("ols_fit: outcome length " + std::to_string(y.size()) +
                          " does not match " + std::to_string(n) + " observations");
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x.values);
  qr.setThreshold(kRankTolerance);
  const auto rank = static_cast<std::size_t>(qr.rank());
  if (rank < p) {
    std::string names;
    const auto& perm = qr.colsPermutation().indices();
    for (std::size_t i = rank; i < p; ++i) {
      if (!names.empty()) names += ", ";
      names += x.columns[static_cast<std::size_t>(perm[static_cast<Eigen::Index>(i)])];
    }
    throw NumericError("ols_fit: rank deficient design; dependent columns: " + names);
  }

  const Eigen::Map<const Eigen::VectorXd> yv(y.data(), static_cast<Eigen::Index>(n));
  const Eigen::VectorXd beta = qr.solve(yv);
  const Eigen::VectorXd residuals = yv - x.values * beta;
  const double ssr = residuals.squaredNorm();
  const double dof = static_cast<double>(n - p);
  const double s2 = ssr / dof;

  // (X'X)^-1 = P R^-1 R^-T P' from the pivoted factorization.
  const auto r_factor = qr.matrixR()
                            .topLeftCorner(static_cast<Eigen::Index>(p),
                                           static_cast<Eigen::Index>(p))
                            .template triangularView<Eigen::Upper>();
  Eigen::MatrixXd r_inv =
      r_factor.solve(Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(p),
                                               static_cast<Eigen::Index>(p)));
  const Eigen::MatrixXd unscaled_cov =
      qr.colsPermutation() * (r_inv * r_inv.transpose()) *
      qr.colsPermutation().transpose();

  RegressionResult result;
  result.columns = x.columns;
  result.n = n;
  result.beta.resize(p);
  result.se.resize(p);
  result.t_stat.resize(p);
  for (std::size_t j = 0; j < p; ++j) {
    const auto idx = static_cast<Eigen::Index>(j);
    result.beta[j] = beta[idx];
    const double var = s2 * unscaled_cov(idx, idx);
    result.se[j] = var > 0.0 ? std::sqrt(var) : 0.0;
    if (result.se[j] > 0.0) {
      result.t_stat[j] = result.beta[j] / result.se[j];
    } else {
      result.t_stat[j] = result.beta[j] == 0.0
                             ? 0.0
                             : std::copysign(std::numeric_limits<double>::infinity(),
                                             result.beta[j]);
    }
  }

  // Centered total sum of squares when the design spans a constant,
  // uncentered otherwise.
  bool has_intercept = false;
  for (Eigen::Index j = 0; j < x.values.cols(); ++j) {
    const double first = x.values(0, j);
    if (first != 0.0 && (x.values.col(j).array() == first).all()) {
      has_intercept = true;
      break;
    }
  }
  double tss;
  if (has_intercept) {
    const double mean = yv.mean();
    tss = (yv.array() - mean).matrix().squaredNorm();
  } else {
    tss = yv.squaredNorm();
  }
  if (tss > 0.0) {
    result.r_squared = std::clamp(1.0 - ssr / tss, 0.0, 1.0);
  } else {
    result.r_squared = ssr == 0.0 ? 1.0 : 0.0;
  }
  return result;
}

void CovariateSpec::validate() const {
  if (name.empty()) throw ValidationError("covariate: name must be non-empty");
  switch (kind) {
    case Kind::kBinary:
      if (!(p >= 0.0 && p <= 1.0)) {
        throw ValidationError("covariate '" + name + "': p must lie in [0, 1]");
      }
      break;
    case Kind::kUniform:
      if (!(lo < hi)) {
        throw ValidationError("covariate '" + name + "': requires lo < hi");
      }
      break;
    case Kind::kNormal:
      if (!(sd >= 0.0) || !std::isfinite(sd) || !std::isfinite(mean)) {
        throw ValidationError("covariate '" + name + "': sd must be finite and >= 0");
      }
      break;
  }
}

void SynthCohortSpec::validate() const {
  if (covariates.empty()) throw ValidationError("synth cohort: needs at least one covariate");
  if (true_beta.size() != covariates.size() + 1) {
    throw ValidationError("synth cohort: true_beta must have one entry per covariate plus "
                          "the intercept");
  }
  if (n <= covariates.size() + 1) {
    throw ValidationError("synth cohort: n must exceed the column count");
  }
  if (!(noise_sd >= 0.0) || !std::isfinite(noise_sd)) {
    throw ValidationError("synth cohort: noise_sd must be finite and >= 0");
  }
  for (const auto& cov : covariates) cov.validate();
}

SynthCohort generate_synth_cohort(const SynthCohortSpec& spec) {
  spec.validate();
  const auto n = static_cast<Eigen::Index>(spec.n);
  const auto p = static_cast<Eigen::Index>(spec.covariates.size() + 1);

  SynthCohort cohort;
  cohort.x.columns.reserve(spec.covariates.size() + 1);
  cohort.x.columns.push_back("(intercept)");
  for (const auto& cov : spec.covariates) cohort.x.columns.push_back(cov.name);
  cohort.x.values.resize(n, p);
  cohort.x.values.col(0).setOnes();

  CounterRng rng(mix64(spec.seed));
  NormalSampler normal{rng};
  for (Eigen::Index i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < spec.covariates.size(); ++c) {
      const auto& cov = spec.covariates[c];
      double value = 0.0;
      switch (cov.kind) {
        case CovariateSpec::Kind::kBinary:
          value = rng.next_unit() < cov.p ? 1.0 : 0.0;
          break;
        case CovariateSpec::Kind::kUniform:
          value = cov.lo + (cov.hi - cov.lo) * rng.next_unit();
          break;
        case CovariateSpec::Kind::kNormal:
          value = cov.mean + cov.sd * normal.next();
          break;
      }
      cohort.x.values(i, static_cast<Eigen::Index>(c + 1)) = value;
    }
  }

  const Eigen::Map<const Eigen::VectorXd> beta(spec.true_beta.data(), p);
  Eigen::VectorXd yv = cohort.x.values * beta;
  if (spec.noise_sd > 0.0) {
    for (Eigen::Index i = 0; i < n; ++i) yv[i] += spec.noise_sd * normal.next();
  }
  cohort.y.assign(yv.data(), yv.data() + n);
  return cohort;
}

void SentenceRule::validate() const {
  if (!std::isfinite(high_risk_contribution) || !std::isfinite(low_risk_contribution)) {
    throw ValidationError("sentence rule: contributions must be finite");
  }
}

std::vector<double> cumulative_outcomes(std::span<const process::Trajectory> trajectories,
                                        const SentenceRule& rule) {
  rule.validate();
  std::vector<double> totals;
  totals.reserve(trajectories.size());
  for (const auto& path : trajectories) {
    const std::uint64_t window = rule.window_steps == 0
                                     ? path.outcomes.size()
                                     : std::min<std::uint64_t>(rule.window_steps,
                                                               path.outcomes.size());
    double total = 0.0;
    for (std::uint64_t i = 0; i < window; ++i) {
      total += path.outcomes[i] == process::DecisionOutcome::kHighRisk
                   ? rule.high_risk_contribution
                   : rule.low_risk_contribution;
    }
    totals.push_back(total);
  }
  return totals;
}

}  // namespace rdl::regression
