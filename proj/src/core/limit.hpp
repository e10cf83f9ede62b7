#pragma once

#include <functional>
#include <span>
#include <vector>

#include "core/error.hpp"
#include "core/process.hpp"

namespace rdl::limit {

// Parameters of the long-run Beta law: a = b0/k, b = r0/k.
struct BetaParams {
  double a = 1.0;
  double b = 1.0;

  void validate() const;
};

BetaParams limit_beta_params(const process::UrnParams& urn);

// Regularized incomplete beta I_x(a, b), evaluated by a Lentz-style
// continued fraction with the symmetry switch at x > (a+1)/(a+b+2).
// Absolute error <= 1e-10 over the tested parameter range.
double beta_cdf(const BetaParams& params, double x);

// Sorted samples on [0, 1].
struct EmpiricalDistribution {
  std::vector<double> samples;

  // Sorts and validates; rejects values outside [0, 1].
  static EmpiricalDistribution from_samples(std::vector<double> values);

  std::size_t count() const noexcept { return samples.size(); }
};

// One-sample, two-sided Kolmogorov-Smirnov distance against `cdf`.
double ks_statistic(const EmpiricalDistribution& dist,
                    const std::function<double(double)>& cdf);

struct Moments {
  double mean = 0.0;
  double variance = 0.0;  // unbiased (n-1 denominator)
};

// Requires at least two samples.
Moments sample_moments(const EmpiricalDistribution& dist);

// z = (mean(endpoints) - p1) / (sd / sqrt(M)). Under the martingale
// property E(p_{i+1} | history) = p_i this is asymptotically standard
// normal. A zero-spread cohort with mean == p1 yields z = 0.
double martingale_z(std::span<const double> endpoints, double p1);

}  // namespace rdl::limit
