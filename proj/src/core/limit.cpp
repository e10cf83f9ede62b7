#include "core/limit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rdl::limit {

namespace {

// Continued fraction for the incomplete beta (modified Lentz).
double beta_cont_frac(double a, double b, double x) {
  constexpr double kTiny = 1e-300;
  constexpr double kEps = 1e-16;
  constexpr int kMaxIter = 500;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  throw NumericError("beta_cdf: continued fraction did not converge");
}

}  // namespace

void BetaParams::validate() const {
  if (!(std::isfinite(a) && a > 0.0 && std::isfinite(b) && b > 0.0)) {
    throw ValidationError("beta: shape parameters must be positive reals");
  }
}

BetaParams limit_beta_params(const process::UrnParams& urn) {
  urn.validate();
  return BetaParams{urn.b0 / urn.k, urn.r0 / urn.k};
}

double beta_cdf(const BetaParams& params, double x) {
  params.validate();
  if (!(std::isfinite(x) && x >= 0.0 && x <= 1.0)) {
    throw ValidationError("beta_cdf: x must lie in [0, 1]");
  }
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double a = params.a;
  const double b = params.b;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_cont_frac(a, b, x) / a;
  }
  return 1.0 - front * beta_cont_frac(b, a, 1.0 - x) / b;
}

EmpiricalDistribution EmpiricalDistribution::from_samples(std::vector<double> values) {
  for (const double v : values) {
    if (!(std::isfinite(v) && v >= 0.0 && v <= 1.0)) {
      throw ValidationError("empirical distribution: samples must lie in [0, 1]");
    }
  }
  std::sort(values.begin(), values.end());
  return EmpiricalDistribution{std::move(values)};
}

double ks_statistic(const EmpiricalDistribution& dist,
                    const std::function<double(double)>& cdf) {
  if (dist.samples.empty()) {
    throw ValidationError("ks_statistic: empty distribution");
  }
  const double n = static_cast<double>(dist.samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < dist.samples.size(); ++i) {
    const double f = cdf(dist.samples[i]);
    const double above = (static_cast<double>(i) + 1.0) / n - f;
    const double below = f - static_cast<double>(i) / n;
    d = std::max(d, std::max(above, below));
  }
  return d;
}

Moments sample_moments(const EmpiricalDistribution& dist) {
  if (dist.samples.size() < 2) {
    throw ValidationError("sample_moments: variance needs at least two samples");
  }
  const double n = static_cast<double>(dist.samples.size());
  double sum = 0.0;
  for (const double v : dist.samples) sum += v;
  const double mean = sum / n;
  double ss = 0.0;
  for (const double v : dist.samples) ss += (v - mean) * (v - mean);
  return Moments{mean, ss / (n - 1.0)};
}

double martingale_z(std::span<const double> endpoints, double p1) {
  if (endpoints.size() < 2) {
    throw ValidationError("martingale_z: needs at least two endpoints");
  }
  const double n = static_cast<double>(endpoints.size());
  double sum = 0.0;
  for (const double v : endpoints) sum += v;
  const double mean = sum / n;
  double ss = 0.0;
  for (const double v : endpoints) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  if (sd == 0.0) {
    if (mean == p1) return 0.0;
    return mean > p1 ? std::numeric_limits<double>::infinity()
                     : -std::numeric_limits<double>::infinity();
  }
  return (mean - p1) / (sd / std::sqrt(n));
}

}  // namespace rdl::limit
