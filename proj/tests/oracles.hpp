// Independent reference implementations used to check library results.
// Everything here is test-side arithmetic: different algorithms than the
// library (closed forms, quadrature, exact integer ratios), so agreement
// is evidence rather than tautology.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

namespace oracle {

// s! (L-s)! / (L+1)! as an exact integer ratio, the sequence probability
// of any length-L outcome string with s high-risk outcomes when
// b0 = r0 = k = 1. Exact for L <= 25 (26! fits in 128 bits).
inline double unit_urn_sequence_probability(int length, int successes) {
  auto factorial = [](int m) {
    __int128 f = 1;
    for (int i = 2; i <= m; ++i) f *= i;
    return f;
  };
  const __int128 numerator = factorial(successes) * factorial(length - successes);
  const __int128 denominator = factorial(length + 1);
  return static_cast<double>(static_cast<long double>(numerator) /
                             static_cast<long double>(denominator));
}

// General exchangeable form: grouped rising products instead of the
// library's ordered conditional chain.
//   P = prod_{j<s}(b0 + j k) * prod_{j<L-s}(r0 + j k) / prod_{j<L}(b0 + r0 + j k)
inline double urn_sequence_probability(double b0, double r0, double k, int length,
                                       int successes) {
  long double p = 1.0L;
  for (int j = 0; j < successes; ++j) p *= b0 + j * k;
  for (int j = 0; j < length - successes; ++j) p *= r0 + j * k;
  for (int j = 0; j < length; ++j) p /= b0 + r0 + j * k;
  return static_cast<double>(p);
}

inline double simpson(const std::function<double(double)>& f, double lo, double hi,
                      int panels) {
  const double h = (hi - lo) / panels;
  long double sum = f(lo) + f(hi);
  for (int i = 1; i < panels; ++i) {
    sum += f(lo + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  }
  return static_cast<double>(sum * h / 3.0L);
}

// Regularized incomplete beta by quadrature. For a < 1 the substitution
// u = v^(1/a) removes the endpoint singularity at zero; x > 1/2 is
// mapped through the tail symmetry so the other endpoint never enters.
inline double beta_cdf_quadrature(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  if (x > 0.5) return 1.0 - beta_cdf_quadrature(b, a, 1.0 - x);
  constexpr int kPanels = 1 << 17;
  double numerator = 0.0;
  if (a < 1.0) {
    const double upper = std::pow(x, a);
    numerator = simpson(
                    [&](double v) {
                      return std::pow(1.0 - std::pow(v, 1.0 / a), b - 1.0);
                    },
                    0.0, upper, kPanels) /
                a;
  } else {
    numerator = simpson(
        [&](double u) { return std::pow(u, a - 1.0) * std::pow(1.0 - u, b - 1.0); }, 0.0, x,
        kPanels);
  }
  const double beta_fn = std::exp(std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
  return numerator / beta_fn;
}

// Integer-parameter closed form: I_x(a, b) = P(Binomial(a+b-1, x) >= a).
inline double beta_cdf_binomial(int a, int b, double x) {
  const int n = a + b - 1;
  long double sum = 0.0L;
  for (int j = a; j <= n; ++j) {
    long double c = 1.0L;
    for (int i = 0; i < j; ++i) c = c * (n - i) / (i + 1);
    sum += c * std::pow(static_cast<long double>(x), j) *
           std::pow(1.0L - static_cast<long double>(x), n - j);
  }
  return static_cast<double>(sum);
}

// Expected biased-group probability under R = 1:
// e_{i+1} = e_i (1 - rho) + rho, iterated from e_1 = p1.
inline double biased_mean_iterated(double p1, double rho, std::uint64_t n_steps) {
  long double e = p1;
  for (std::uint64_t i = 1; i < n_steps; ++i) e = e * (1.0L - rho) + rho;
  return static_cast<double>(e);
}

// The same in closed form: e_N = 1 - (1 - rho)^(N-1) (1 - e_1).
inline double biased_mean_closed_form(double p1, double rho, std::uint64_t n_steps) {
  return 1.0 - std::pow(1.0 - rho, static_cast<double>(n_steps - 1)) * (1.0 - p1);
}

struct MeanVar {
  double mean = 0.0;
  double variance = 0.0;  // n-1 denominator
};

inline MeanVar mean_var(const std::vector<double>& values) {
  long double sum = 0.0L;
  for (const double v : values) sum += v;
  const double mean = static_cast<double>(sum / values.size());
  long double ss = 0.0L;
  for (const double v : values) ss += (v - mean) * (v - mean);
  return MeanVar{mean, static_cast<double>(ss / (values.size() - 1))};
}

}  // namespace oracle
