#pragma once

#include <cstddef>
#include <vector>

namespace cbpscan::stats {

// Standard normal density and distribution function.
double norm_pdf(double x);
double norm_cdf(double x);

// Kahan compensated accumulator; parallel reductions combine per-worker sums
// in a fixed order so totals do not depend on thread scheduling.
struct KahanSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double x) {
    const double y = x - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

// One-sample Kolmogorov-Smirnov statistic against Uniform(0,1).
// Sorts a copy of the sample.
double ks_statistic_uniform(std::vector<double> sample);

// Critical value for the one-sample KS test at level alpha, using the
// asymptotic Kolmogorov point with the Stephens finite-sample correction
// sqrt(-log(alpha/2)/2) / (sqrt(n) + 0.12 + 0.11/sqrt(n)). Good to a few
// parts per thousand for n >= 35.
double ks_critical_value(std::size_t n, double alpha);

// Exact upper tail P(X >= k) for X ~ Binomial(n, p), summed in log space.
double binomial_sf(std::size_t k, std::size_t n, double p);

}  // namespace cbpscan::stats
