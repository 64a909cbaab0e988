#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "cbpscan/cbp.hpp"
#include "cbpscan/moments.hpp"

namespace cbpscan::pvalue {

// nu(x) = [(2/x)(Phi(x/2) - 0.5)] / [(x/2)Phi(x/2) + phi(x/2)], the overshoot
// correction used by the tail approximation; nu(0+) = 1.
double nu(double x);

// Local decay rate of the standardized scan process at t (a = t/L treated as
// a real number). Throws ComputeError when the denominator polynomial is not
// positive (degenerate configuration).
double c_of_t(const moments::Coefficients& coef, int n, int L, double t);

// First analytic tail approximation for the max over the window exceeding b:
// b*phi(b) * sum_t C(t) nu(sqrt(2 b^2 C(t))), clamped into [0,1] after
// summation. Terms where C(t) <= 0 contribute 0 (the integrand's continuous
// limit).
double pvalue_a1(double b, const moments::Coefficients& coef, int n, int L,
                 moments::Window w);

// Monte Carlo estimate of the skewness E(Z(t)^3) of the standardized
// straddle count under full permutation (block length 1), used for the
// extreme-value correction. Returns a curve over t with NaN outside the
// window. Deterministic for a fixed (seed, workers).
std::vector<double> skewness_curve(const simgraph::Graph& g, moments::Window w,
                                   int skew_b, std::uint64_t seed, int workers);

struct A2Result {
  double p = 0.0;
  std::vector<int> skipped_t;  // terms dropped because the skewness correction
                               // is undefined there (1 + 2b*gamma <= 0 or
                               // 1 + gamma*theta <= 0)
};

// Skewness-corrected tail approximation. gamma is indexed by t (entries
// outside the window are ignored). With gamma identically zero this equals
// pvalue_a1 exactly.
A2Result pvalue_a2(double b, const moments::Coefficients& coef, int n, int L,
                   moments::Window w, const std::vector<double>& gamma);

struct McResult {
  double p = 1.0;
  long long count_geq = 0;
  int B = 0;
};

// Monte Carlo p-value: B circular block permutations, each scanned with the
// same analytic expectation/SD curves as the observation, add-one estimator
// (1 + #{max >= observed}) / (B + 1).
McResult pvalue_mc(const simgraph::Graph& g, const simgraph::EdgeTaxonomy& tax,
                   const std::vector<double>& e, const std::vector<double>& sd,
                   moments::Window w, double z_obs_max, int B,
                   std::uint64_t seed, int workers);

// Smallest b in [1, 8] with p(b) = alpha, found by bisection on a monotone
// decreasing p(b); stops when |p - alpha| <= 1e-5 (or the bracket collapses).
// Throws ComputeError if the root is outside [1, 8].
double critical_value(const std::function<double(double)>& pvalue_of_b,
                      double alpha);

// Upper-tail critical value of a Monte Carlo max-statistic sample: the
// ceil((1-alpha)(B+1))-th order statistic (capped at the sample maximum).
double mc_critical_value(std::vector<double> max_samples, double alpha);

// Draws B null max-Z samples under CBP (shared analytic curves), for MC
// critical values. Deterministic for fixed (seed, workers).
std::vector<double> mc_max_samples(const simgraph::Graph& g,
                                   const simgraph::EdgeTaxonomy& tax,
                                   const std::vector<double>& e,
                                   const std::vector<double>& sd,
                                   moments::Window w, int B, std::uint64_t seed,
                                   int workers);

}  // namespace cbpscan::pvalue
