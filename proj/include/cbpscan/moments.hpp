#pragma once

#include <vector>

#include "cbpscan/simgraph.hpp"

namespace cbpscan::moments {

// Inclusive scan range for t. The default trims 5% of the (augmented) length
// from each side, clamped into [1, n-1].
struct Window {
  int lo = 1;
  int hi = 1;
};

Window default_window(int n);

// Coefficients of the variance/covariance kernel under the block-permutation
// null. c0 is the expected number of block-straddling edges per unit p1;
// c1/c2/c3 weight the two-, three- and four-block configurations of edge
// pairs, averaged over the L blockings. c1 + c2 + c3 >= c0^2 always, with
// equality when the straddling-edge count is the same under every blocking.
struct Coefficients {
  double c0 = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
};

// Exact null expectation of the straddle count at every t = 0..n.
std::vector<double> expectation_curve(const simgraph::EdgeTaxonomy& tax);

// Exact kernel coefficients. Shared-node pairs are enumerated per node;
// disjoint pairs with any cross distance < L are enumerated through a
// circular window index, and the fully separated remainder is aggregated in
// closed form, so cost is driven by locally close pairs only.
Coefficients variance_coefficients(const simgraph::Graph& g,
                                   const simgraph::EdgeTaxonomy& tax);

// Exact null variance at block-aligned cuts t = a*L, a = 0..m. Requires
// m >= 4 (the four-block configuration probability needs m-2 and m-3 in the
// denominator).
std::vector<double> variance_grid(const Coefficients& coef,
                                  const simgraph::EdgeTaxonomy& tax);

// Standard deviation at every t: exact sqrt(variance) at the grid knots,
// linear interpolation of the SD between adjacent knots.
std::vector<double> sd_curve(const std::vector<double>& var_grid,
                             const simgraph::EdgeTaxonomy& tax);

// Exact null covariance of the straddle counts at cuts a1*L and a2*L.
// Requires 0 <= a1 <= a2 <= m and m >= 4.
double covariance_grid(const Coefficients& coef, int m, int a1, int a2);

// Standardized scan curve, sign-flipped so that a deficit of straddling
// edges (the change-point signature) gives a large positive value:
// z[t] = (e[t] - r_obs[t]) / sd[t]. Entries outside the window are NaN.
// Throws if sd vanishes anywhere inside the window.
std::vector<double> z_curve(const std::vector<int>& r_obs,
                            const std::vector<double>& e,
                            const std::vector<double>& sd, Window w);

// Straddle probabilities for one edge pair by block configuration:
//   p1 - the two relevant blocks fall on opposite sides of cut a;
//   p2 - three distinct blocks, the lone block opposite the other two;
//   p3 - four distinct blocks, both pairs split across the cut;
// and their two-cut generalizations q1/q2/q3 for cuts a1 <= a2 (q*(a,a)
// reduces to p*(a) exactly). Numerators are tested before dividing so grid
// points where a configuration cannot occur evaluate to 0 instead of 0/0.
double p1(double a, double m);
double p2(double a, double m);
double p3(double a, double m);
double q1(double a1, double a2, double m);
double q2(double a1, double a2, double m);
double q3(double a1, double a2, double m);

// Var(R(aL)) and Cov(R(a1 L), R(a2 L)) from the coefficients; no m >= 4
// check (callers that expose these publicly perform it). variance is defined
// as covariance at (a, a) so the two agree bitwise.
double covariance_from_coefficients(const Coefficients& coef, double m, double a1,
                                    double a2);
double variance_from_coefficients(const Coefficients& coef, double m, double a);

}  // namespace cbpscan::moments
