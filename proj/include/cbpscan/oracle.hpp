#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "cbpscan/moments.hpp"
#include "cbpscan/simgraph.hpp"

// Independent cross-checks for the analytic moment formulas. Everything here
// recomputes from definitions: straddle counts are tallied edge by edge per
// enumerated assignment, and the c-coefficients are tallied pair by pair per
// blocking. None of it shares code with the closed forms in moments.cpp, so
// agreement is evidence rather than tautology.

namespace cbpscan::oracle {

struct EnumeratedMoments {
  int n = 0;
  int L = 1;
  int m = 0;
  std::vector<double> e;                  // e[t], t = 0..n
  std::vector<double> var;                // var[a], a = 0..m (cut at t = a*L)
  std::vector<std::vector<double>> cov;   // cov[a1][a2] for 0 <= a1 <= a2 <= m
};

// Full enumeration over all L * m! assignments. Throws ComputeError when that
// count exceeds the budget.
EnumeratedMoments enumerate_moments(const simgraph::Graph& g, int L,
                                    std::uint64_t budget = 10'000'000);

// c0..c3 by direct classification: for each blocking offset, count ordered
// edge pairs by how many distinct blocks their endpoints occupy.
moments::Coefficients counting_coefficients(const simgraph::Graph& g, int L);

// Structural coverage of the variance case analysis, counted over unordered
// edge pairs:
//   shared_within[j]   pairs sharing one endpoint where j of the 3 pairwise
//                      circular node distances are below L (j = 0..3)
//   disjoint_within[j] pairs with 4 distinct endpoints where j of the 6
//                      pairwise circular node distances are below L (j = 0..6)
struct PairCoverage {
  std::array<long long, 4> shared_within{};
  std::array<long long, 7> disjoint_within{};
};
PairCoverage pair_coverage(const simgraph::Graph& g, int L);

struct SuiteConfig {
  int instances = 200;
  std::uint64_t seed = 20250819;
  std::vector<int> sizes = {4, 6, 8};  // node counts drawn per random instance
  std::vector<int> l_set = {1, 2, 3};  // block lengths drawn per random instance
  bool branch_extras = true;  // fixed instances that complete the coverage table
  int workers = 1;
  double corrupt_c1 = 0.0;  // negative control: relative nudge applied to c1
};

struct SuiteReport {
  int instances_run = 0;
  long long checks = 0;
  // Worst discrepancies, scaled by max(1, |analytic|, |oracle|).
  double max_err_e = 0.0;
  double max_err_var = 0.0;
  double max_err_cov = 0.0;
  double max_err_coef = 0.0;
  PairCoverage coverage;
  bool coverage_ok = false;
  bool pass = false;
  std::string first_failure;  // empty when pass
};

// Seeded random instances (small n, L, assorted graph shapes) checked against
// both oracles, plus fixed extras that complete the coverage table. Tolerance
// is 1e-10 relative; the arithmetic on both sides is exact in doubles at
// these sizes, so any real defect lands far outside it.
SuiteReport run_suite(const SuiteConfig& cfg);

std::string format_report(const SuiteReport& r);

}  // namespace cbpscan::oracle
