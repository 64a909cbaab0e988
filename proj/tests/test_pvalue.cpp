#include <cmath>
#include <limits>
#include <vector>

#include <doctest.h>

#include "cbpscan/common.hpp"
#include "cbpscan/moments.hpp"
#include "cbpscan/pvalue.hpp"
#include "cbpscan/simgraph.hpp"
#include "test_util.hpp"

using cbpscan::ComputeError;
using cbpscan::InputError;
namespace moments = cbpscan::moments;
namespace pvalue = cbpscan::pvalue;
namespace simgraph = cbpscan::simgraph;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

simgraph::Graph path_graph(int n) {
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i + 1 < n; ++i) pairs.emplace_back(i, i + 1);
  return simgraph::graph_from_edges(n, pairs);
}

struct Prepared {
  simgraph::Graph g;
  simgraph::EdgeTaxonomy tax;
  moments::Coefficients coef;
  std::vector<double> e;
  std::vector<double> sd;
  moments::Window w;
};

Prepared prepare(int n, int L) {
  Prepared p{path_graph(n), {}, {}, {}, {}, {}};
  p.tax = simgraph::classify_edges(p.g, L);
  p.coef = moments::variance_coefficients(p.g, p.tax);
  p.e = moments::expectation_curve(p.tax);
  p.sd = moments::sd_curve(moments::variance_grid(p.coef, p.tax), p.tax);
  p.w = moments::default_window(p.tax.n);
  return p;
}

}  // namespace

TEST_CASE("nu matches its defining formula and limits") {
  CHECK(pvalue::nu(0.0) == 1.0);
  CHECK(pvalue::nu(1e-12) == 1.0);
  CHECK(pvalue::nu(2.0) == doctest::Approx(0.3151).epsilon(1e-3));
  // Decreasing on the positive axis.
  CHECK(pvalue::nu(0.5) > pvalue::nu(1.0));
  CHECK(pvalue::nu(1.0) > pvalue::nu(2.0));
  CHECK(pvalue::nu(2.0) > pvalue::nu(4.0));
  CHECK_THROWS_AS(pvalue::nu(-0.1), ComputeError);
  CHECK_THROWS_AS(pvalue::nu(kNaN), ComputeError);
}

TEST_CASE("c_of_t is positive in the window interior and guards small m") {
  const auto p = prepare(40, 2);
  for (const double t : {10.0, 20.0, 30.0}) {
    CHECK(pvalue::c_of_t(p.coef, p.tax.n, p.tax.L, t) > 0.0);
  }
  const auto tiny = path_graph(6);
  const auto tax = simgraph::classify_edges(tiny, 2);
  const auto coef = moments::variance_coefficients(tiny, tax);
  CHECK_THROWS_AS(pvalue::c_of_t(coef, 6, 2, 3.0), ComputeError);
}

TEST_CASE("first tail approximation is monotone in the level and clamped") {
  const auto p = prepare(60, 2);
  const double p2 = pvalue::pvalue_a1(2.0, p.coef, p.tax.n, p.tax.L, p.w);
  const double p3 = pvalue::pvalue_a1(3.0, p.coef, p.tax.n, p.tax.L, p.w);
  const double p4 = pvalue::pvalue_a1(4.0, p.coef, p.tax.n, p.tax.L, p.w);
  CHECK(p2 >= p3);
  CHECK(p3 >= p4);
  CHECK(p2 <= 1.0);
  CHECK(p4 > 0.0);
  CHECK(p4 < 0.01);
  CHECK(pvalue::pvalue_a1(0.0, p.coef, p.tax.n, p.tax.L, p.w) == 1.0);
  CHECK(pvalue::pvalue_a1(-3.0, p.coef, p.tax.n, p.tax.L, p.w) == 1.0);
  // Levels where the raw sum exceeds one clamp instead of overflowing.
  CHECK(pvalue::pvalue_a1(1.0, p.coef, p.tax.n, p.tax.L, p.w) <= 1.0);
}

TEST_CASE("zero skewness reproduces the first approximation exactly") {
  const auto p = prepare(60, 2);
  const std::vector<double> zero(static_cast<std::size_t>(p.tax.n) + 1, 0.0);
  for (const double b : {1.5, 2.0, 2.5, 3.0, 4.0}) {
    const double a1 = pvalue::pvalue_a1(b, p.coef, p.tax.n, p.tax.L, p.w);
    const auto a2 = pvalue::pvalue_a2(b, p.coef, p.tax.n, p.tax.L, p.w, zero);
    CHECK(a2.p == a1);  // bitwise, not merely close
    CHECK(a2.skipped_t.empty());
  }
}

TEST_CASE("undefined skewness terms are skipped and reported") {
  const auto p = prepare(60, 2);
  std::vector<double> gamma(static_cast<std::size_t>(p.tax.n) + 1, 0.0);
  gamma[15] = kNaN;
  gamma[20] = -10.0;  // 1 + 2*b*gamma < 0 for b >= 0.05
  const auto a2 = pvalue::pvalue_a2(3.0, p.coef, p.tax.n, p.tax.L, p.w, gamma);
  CHECK(std::isfinite(a2.p));
  REQUIRE(a2.skipped_t.size() == 2);
  CHECK(a2.skipped_t[0] == 15);
  CHECK(a2.skipped_t[1] == 20);
  // A mild negative skewness thins the tail relative to the symmetric case.
  std::vector<double> mild(static_cast<std::size_t>(p.tax.n) + 1, -0.05);
  const auto corrected = pvalue::pvalue_a2(3.0, p.coef, p.tax.n, p.tax.L, p.w, mild);
  CHECK(corrected.skipped_t.empty());
  CHECK(corrected.p < pvalue::pvalue_a1(3.0, p.coef, p.tax.n, p.tax.L, p.w));
}

TEST_CASE("skewness_curve is deterministic and respects the window") {
  const auto g = path_graph(24);
  const moments::Window w{2, 22};
  const auto gamma = pvalue::skewness_curve(g, w, 1000, 3, 1);
  REQUIRE(gamma.size() >= 23);
  CHECK(std::isnan(gamma[0]));
  CHECK(std::isnan(gamma[1]));
  for (int t = 2; t <= 22; ++t) {
    CHECK(std::isfinite(gamma[static_cast<std::size_t>(t)]));
  }
  const auto again = pvalue::skewness_curve(g, w, 1000, 3, 1);
  CHECK(testutil::bitwise_equal(gamma, again));
  CHECK_THROWS_AS(pvalue::skewness_curve(g, w, 999, 3, 1), InputError);
  // Two workers give a different but equally valid deterministic estimate.
  const auto two = pvalue::skewness_curve(g, w, 1000, 3, 2);
  const auto two_again = pvalue::skewness_curve(g, w, 1000, 3, 2);
  CHECK(testutil::bitwise_equal(two, two_again));
  for (int t = 2; t <= 22; ++t) {
    // Same curve up to Monte Carlo noise.
    CHECK(std::abs(two[static_cast<std::size_t>(t)] -
                   gamma[static_cast<std::size_t>(t)]) < 1.0);
  }
}

TEST_CASE("Monte Carlo p-value uses the add-one estimator") {
  const auto p = prepare(20, 2);
  const int B = 199;
  const auto lo = pvalue::pvalue_mc(p.g, p.tax, p.e, p.sd, p.w, -kInf, B, 11, 1);
  CHECK(lo.p == 1.0);
  CHECK(lo.count_geq == B);
  const auto hi = pvalue::pvalue_mc(p.g, p.tax, p.e, p.sd, p.w, kInf, B, 11, 1);
  CHECK(hi.count_geq == 0);
  CHECK(hi.p == doctest::Approx(1.0 / (B + 1)));
  // Typical observed values give a p strictly inside (0, 1].
  const auto mid = pvalue::pvalue_mc(p.g, p.tax, p.e, p.sd, p.w, 1.5, B, 11, 1);
  CHECK(mid.p > 0.0);
  CHECK(mid.p <= 1.0);
  CHECK(mid.count_geq + 1 ==
        static_cast<long long>(std::llround(mid.p * (B + 1))));
}

TEST_CASE("Monte Carlo sampling is deterministic per seed and worker count") {
  const auto p = prepare(30, 3);
  const auto s1 = pvalue::mc_max_samples(p.g, p.tax, p.e, p.sd, p.w, 64, 17, 1);
  const auto s2 = pvalue::mc_max_samples(p.g, p.tax, p.e, p.sd, p.w, 64, 17, 1);
  CHECK(s1 == s2);
  REQUIRE(s1.size() == 64);
  for (const double v : s1) CHECK(std::isfinite(v));
  const auto w1 = pvalue::mc_max_samples(p.g, p.tax, p.e, p.sd, p.w, 64, 17, 4);
  const auto w2 = pvalue::mc_max_samples(p.g, p.tax, p.e, p.sd, p.w, 64, 17, 4);
  CHECK(w1 == w2);
  CHECK_THROWS_AS(pvalue::mc_max_samples(p.g, p.tax, p.e, p.sd, p.w, 0, 17, 1),
                  InputError);
}

TEST_CASE("Monte Carlo sampling rejects vanishing variance in the window") {
  const auto p = prepare(20, 2);
  auto sd = p.sd;
  sd[10] = 0.0;
  CHECK_THROWS_AS(
      pvalue::mc_max_samples(p.g, p.tax, p.e, sd, p.w, 16, 1, 1),
      ComputeError);
}

TEST_CASE("critical_value inverts a monotone p-value curve") {
  const auto inverse_linear = [](double b) { return 0.2 / b; };
  const double b_star = pvalue::critical_value(inverse_linear, 0.05);
  CHECK(b_star == doctest::Approx(4.0).epsilon(1e-3));
  CHECK(std::abs(inverse_linear(b_star) - 0.05) <= 1e-5);
  CHECK_THROWS_AS(pvalue::critical_value(inverse_linear, 0.0), InputError);
  CHECK_THROWS_AS(pvalue::critical_value(inverse_linear, 0.5), InputError);
  const auto always_one = [](double) { return 1.0; };
  CHECK_THROWS_WITH_AS(pvalue::critical_value(always_one, 0.05),
                       doctest::Contains("[1, 8]"), ComputeError);
  const auto always_tiny = [](double) { return 1e-9; };
  CHECK_THROWS_AS(pvalue::critical_value(always_tiny, 0.05), ComputeError);
}

TEST_CASE("mc_critical_value picks the upper order statistic") {
  std::vector<double> sample;
  for (int i = 100; i >= 1; --i) sample.push_back(static_cast<double>(i));
  CHECK(pvalue::mc_critical_value(sample, 0.05) == 96.0);
  CHECK(pvalue::mc_critical_value(sample, 0.5) == 51.0);
  // Levels finer than the sample resolution cap at the maximum.
  CHECK(pvalue::mc_critical_value(sample, 0.001) == 100.0);
  CHECK_THROWS_AS(pvalue::mc_critical_value({}, 0.05), InputError);
  CHECK_THROWS_AS(pvalue::mc_critical_value(sample, 0.0), InputError);
  CHECK_THROWS_AS(pvalue::mc_critical_value(sample, 1.0), InputError);
}
