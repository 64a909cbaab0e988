#include <cmath>
#include <limits>
#include <vector>

#include <doctest.h>

#include "cbpscan/common.hpp"
#include "cbpscan/moments.hpp"
#include "cbpscan/oracle.hpp"
#include "cbpscan/rng.hpp"
#include "cbpscan/simgraph.hpp"

using cbpscan::ComputeError;
namespace moments = cbpscan::moments;
namespace oracle = cbpscan::oracle;
namespace simgraph = cbpscan::simgraph;

namespace {

double scaled_gap(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

simgraph::Graph random_graph(int n, int edge_target, std::uint64_t seed) {
  cbpscan::rng::Stream rng(seed);
  std::vector<std::pair<int, int>> all;
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) all.emplace_back(u, v);
  }
  rng.shuffle(all);
  all.resize(static_cast<std::size_t>(std::min<int>(edge_target, static_cast<int>(all.size()))));
  return simgraph::graph_from_edges(n, all);
}

}  // namespace

TEST_CASE("default_window trims one twentieth from each side") {
  const auto w200 = moments::default_window(200);
  CHECK(w200.lo == 10);
  CHECK(w200.hi == 190);
  const auto w20 = moments::default_window(20);
  CHECK(w20.lo == 1);
  CHECK(w20.hi == 19);
  const auto w100 = moments::default_window(100);
  CHECK(w100.lo == 5);
  CHECK(w100.hi == 95);
}

TEST_CASE("expectation and variance match full enumeration on small instances") {
  struct Case {
    int n;
    int L;
    std::vector<std::pair<int, int>> edges;
  };
  const std::vector<Case> cases = {
      {6, 2, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}}},  // path, m=3
      {8, 2, {{0, 1}, {0, 7}, {2, 5}, {3, 4}}},          // wraparound, m=4
      {6, 3, {{0, 5}, {1, 2}, {2, 4}}},                  // m=2
      {8, 1, {{0, 3}, {1, 2}, {4, 7}, {5, 6}, {0, 4}}},  // full permutation
      {7, 3, {{0, 6}, {1, 2}, {3, 4}}},                  // augmented, m=3
  };
  for (const auto& c : cases) {
    CAPTURE(c.n);
    CAPTURE(c.L);
    const auto g = simgraph::graph_from_edges(c.n, c.edges);
    const auto tax = simgraph::classify_edges(g, c.L);
    const auto enumerated = oracle::enumerate_moments(g, c.L);
    const auto e = moments::expectation_curve(tax);
    REQUIRE(e.size() == enumerated.e.size());
    for (std::size_t t = 0; t < e.size(); ++t) {
      CHECK(scaled_gap(e[t], enumerated.e[t]) < 1e-10);
    }
    const auto coef = moments::variance_coefficients(g, tax);
    const double m = static_cast<double>(tax.m);
    for (int a1 = 0; a1 <= tax.m; ++a1) {
      for (int a2 = a1; a2 <= tax.m; ++a2) {
        const double got = moments::covariance_from_coefficients(
            coef, m, static_cast<double>(a1), static_cast<double>(a2));
        const double want = enumerated.cov[static_cast<std::size_t>(a1)]
                                          [static_cast<std::size_t>(a2)];
        CHECK(scaled_gap(got, want) < 1e-10);
      }
    }
  }
}

TEST_CASE("block length 1 coefficients have closed forms") {
  for (const std::uint64_t seed : {1ULL, 2ULL, 3ULL, 4ULL}) {
    const auto g = random_graph(10, 8, seed);
    const auto tax = simgraph::classify_edges(g, 1);
    const auto coef = moments::variance_coefficients(g, tax);
    const double n_edges = static_cast<double>(g.edges.size());
    std::vector<int> degree(static_cast<std::size_t>(g.n_nodes), 0);
    for (const auto& e : g.edges) {
      ++degree[static_cast<std::size_t>(e.u)];
      ++degree[static_cast<std::size_t>(e.v)];
    }
    double sum_deg_sq = 0.0;
    for (const int d : degree) sum_deg_sq += static_cast<double>(d) * d;
    CHECK(coef.c0 == n_edges);
    CHECK(coef.c1 == n_edges);
    CHECK(coef.c2 == sum_deg_sq - 2.0 * n_edges);
    CHECK(coef.c3 == n_edges * n_edges + n_edges - sum_deg_sq);
    // The kernel identity is exact equality at block length 1.
    CHECK(coef.c1 + coef.c2 + coef.c3 == coef.c0 * coef.c0);
  }
}

TEST_CASE("kernel inequality c1 + c2 + c3 >= c0^2 for longer blocks") {
  const auto g = random_graph(30, 29, 77);
  for (const int L : {2, 3, 5}) {
    const auto tax = simgraph::classify_edges(g, L);
    const auto coef = moments::variance_coefficients(g, tax);
    CHECK(coef.c1 + coef.c2 + coef.c3 >= coef.c0 * coef.c0 - 1e-9);
  }
}

TEST_CASE("two-cut probabilities reduce to one-cut probabilities on the diagonal") {
  for (const int mi : {4, 5, 7, 12}) {
    const double m = static_cast<double>(mi);
    for (int a = 0; a <= mi; ++a) {
      const double ad = static_cast<double>(a);
      CHECK(moments::q1(ad, ad, m) == moments::p1(ad, m));
      CHECK(moments::q2(ad, ad, m) == moments::p2(ad, m));
      CHECK(moments::q3(ad, ad, m) == moments::p3(ad, m));
    }
  }
}

TEST_CASE("probability helpers are zero outside their support") {
  CHECK(moments::p1(0.0, 6.0) == 0.0);
  CHECK(moments::p1(6.0, 6.0) == 0.0);
  CHECK(moments::p3(1.0, 6.0) == 0.0);  // needs two blocks on each side
  CHECK(moments::p3(5.0, 6.0) == 0.0);
  // m=3: four distinct blocks cannot occur; the numerator guard avoids 0/0.
  CHECK(moments::q3(1.0, 2.0, 3.0) == 0.0);
  CHECK(moments::q2(1.0, 1.0, 2.0) == 0.0);
}

TEST_CASE("variance and covariance symmetry under cut reflection") {
  const auto g = random_graph(24, 20, 5);
  const auto tax = simgraph::classify_edges(g, 3);
  const auto coef = moments::variance_coefficients(g, tax);
  const double m = static_cast<double>(tax.m);
  for (int a = 0; a <= tax.m; ++a) {
    const double left = moments::variance_from_coefficients(coef, m, a);
    const double right = moments::variance_from_coefficients(coef, m, tax.m - a);
    CHECK(scaled_gap(left, right) < 1e-13);
  }
  for (int a1 = 0; a1 <= tax.m; ++a1) {
    for (int a2 = a1; a2 <= tax.m; ++a2) {
      const double left = moments::covariance_from_coefficients(coef, m, a1, a2);
      const double right =
          moments::covariance_from_coefficients(coef, m, tax.m - a2, tax.m - a1);
      CHECK(scaled_gap(left, right) < 1e-13);
    }
  }
}

TEST_CASE("variance_grid requires at least four blocks") {
  const auto g = simgraph::graph_from_edges(6, {{0, 1}, {2, 3}, {4, 5}});
  const auto tax = simgraph::classify_edges(g, 2);  // m = 3
  const auto coef = moments::variance_coefficients(g, tax);
  CHECK_THROWS_AS(moments::variance_grid(coef, tax), ComputeError);
  CHECK_THROWS_AS(moments::covariance_grid(coef, 3, 0, 1), ComputeError);
  // The raw formula still evaluates at m=3 and matches enumeration there.
  const auto enumerated = oracle::enumerate_moments(g, 2);
  for (int a = 0; a <= 3; ++a) {
    const double got = moments::variance_from_coefficients(coef, 3.0, a);
    CHECK(scaled_gap(got, enumerated.var[static_cast<std::size_t>(a)]) < 1e-10);
  }
}

TEST_CASE("sd_curve is exact at knots and linear between them") {
  const auto g = random_graph(20, 18, 9);
  const auto tax = simgraph::classify_edges(g, 5);  // m = 4
  const auto coef = moments::variance_coefficients(g, tax);
  const auto var = moments::variance_grid(coef, tax);
  const auto sd = moments::sd_curve(var, tax);
  REQUIRE(sd.size() == 21);
  for (int a = 0; a <= tax.m; ++a) {
    CHECK(sd[static_cast<std::size_t>(a * tax.L)] ==
          std::sqrt(std::max(0.0, var[static_cast<std::size_t>(a)])));
  }
  // Interior points interpolate the adjacent knots linearly.
  const double k1 = std::sqrt(var[1]);
  const double k2 = std::sqrt(var[2]);
  CHECK(sd[7] == doctest::Approx(k1 + (k2 - k1) * 2.0 / 5.0).epsilon(1e-14));
  CHECK(sd[9] == doctest::Approx(k1 + (k2 - k1) * 4.0 / 5.0).epsilon(1e-14));
}

TEST_CASE("z_curve standardizes inside the window and NaNs outside") {
  const std::vector<int> r = {0, 3, 2, 1, 2, 0};
  const std::vector<double> e = {0.0, 2.0, 3.0, 3.0, 2.0, 0.0};
  const std::vector<double> sd = {0.0, 1.0, 2.0, 2.0, 1.0, 0.0};
  const auto z = moments::z_curve(r, e, sd, {1, 4});
  CHECK(std::isnan(z[0]));
  CHECK(std::isnan(z[5]));
  CHECK(z[1] == doctest::Approx(-1.0));   // excess straddles give negative z
  CHECK(z[2] == doctest::Approx(0.5));
  CHECK(z[3] == doctest::Approx(1.0));    // deficit gives positive z
  CHECK(z[4] == doctest::Approx(0.0));
  CHECK_THROWS_WITH_AS(moments::z_curve(r, e, sd, {0, 4}),
                       doctest::Contains("window"), ComputeError);
  const std::vector<double> sd_zero = {0.0, 1.0, 0.0, 2.0, 1.0, 0.0};
  CHECK_THROWS_WITH_AS(moments::z_curve(r, e, sd_zero, {1, 4}),
                       doctest::Contains("vanishing"), ComputeError);
}

TEST_CASE("expectation curve is exact for one edge at block length 1") {
  // A single edge under full permutation straddles t with probability
  // 2t(n-t)/(n(n-1)).
  const auto g = simgraph::graph_from_edges(6, {{1, 4}});
  const auto tax = simgraph::classify_edges(g, 1);
  const auto e = moments::expectation_curve(tax);
  for (int t = 0; t <= 6; ++t) {
    const double want = 2.0 * t * (6 - t) / (6.0 * 5.0);
    CHECK(e[static_cast<std::size_t>(t)] == doctest::Approx(want).epsilon(1e-14));
  }
}
