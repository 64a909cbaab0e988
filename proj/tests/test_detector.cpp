#include <cmath>
#include <utility>
#include <vector>

#include <doctest.h>

#include "cbpscan/common.hpp"
#include "cbpscan/detector.hpp"
#include "cbpscan/seqdata.hpp"
#include "cbpscan/simgraph.hpp"
#include "test_util.hpp"

using cbpscan::InputError;
namespace detector = cbpscan::detector;
namespace moments = cbpscan::moments;
namespace seqdata = cbpscan::seqdata;
namespace simgraph = cbpscan::simgraph;

namespace {

// Twenty 2-d points: the first ten cluster near (0,0), the last ten near
// (2,2), so a change is planted at position 10.
seqdata::Sequence clustered_points() {
  seqdata::Sequence seq;
  seq.n = 20;
  seq.dim = 2;
  seq.values = {
      0.50,  -0.14, -0.23, 0.65,  0.77,  -0.47, 1.58, -0.47, -0.23, -0.23,
      0.54,  -0.46, 0.24,  -1.91, -0.56, -1.01, 0.31, -0.90, -1.41, 1.47,
      1.34,  1.82,  2.57,  2.77,  1.09,  1.95,  2.51, 3.16,  2.81,  1.47,
      1.62,  2.36,  3.08,  2.49,  2.42,  1.26,  3.36, 2.86,  1.75,  3.32,
  };
  return seq;
}

simgraph::Graph clustered_mst() {
  const auto seq = clustered_points();
  const auto dist = seqdata::pairwise_distances(seq, seqdata::Metric::kEuclidean);
  return simgraph::build_mst(dist);
}

}  // namespace

TEST_CASE("detect finds the planted change between the two clusters") {
  const auto g = clustered_mst();
  detector::Options opt;
  opt.L = 1;
  opt.mc_b = 199;
  opt.seed = 7;
  const auto res = detector::detect(g, opt);
  CHECK(res.n_raw == 20);
  CHECK(res.n == 20);
  CHECK(res.m == 20);
  CHECK(res.x_aug == 0);
  CHECK(res.window.lo == 1);
  CHECK(res.window.hi == 19);
  CHECK(res.t_hat >= 8);
  CHECK(res.t_hat <= 12);
  CHECK(res.z_max > 2.0);
  CHECK(res.p_a1 > 0.0);
  CHECK(res.p_a1 < 1.0);
  CHECK(res.p_a2 > 0.0);
  CHECK(res.p_a2 < 1.0);
  CHECK(res.p_mc > 0.0);
  CHECK(res.p_mc <= 1.0);
  CHECK(res.mc_b == 199);
  CHECK(res.mc_count >= 0);
  REQUIRE(res.z.size() == 21);
  CHECK(std::isnan(res.z[0]));
  CHECK(res.z[static_cast<std::size_t>(res.t_hat)] == res.z_max);
  REQUIRE(res.gamma.size() >= 20);
  for (int t = res.window.lo; t <= res.window.hi; ++t) {
    CHECK(std::isfinite(res.gamma[static_cast<std::size_t>(t)]));
  }
}

TEST_CASE("detect is reproducible for a fixed seed") {
  const auto g = clustered_mst();
  detector::Options opt;
  opt.L = 2;
  opt.mc_b = 99;
  opt.seed = 42;
  const auto a = detector::detect(g, opt);
  const auto b = detector::detect(g, opt);
  CHECK(a.t_hat == b.t_hat);
  CHECK(a.z_max == b.z_max);
  CHECK(a.p_a1 == b.p_a1);
  CHECK(a.p_a2 == b.p_a2);
  CHECK(a.p_mc == b.p_mc);
  CHECK(testutil::bitwise_equal(a.gamma, b.gamma));
  CHECK(testutil::bitwise_equal(a.z, b.z));
}

TEST_CASE("detect validates its inputs") {
  const auto small = simgraph::graph_from_edges(10, {{0, 1}});
  detector::Options opt;
  CHECK_THROWS_WITH_AS(detector::detect(small, opt),
                       doctest::Contains("at least 20"), InputError);
  const auto g = clustered_mst();
  opt.L = 0;
  CHECK_THROWS_AS(detector::detect(g, opt), InputError);
  opt.L = 1;
  opt.window = moments::Window{0, 19};
  CHECK_THROWS_AS(detector::detect(g, opt), InputError);
  opt.window = moments::Window{1, 20};
  CHECK_THROWS_AS(detector::detect(g, opt), InputError);
  opt.window = moments::Window{15, 5};
  CHECK_THROWS_AS(detector::detect(g, opt), InputError);
}

TEST_CASE("detect honors an explicit window") {
  const auto g = clustered_mst();
  detector::Options opt;
  opt.window = moments::Window{5, 15};
  opt.with_a1 = false;
  opt.with_a2 = false;
  const auto res = detector::detect(g, opt);
  CHECK(res.window.lo == 5);
  CHECK(res.window.hi == 15);
  CHECK(std::isnan(res.z[4]));
  CHECK(std::isnan(res.z[16]));
  CHECK(res.t_hat >= 5);
  CHECK(res.t_hat <= 15);
  CHECK(std::isnan(res.p_a1));
  CHECK(std::isnan(res.p_a2));
  CHECK(std::isnan(res.p_mc));
}

TEST_CASE("exact ties resolve to the smallest t") {
  // A single edge between positions 4 and 15 gives a scan curve with a
  // bitwise-exact tie between t = 4 and t = 16 under full permutation.
  const auto g = simgraph::graph_from_edges(20, {{4, 15}});
  detector::Options opt;
  opt.with_a1 = false;
  opt.with_a2 = false;
  const auto res = detector::detect(g, opt);
  CHECK(res.z[4] == res.z[16]);
  CHECK(res.z_max == res.z[4]);
  CHECK(res.t_hat == 4);
}

TEST_CASE("reversing the sequence reflects the located change") {
  const auto g = clustered_mst();
  std::vector<std::pair<int, int>> reversed;
  for (const auto& e : g.edges) {
    reversed.emplace_back(19 - e.v, 19 - e.u);
  }
  const auto g_rev = simgraph::graph_from_edges(20, reversed);
  detector::Options opt;
  opt.with_a2 = false;
  const auto fwd = detector::detect(g, opt);
  const auto rev = detector::detect(g_rev, opt);
  CHECK(rev.t_hat == 20 - fwd.t_hat);
  CHECK(rev.z_max == fwd.z_max);
  CHECK(rev.p_a1 == fwd.p_a1);
}

TEST_CASE("select_L evaluates candidates and reports the stabilization trace") {
  const auto g = clustered_mst();
  const auto sel = detector::select_L(g, {1, 2, 3, 4});
  REQUIRE(sel.candidates.size() == 4);
  CHECK(sel.candidates == std::vector<int>{1, 2, 3, 4});
  CHECK(sel.skipped.empty());
  REQUIRE(sel.z_max.size() == 4);
  REQUIRE(sel.ratio.size() == 4);
  CHECK(std::isnan(sel.ratio[0]));
  for (std::size_t k = 1; k < 4; ++k) {
    CHECK(sel.ratio[k] == doctest::Approx(sel.z_max[k] / sel.z_max[k - 1]));
  }
  CHECK(sel.threshold == 0.99);
  bool chosen_listed = false;
  for (const int c : sel.candidates) chosen_listed |= (c == sel.chosen_L);
  CHECK(chosen_listed);
  if (!sel.fallback) {
    // The chosen candidate is the first whose incoming ratio stabilized.
    std::size_t idx = 0;
    while (sel.candidates[idx] != sel.chosen_L) ++idx;
    CHECK(sel.ratio[idx] >= sel.threshold);
    for (std::size_t k = 1; k < idx; ++k) CHECK(sel.ratio[k] < sel.threshold);
  }
}

TEST_CASE("select_L skips candidates with too few blocks") {
  const auto g = clustered_mst();
  // L=7 pads 20 to 21 and leaves only 3 blocks; with one usable candidate
  // left the selection cannot compare anything.
  CHECK_THROWS_WITH_AS(detector::select_L(g, {1, 7}),
                       doctest::Contains("two usable"), InputError);
  const auto sel = detector::select_L(g, {2, 5, 7});
  CHECK(sel.candidates == std::vector<int>{2, 5});
  CHECK(sel.skipped == std::vector<int>{7});
  CHECK_THROWS_AS(detector::select_L(g, {0, 2, 3}), InputError);
}
