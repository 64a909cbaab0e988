#include "cbpscan/moments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "cbpscan/common.hpp"

namespace cbpscan::moments {

namespace {

long long positive_part(long long x) { return x > 0 ? x : 0; }

// Co-block counting on the circle of n positions under the L blockings.
// A blocking with offset omega starts blocks at positions congruent to omega
// (mod L); a set of positions is co-blocked when one block contains it.
struct BlockCalc {
  int n = 0;
  int L = 1;

  int circ(int p, int q) const {
    const int d = p > q ? p - q : q - p;
    return std::min(d, n - d);
  }

  // Short arc of a pair: step length delta and 0-based start. Unique whenever
  // delta < L <= n/2; ties (delta == n/2) take the smaller endpoint.
  void arc(int p, int q, int* delta, int* start) const {
    const int u = std::min(p, q);
    const int v = std::max(p, q);
    const int forward = v - u;
    if (forward <= n - forward) {
      *delta = forward;
      *start = u;
    } else {
      *delta = n - forward;
      *start = v;
    }
  }

  // Number of blockings with p and q in one block: a block must cover the
  // short arc, possible for L - delta of the L offsets.
  long long pair_within(int p, int q) const {
    const int d = circ(p, q);
    return d < L ? L - d : 0;
  }

  // Same for three or four positions: the covering arc spans n - maxgap
  // steps, where the gaps are the circular jumps between consecutive sorted
  // positions.
  long long triple_within(int p, int q, int r) const {
    int a[3] = {p, q, r};
    std::sort(a, a + 3);
    const int maxgap = std::max({a[1] - a[0], a[2] - a[1], a[0] + n - a[2]});
    const int span = n - maxgap;
    return span < L ? L - span : 0;
  }

  long long quad_within(int p, int q, int r, int s) const {
    int a[4] = {p, q, r, s};
    std::sort(a, a + 4);
    const int maxgap = std::max({a[1] - a[0], a[2] - a[1], a[3] - a[2], a[0] + n - a[3]});
    const int span = n - maxgap;
    return span < L ? L - span : 0;
  }

  // Overlap of the two cut-offset sets. A pair with short arc (delta, start)
  // is split by exactly the offsets {start+1, ..., start+delta} mod L, so the
  // joint count is an interval-overlap on residues.
  static long long cut_overlap(int d1, int s1, int d2, int s2, int L) {
    const int b = ((s2 - s1) % L + L) % L;
    const long long first = positive_part(std::min(d1, b + d2) - b);
    const long long second = positive_part(std::min(d1, b + d2 - L));
    return first + second;
  }

  // Number of blockings with p,q in one block AND r,s in one block
  // (inclusion-exclusion against the two cut sets).
  long long pair_pair_within(int p, int q, int r, int s) const {
    const int d1 = circ(p, q);
    const int d2 = circ(r, s);
    if (d1 >= L || d2 >= L) return 0;
    int delta1, start1, delta2, start2;
    arc(p, q, &delta1, &start1);
    arc(r, s, &delta2, &start2);
    return L - d1 - d2 + cut_overlap(delta1, start1 % L, delta2, start2 % L, L);
  }
};

// Contribution of a fully separated pair (every endpoint of one edge at
// circular distance >= L from every endpoint of the other). Only the
// four-distinct-blocks count survives there, and it collapses to:
//   both deltas >= L          -> L
//   one short delta           -> delta
//   both short                -> overlap of the two cut-offset sets
// This is also what the whole-graph aggregation below adds for every pair, so
// enumerated pairs subtract it before adding their exact counts.
long long far_value(const BlockCalc& calc, int delta_e, int start_e, int delta_f,
                    int start_f) {
  const int L = calc.L;
  const bool short_e = delta_e < L;
  const bool short_f = delta_f < L;
  if (!short_e && !short_f) return L;
  if (short_e && !short_f) return delta_e;
  if (!short_e && short_f) return delta_f;
  return BlockCalc::cut_overlap(delta_e, start_e % L, delta_f, start_f % L, L);
}

// Exact per-blocking counts for a disjoint pair (4 distinct endpoints),
// split by how many distinct blocks the endpoints occupy given that both
// edges cross a block boundary.
struct DisjointCounts {
  long long two_blocks = 0;
  long long three_blocks = 0;
  long long four_blocks = 0;
};

DisjointCounts disjoint_counts(const BlockCalc& calc, int i, int j, int u, int v) {
  const int L = calc.L;
  const long long s_ij = calc.pair_within(i, j);
  const long long s_uv = calc.pair_within(u, v);
  const long long s_iu = calc.pair_within(i, u);
  const long long s_iv = calc.pair_within(i, v);
  const long long s_ju = calc.pair_within(j, u);
  const long long s_jv = calc.pair_within(j, v);
  const long long t_iju = calc.triple_within(i, j, u);
  const long long t_ijv = calc.triple_within(i, j, v);
  const long long t_iuv = calc.triple_within(i, u, v);
  const long long t_juv = calc.triple_within(j, u, v);
  const long long quad = calc.quad_within(i, j, u, v);

  DisjointCounts out;
  // Two blocks: the edges connect the same pair of blocks, either aligned
  // (i~u, j~v) or crossed (i~v, j~u); drop all-in-one-block cases.
  out.two_blocks = calc.pair_pair_within(i, u, j, v) +
                   calc.pair_pair_within(i, v, j, u) - 2 * quad;
  // Three blocks: exactly one endpoint pair across the edges shares a block.
  // Each candidate shared pair is counted with both edges still split, then
  // the two-block configurations (which carry two shared pairs) come off.
  const long long term_iu = s_iu - t_iju - t_iuv + quad;
  const long long term_iv = s_iv - t_ijv - t_iuv + quad;
  const long long term_ju = s_ju - t_iju - t_juv + quad;
  const long long term_jv = s_jv - t_ijv - t_juv + quad;
  out.three_blocks = term_iu + term_iv + term_ju + term_jv - 2 * out.two_blocks;
  // Four blocks: whatever remains of the blockings where both edges split.
  const long long not_both_split = s_ij + s_uv - calc.pair_pair_within(i, j, u, v);
  out.four_blocks = (L - not_both_split) - out.two_blocks - out.three_blocks;
  return out;
}

}  // namespace

Window default_window(int n) {
  if (n < 2) {
    throw ComputeError("scan needs at least 2 positions");
  }
  const int trim = std::max(1, n / 20);
  Window w;
  w.lo = trim;
  w.hi = n - trim;
  if (w.hi < w.lo) {
    throw ComputeError("scan window is empty for n=" + std::to_string(n));
  }
  return w;
}

std::vector<double> expectation_curve(const simgraph::EdgeTaxonomy& tax) {
  const int n = tax.n;
  const int L = tax.L;
  const double m = static_cast<double>(tax.m);
  if (tax.m < 2) {
    throw ComputeError("expectation needs at least 2 blocks, got m=" +
                       std::to_string(tax.m));
  }
  std::vector<double> e(static_cast<std::size_t>(n) + 1, 0.0);
  for (int t = 0; t <= n; ++t) {
    const double a = static_cast<double>(t / L);
    const double b = static_cast<double>(t % L);
    double total = 0.0;
    for (int k = 1; k <= L; ++k) {
      const long long count = tax.category_count[static_cast<std::size_t>(k)];
      if (count == 0) continue;
      // Straddle probability of a category-k edge at cut t = a*L + b, split
      // by where the cut falls relative to the edge's two endpoint slots:
      // both slots beyond the cut offset, both before it, or the cut passing
      // between them (the within-block and adjacent-block boundary cases
      // share one weight).
      const double kd = static_cast<double>(k);
      const double ld = static_cast<double>(L);
      const double before = std::max(0.0, kd - b);
      const double after = std::max(0.0, b - (ld - kd));
      const double across = std::min(b, ld - kd) - std::max(0.0, b - kd);
      const double weight = before * a * (m - a) +
                            after * (a + 1.0) * (m - a - 1.0) +
                            across * (a * (m - a - 1.0) + (m - 1.0));
      total += static_cast<double>(count) * 2.0 * weight;
    }
    e[static_cast<std::size_t>(t)] =
        total / (static_cast<double>(n) * (m - 1.0));
  }
  return e;
}

Coefficients variance_coefficients(const simgraph::Graph& g,
                                   const simgraph::EdgeTaxonomy& tax) {
  const int n = tax.n;
  const int L = tax.L;
  if (tax.m < 2) {
    throw ComputeError("kernel coefficients need at least 2 blocks, got m=" +
                       std::to_string(tax.m));
  }
  const BlockCalc calc{n, L};
  const std::size_t n_edges = g.edges.size();

  long long c0_l = 0;
  for (const int d : tax.delta) c0_l += std::min(d, L);

  std::vector<std::vector<int>> incident(static_cast<std::size_t>(g.n_nodes));
  for (std::size_t e = 0; e < n_edges; ++e) {
    incident[static_cast<std::size_t>(g.edges[e].u)].push_back(static_cast<int>(e));
    incident[static_cast<std::size_t>(g.edges[e].v)].push_back(static_cast<int>(e));
  }

  long long sum_two = 0;    // pairs resolving to two distinct blocks
  long long sum_three = 0;  // three distinct blocks
  long long local_four = 0; // four distinct blocks, enumerated pairs only
  long long subtract_far = 0;

  // Pairs sharing a node: enumerate per shared endpoint.
  for (int c = 0; c < g.n_nodes; ++c) {
    const auto& inc = incident[static_cast<std::size_t>(c)];
    for (std::size_t ei = 0; ei < inc.size(); ++ei) {
      const simgraph::Edge& e = g.edges[static_cast<std::size_t>(inc[ei])];
      const int x = e.u == c ? e.v : e.u;
      for (std::size_t fj = ei + 1; fj < inc.size(); ++fj) {
        const simgraph::Edge& f = g.edges[static_cast<std::size_t>(inc[fj])];
        const int y = f.u == c ? f.v : f.u;
        const long long s_xy = calc.pair_within(x, y);
        const long long s_cx = calc.pair_within(c, x);
        const long long s_cy = calc.pair_within(c, y);
        const long long t_cxy = calc.triple_within(c, x, y);
        // Both edges split: the free endpoints either share the one other
        // block or occupy two; the shared node's block is always its own.
        sum_two += s_xy - t_cxy;
        sum_three += L - s_cx - s_cy - s_xy + 2 * t_cxy;
        subtract_far +=
            far_value(calc, tax.delta[static_cast<std::size_t>(inc[ei])],
                      tax.arc_start[static_cast<std::size_t>(inc[ei])],
                      tax.delta[static_cast<std::size_t>(inc[fj])],
                      tax.arc_start[static_cast<std::size_t>(inc[fj])]);
      }
    }
  }

  // Disjoint pairs with any cross distance < L: found through a circular
  // window around each endpoint. Pairs never found here have no co-blocked
  // cross pair under any blocking and are covered by the aggregate below.
  std::vector<int> stamp(n_edges, -1);
  for (std::size_t ei = 0; ei < n_edges; ++ei) {
    const simgraph::Edge& e = g.edges[ei];
    for (const int endpoint : {e.u, e.v}) {
      for (int shift = -(L - 1); shift <= L - 1; ++shift) {
        const int p = ((endpoint + shift) % n + n) % n;
        if (p >= g.n_nodes) continue;  // augmented slots carry no edges
        for (const int fi : incident[static_cast<std::size_t>(p)]) {
          if (fi <= static_cast<int>(ei)) continue;
          const simgraph::Edge& f = g.edges[static_cast<std::size_t>(fi)];
          if (f.u == e.u || f.u == e.v || f.v == e.u || f.v == e.v) continue;
          if (stamp[static_cast<std::size_t>(fi)] == static_cast<int>(ei)) continue;
          stamp[static_cast<std::size_t>(fi)] = static_cast<int>(ei);
          const DisjointCounts counts = disjoint_counts(calc, e.u, e.v, f.u, f.v);
          sum_two += counts.two_blocks;
          sum_three += counts.three_blocks;
          local_four += counts.four_blocks;
          subtract_far += far_value(calc, tax.delta[ei], tax.arc_start[ei],
                                    tax.delta[static_cast<std::size_t>(fi)],
                                    tax.arc_start[static_cast<std::size_t>(fi)]);
        }
      }
    }
  }

  // Aggregate far contribution over every unordered pair, via the separated
  // form. Short edges bucket by (delta, start mod L) because the cut-offset
  // overlap depends on nothing else.
  const long long n_long = tax.category_count[static_cast<std::size_t>(L)];
  long long sum_short_delta = 0;
  std::vector<long long> bucket(static_cast<std::size_t>(L) * static_cast<std::size_t>(L), 0);
  for (std::size_t e = 0; e < n_edges; ++e) {
    const int d = tax.delta[e];
    if (d < L) {
      sum_short_delta += d;
      ++bucket[static_cast<std::size_t>(d) * static_cast<std::size_t>(L) +
               static_cast<std::size_t>(tax.arc_start[e] % L)];
    }
  }
  long long aggregate = n_long * (n_long - 1) / 2 * static_cast<long long>(L) +
                        sum_short_delta * n_long;
  long long short_cross = 0;  // ordered short-short pairs including e = f
  for (int d1 = 1; d1 < L; ++d1) {
    for (int s1 = 0; s1 < L; ++s1) {
      const long long count1 = bucket[static_cast<std::size_t>(d1) * L + s1];
      if (count1 == 0) continue;
      for (int d2 = 1; d2 < L; ++d2) {
        for (int s2 = 0; s2 < L; ++s2) {
          const long long count2 = bucket[static_cast<std::size_t>(d2) * L + s2];
          if (count2 == 0) continue;
          short_cross += count1 * count2 * BlockCalc::cut_overlap(d1, s1, d2, s2, L);
        }
      }
    }
  }
  // Remove the diagonal (overlap of an edge with itself is its delta), then
  // halve to get unordered pairs.
  aggregate += (short_cross - sum_short_delta) / 2;

  const long long four_l = aggregate - subtract_far + local_four;

  Coefficients coef;
  const double ld = static_cast<double>(L);
  coef.c0 = static_cast<double>(c0_l) / ld;
  coef.c1 = static_cast<double>(c0_l + 2 * sum_two) / ld;
  coef.c2 = static_cast<double>(2 * sum_three) / ld;
  coef.c3 = static_cast<double>(2 * four_l) / ld;
  return coef;
}

double p1(double a, double m) {
  const double num = 2.0 * a * (m - a);
  if (num == 0.0) return 0.0;
  return num / (m * (m - 1.0));
}

double p2(double a, double m) {
  const double num = a * (m - a);
  if (num == 0.0) return 0.0;
  return num / (m * (m - 1.0));
}

double p3(double a, double m) {
  const double num = 4.0 * a * (a - 1.0) * (m - a) * (m - a - 1.0);
  if (num == 0.0) return 0.0;
  return num / (m * (m - 1.0) * (m - 2.0) * (m - 3.0));
}

double q1(double a1, double a2, double m) {
  const double num = 2.0 * a1 * (m - a2);
  if (num == 0.0) return 0.0;
  return num / (m * (m - 1.0));
}

double q2(double a1, double a2, double m) {
  const double num = a1 * (m - a2) * (m - 2.0 * a1 + 2.0 * a2 - 2.0);
  if (num == 0.0) return 0.0;
  return num / (m * (m - 1.0) * (m - 2.0));
}

double q3(double a1, double a2, double m) {
  const double num = 4.0 * a1 * (m - a2) *
                     ((a1 - 1.0) * (m - a1 - 1.0) + (a2 - a1) * (m - a1 - 2.0));
  if (num == 0.0) return 0.0;
  return num / (m * (m - 1.0) * (m - 2.0) * (m - 3.0));
}

double covariance_from_coefficients(const Coefficients& coef, double m, double a1,
                                    double a2) {
  return coef.c1 * q1(a1, a2, m) + coef.c2 * q2(a1, a2, m) +
         coef.c3 * q3(a1, a2, m) - coef.c0 * coef.c0 * p1(a1, m) * p1(a2, m);
}

double variance_from_coefficients(const Coefficients& coef, double m, double a) {
  return covariance_from_coefficients(coef, m, a, a);
}

std::vector<double> variance_grid(const Coefficients& coef,
                                  const simgraph::EdgeTaxonomy& tax) {
  if (tax.m < 4) {
    throw ComputeError("variance needs at least 4 blocks, got m=" +
                       std::to_string(tax.m) + " (reduce L or provide more data)");
  }
  std::vector<double> var(static_cast<std::size_t>(tax.m) + 1, 0.0);
  for (int a = 0; a <= tax.m; ++a) {
    var[static_cast<std::size_t>(a)] = variance_from_coefficients(
        coef, static_cast<double>(tax.m), static_cast<double>(a));
  }
  return var;
}

double covariance_grid(const Coefficients& coef, int m, int a1, int a2) {
  if (m < 4) {
    throw ComputeError("covariance needs at least 4 blocks, got m=" +
                       std::to_string(m));
  }
  if (a1 < 0 || a1 > a2 || a2 > m) {
    throw ComputeError("covariance grid needs 0 <= a1 <= a2 <= m");
  }
  return covariance_from_coefficients(coef, static_cast<double>(m),
                                      static_cast<double>(a1),
                                      static_cast<double>(a2));
}

std::vector<double> sd_curve(const std::vector<double>& var_grid,
                             const simgraph::EdgeTaxonomy& tax) {
  const int m = tax.m;
  const int L = tax.L;
  const int n = tax.n;
  if (static_cast<int>(var_grid.size()) != m + 1) {
    throw ComputeError("variance grid size does not match block count");
  }
  std::vector<double> knot(static_cast<std::size_t>(m) + 1, 0.0);
  for (int a = 0; a <= m; ++a) {
    const double v = var_grid[static_cast<std::size_t>(a)];
    if (v < -1e-9) {
      throw ComputeError("negative variance at grid point " + std::to_string(a));
    }
    knot[static_cast<std::size_t>(a)] = std::sqrt(std::max(0.0, v));
  }
  std::vector<double> sd(static_cast<std::size_t>(n) + 1, 0.0);
  for (int a = 0; a < m; ++a) {
    const double lo = knot[static_cast<std::size_t>(a)];
    const double hi = knot[static_cast<std::size_t>(a) + 1];
    for (int b = 0; b < L; ++b) {
      sd[static_cast<std::size_t>(a * L + b)] =
          lo + (hi - lo) * static_cast<double>(b) / static_cast<double>(L);
    }
  }
  sd[static_cast<std::size_t>(n)] = knot[static_cast<std::size_t>(m)];
  return sd;
}

std::vector<double> z_curve(const std::vector<int>& r_obs,
                            const std::vector<double>& e,
                            const std::vector<double>& sd, Window w) {
  const std::size_t size = r_obs.size();
  if (e.size() != size || sd.size() != size) {
    throw ComputeError("curve lengths disagree");
  }
  if (w.lo < 1 || w.hi >= static_cast<int>(size) || w.lo > w.hi) {
    throw ComputeError("scan window [" + std::to_string(w.lo) + ", " +
                       std::to_string(w.hi) + "] out of range");
  }
  std::vector<double> z(size, std::numeric_limits<double>::quiet_NaN());
  for (int t = w.lo; t <= w.hi; ++t) {
    const double s = sd[static_cast<std::size_t>(t)];
    if (!(s > 0.0)) {
      throw ComputeError("vanishing variance at t=" + std::to_string(t) +
                         " inside the scan window");
    }
    z[static_cast<std::size_t>(t)] =
        (e[static_cast<std::size_t>(t)] - static_cast<double>(r_obs[static_cast<std::size_t>(t)])) / s;
  }
  return z;
}

}  // namespace cbpscan::moments
