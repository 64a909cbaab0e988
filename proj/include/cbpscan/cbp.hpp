#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "cbpscan/rng.hpp"
#include "cbpscan/simgraph.hpp"

namespace cbpscan::cbp {

// One circular block permutation of n = m*L positions: a blocking offset in
// [0, L) plus an ordering of the m blocks. Only the offset class of the
// rotation matters, so (offset, order) parameterizes the null exactly:
// L * m! equally likely assignments.
struct Assignment {
  int offset = 0;
  std::vector<int> block_order;  // block_order[rank] = block id placed at that rank
};

// New 1-based position of each original 0-based index. Block b under offset
// omega covers original positions {omega + b*L + s (mod n) : s = 0..L-1}, and
// within-block order is preserved.
std::vector<int> positions(const Assignment& a, int n, int L);

Assignment sample_cbp(int n, int L, rng::Stream& rng);

// Identity placement (position i+1 for index i); the observed curve.
std::vector<int> identity_positions(int n);

// Visit all L * m! assignments (offsets in order, block orders
// lexicographically). Throws if L * m! would exceed `budget`.
void enumerate_cbp(int n, int L, std::uint64_t budget,
                   const std::function<void(const std::vector<int>& pos)>& visit);
std::uint64_t cbp_assignment_count(int n, int L, std::uint64_t budget);

// r[t] = number of edges whose endpoints' positions straddle t, i.e. exactly
// one endpoint position is <= t. Computed with a difference array in
// O(|G| + n). r has n+1 entries, t = 0..n, with r[0] = r[n] = 0.
std::vector<int> r_curve(const simgraph::Graph& g, const std::vector<int>& pos, int n);

}  // namespace cbpscan::cbp
