#include "cbpscan/cbp.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "cbpscan/common.hpp"

namespace cbpscan::cbp {

namespace {

void check_divisible(int n, int L) {
  if (L < 1 || n < L || n % L != 0) {
    throw ComputeError("block permutation needs n divisible by L, got n=" +
                       std::to_string(n) + ", L=" + std::to_string(L));
  }
}

}  // namespace

std::vector<int> positions(const Assignment& a, int n, int L) {
  check_divisible(n, L);
  const int m = n / L;
  if (a.offset < 0 || a.offset >= L ||
      static_cast<int>(a.block_order.size()) != m) {
    throw ComputeError("assignment does not match n=" + std::to_string(n) +
                       ", L=" + std::to_string(L));
  }
  std::vector<int> pos(static_cast<std::size_t>(n), 0);
  for (int rank = 0; rank < m; ++rank) {
    const int block = a.block_order[static_cast<std::size_t>(rank)];
    for (int s = 0; s < L; ++s) {
      const int original = (a.offset + block * L + s) % n;
      pos[static_cast<std::size_t>(original)] = rank * L + s + 1;
    }
  }
  return pos;
}

Assignment sample_cbp(int n, int L, rng::Stream& rng) {
  check_divisible(n, L);
  const int m = n / L;
  Assignment a;
  a.offset = static_cast<int>(rng.below(static_cast<std::uint64_t>(L)));
  a.block_order.resize(static_cast<std::size_t>(m));
  std::iota(a.block_order.begin(), a.block_order.end(), 0);
  rng.shuffle(a.block_order);
  return a;
}

std::vector<int> identity_positions(int n) {
  std::vector<int> pos(static_cast<std::size_t>(n));
  std::iota(pos.begin(), pos.end(), 1);
  return pos;
}

std::uint64_t cbp_assignment_count(int n, int L, std::uint64_t budget) {
  check_divisible(n, L);
  const int m = n / L;
  std::uint64_t count = static_cast<std::uint64_t>(L);
  for (int f = 2; f <= m; ++f) {
    if (count > budget / static_cast<std::uint64_t>(f)) {
      throw ComputeError("assignment count " + std::to_string(L) + " * " +
                         std::to_string(m) + "! exceeds budget " +
                         std::to_string(budget));
    }
    count *= static_cast<std::uint64_t>(f);
  }
  if (count > budget) {
    throw ComputeError("assignment count exceeds budget " + std::to_string(budget));
  }
  return count;
}

void enumerate_cbp(int n, int L, std::uint64_t budget,
                   const std::function<void(const std::vector<int>& pos)>& visit) {
  cbp_assignment_count(n, L, budget);
  const int m = n / L;
  Assignment a;
  a.block_order.resize(static_cast<std::size_t>(m));
  for (a.offset = 0; a.offset < L; ++a.offset) {
    std::iota(a.block_order.begin(), a.block_order.end(), 0);
    do {
      visit(positions(a, n, L));
    } while (std::next_permutation(a.block_order.begin(), a.block_order.end()));
  }
}

std::vector<int> r_curve(const simgraph::Graph& g, const std::vector<int>& pos,
                         int n) {
  // diff[t] accumulates +1 where an edge starts straddling and -1 where it
  // stops: edge with positions (lo, hi) straddles every t in [lo, hi).
  std::vector<int> diff(static_cast<std::size_t>(n) + 1, 0);
  for (const simgraph::Edge& e : g.edges) {
    const int pu = pos[static_cast<std::size_t>(e.u)];
    const int pv = pos[static_cast<std::size_t>(e.v)];
    const int lo = std::min(pu, pv);
    const int hi = std::max(pu, pv);
    ++diff[static_cast<std::size_t>(lo)];
    --diff[static_cast<std::size_t>(hi)];
  }
  std::vector<int> r(static_cast<std::size_t>(n) + 1, 0);
  int acc = 0;
  for (int t = 1; t <= n; ++t) {
    acc += diff[static_cast<std::size_t>(t)];
    r[static_cast<std::size_t>(t)] = acc;
  }
  return r;
}

}  // namespace cbpscan::cbp
