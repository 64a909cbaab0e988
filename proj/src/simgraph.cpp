#include "cbpscan/simgraph.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <tuple>
#include <vector>

#include "cbpscan/common.hpp"

namespace cbpscan::simgraph {

namespace {

struct DisjointSets {
  std::vector<int> parent;

  explicit DisjointSets(int n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }

  int find(int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }

  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[b] = a;
    return true;
  }
};

// Fixed-width bitset over edge indices, for the neighborhood closures below.
class EdgeSet {
 public:
  explicit EdgeSet(std::size_t n_edges) : words_((n_edges + 63) / 64, 0) {}

  void set(std::size_t e) { words_[e >> 6] |= std::uint64_t{1} << (e & 63); }

  void merge(const EdgeSet& other) {
    for (std::size_t w = 0; w < words_.size(); ++w) words_[w] |= other.words_[w];
  }

  long long count() const {
    long long total = 0;
    for (const std::uint64_t w : words_) total += __builtin_popcountll(w);
    return total;
  }

  template <typename Fn>
  void for_each(Fn&& fn) const {
    for (std::size_t w = 0; w < words_.size(); ++w) {
      std::uint64_t bits = words_[w];
      while (bits != 0) {
        const int b = __builtin_ctzll(bits);
        fn((w << 6) + static_cast<std::size_t>(b));
        bits &= bits - 1;
      }
    }
  }

 private:
  std::vector<std::uint64_t> words_;
};

// One closure step: out[x] = in_seed[x] | union of in[e'] over e' adjacent to
// any member e* of in_seed[x].
std::vector<EdgeSet> closure_step(const std::vector<EdgeSet>& seed,
                                  const std::vector<EdgeSet>& level,
                                  const std::vector<std::vector<int>>& edge_adj,
                                  std::size_t n_edges) {
  std::vector<EdgeSet> out;
  out.reserve(seed.size());
  for (const EdgeSet& s : seed) {
    EdgeSet grown = s;
    s.for_each([&](std::size_t member) {
      for (const int neighbor : edge_adj[member]) {
        grown.merge(level[static_cast<std::size_t>(neighbor)]);
      }
    });
    out.push_back(std::move(grown));
  }
  (void)n_edges;
  return out;
}

}  // namespace

Graph build_mst(const seqdata::DistanceMatrix& dist) {
  const int n = static_cast<int>(dist.n);
  if (n < 2) {
    throw InputError("spanning tree needs at least 2 observations");
  }
  // Kruskal over all pairs, ordered by (weight, u, v) so equal-weight choices
  // are reproducible.
  std::vector<std::tuple<double, int, int>> candidates;
  candidates.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      candidates.emplace_back(dist.at(u, v), u, v);
    }
  }
  std::sort(candidates.begin(), candidates.end());
  Graph g;
  g.n_nodes = n;
  g.edges.reserve(static_cast<std::size_t>(n) - 1);
  DisjointSets sets(n);
  for (const auto& [w, u, v] : candidates) {
    if (sets.unite(u, v)) {
      g.edges.push_back(Edge{u, v});
      if (static_cast<int>(g.edges.size()) == n - 1) break;
    }
  }
  return g;
}

Graph build_knn(const seqdata::DistanceMatrix& dist, int k) {
  const int n = static_cast<int>(dist.n);
  if (k < 1 || k > n - 1) {
    throw InputError("k must be in [1, n-1], got " + std::to_string(k));
  }
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(k));
  std::vector<std::pair<double, int>> order;
  order.reserve(static_cast<std::size_t>(n) - 1);
  for (int i = 0; i < n; ++i) {
    order.clear();
    for (int j = 0; j < n; ++j) {
      if (j != i) order.emplace_back(dist.at(i, j), j);
    }
    std::sort(order.begin(), order.end());
    for (int r = 0; r < k; ++r) {
      const int j = order[static_cast<std::size_t>(r)].second;
      pairs.emplace_back(std::min(i, j), std::max(i, j));
    }
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  Graph g;
  g.n_nodes = n;
  g.edges.reserve(pairs.size());
  for (const auto& [u, v] : pairs) g.edges.push_back(Edge{u, v});
  return g;
}

Graph graph_from_edges(int n_nodes, const std::vector<std::pair<int, int>>& pairs) {
  if (n_nodes < 2) {
    throw InputError("graph needs at least 2 nodes");
  }
  Graph g;
  g.n_nodes = n_nodes;
  g.edges.reserve(pairs.size());
  std::vector<std::pair<int, int>> seen;
  seen.reserve(pairs.size());
  for (const auto& [a, b] : pairs) {
    if (a < 0 || b < 0 || a >= n_nodes || b >= n_nodes) {
      throw InputError("edge endpoint out of range");
    }
    if (a == b) {
      throw InputError("self loop at node " + std::to_string(a + 1));
    }
    seen.emplace_back(std::min(a, b), std::max(a, b));
    g.edges.push_back(Edge{std::min(a, b), std::max(a, b)});
  }
  std::sort(seen.begin(), seen.end());
  if (std::adjacent_find(seen.begin(), seen.end()) != seen.end()) {
    throw InputError("duplicate edge in graph");
  }
  return g;
}

EdgeTaxonomy classify_edges(const Graph& g, int L) {
  const auto aug = seqdata::augment_length(static_cast<std::size_t>(g.n_nodes), L);
  EdgeTaxonomy tax;
  tax.n_raw = g.n_nodes;
  tax.L = L;
  tax.x_aug = aug.x_aug;
  tax.n = aug.n;
  tax.m = aug.m;
  tax.delta.reserve(g.edges.size());
  tax.arc_start.reserve(g.edges.size());
  tax.category_count.assign(static_cast<std::size_t>(L) + 1, 0);
  for (const Edge& e : g.edges) {
    const int forward = e.v - e.u;          // u < v by construction
    const int backward = tax.n - forward;   // wrapping the other way
    const int delta = std::min(forward, backward);
    tax.delta.push_back(delta);
    if (delta < L) {
      tax.arc_start.push_back(forward <= backward ? e.u : e.v);
      ++tax.category_count[static_cast<std::size_t>(delta)];
    } else {
      tax.arc_start.push_back(-1);
      ++tax.category_count[static_cast<std::size_t>(L)];
    }
  }
  return tax;
}

ConditionDiagnostics condition_diagnostics(const Graph& g, int L) {
  const auto aug = seqdata::augment_length(static_cast<std::size_t>(g.n_nodes), L);
  const int n = aug.n;
  const std::size_t n_edges = g.edges.size();

  std::vector<std::vector<int>> incident(static_cast<std::size_t>(n));
  for (std::size_t e = 0; e < n_edges; ++e) {
    incident[static_cast<std::size_t>(g.edges[e].u)].push_back(static_cast<int>(e));
    incident[static_cast<std::size_t>(g.edges[e].v)].push_back(static_cast<int>(e));
  }

  // Edge adjacency: edges sharing an endpoint.
  std::vector<std::vector<int>> edge_adj(n_edges);
  for (std::size_t e = 0; e < n_edges; ++e) {
    for (const int node : {g.edges[e].u, g.edges[e].v}) {
      for (const int other : incident[static_cast<std::size_t>(node)]) {
        if (other != static_cast<int>(e)) edge_adj[e].push_back(other);
      }
    }
    std::sort(edge_adj[e].begin(), edge_adj[e].end());
    edge_adj[e].erase(std::unique(edge_adj[e].begin(), edge_adj[e].end()),
                      edge_adj[e].end());
  }

  // Node seeds: edges with an endpoint within circular distance < L of i.
  std::vector<EdgeSet> node0(static_cast<std::size_t>(g.n_nodes), EdgeSet(n_edges));
  for (int i = 0; i < g.n_nodes; ++i) {
    for (int shift = -(L - 1); shift <= L - 1; ++shift) {
      const int p = ((i + shift) % n + n) % n;
      if (p >= g.n_nodes) continue;  // augmented slots carry no edges
      for (const int e : incident[static_cast<std::size_t>(p)]) {
        node0[static_cast<std::size_t>(i)].set(static_cast<std::size_t>(e));
      }
    }
  }

  std::vector<EdgeSet> edge0(n_edges, EdgeSet(n_edges));
  for (std::size_t e = 0; e < n_edges; ++e) {
    edge0[e] = node0[static_cast<std::size_t>(g.edges[e].u)];
    edge0[e].merge(node0[static_cast<std::size_t>(g.edges[e].v)]);
  }

  const auto edge1 = closure_step(edge0, edge0, edge_adj, n_edges);
  const auto edge2 = closure_step(edge1, edge1, edge_adj, n_edges);
  const auto node1 = closure_step(node0, edge0, edge_adj, n_edges);
  const auto node2 = closure_step(node1, edge1, edge_adj, n_edges);

  ConditionDiagnostics diag;
  for (std::size_t e = 0; e < n_edges; ++e) {
    diag.edge_neighborhood_sum += edge1[e].count() * edge2[e].count();
  }
  for (std::size_t i = 0; i < node0.size(); ++i) {
    diag.node_neighborhood_sum += node1[i].count() * node2[i].count();
  }

  diag.boundary_degree.assign(static_cast<std::size_t>(L),
                              std::vector<int>(static_cast<std::size_t>(aug.m), 0));
  long long total = 0;
  long long total_sq = 0;
  for (int omega = 0; omega < L; ++omega) {
    auto& degree = diag.boundary_degree[static_cast<std::size_t>(omega)];
    for (const Edge& e : g.edges) {
      const int bu = ((e.u - omega + n) % n) / L;
      const int bv = ((e.v - omega + n) % n) / L;
      if (bu != bv) {
        ++degree[static_cast<std::size_t>(bu)];
        ++degree[static_cast<std::size_t>(bv)];
      }
    }
    for (const int d : degree) {
      total += d;
      total_sq += static_cast<long long>(d) * d;
    }
  }
  diag.mean_total_boundary = static_cast<double>(total) / L;
  diag.mean_sq_sum = static_cast<double>(total_sq) / L;
  return diag;
}

}  // namespace cbpscan::simgraph
