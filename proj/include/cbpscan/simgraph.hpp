#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cbpscan/seqdata.hpp"

namespace cbpscan::simgraph {

// Undirected edge over 0-based node ids, stored normalized (u < v).
struct Edge {
  int u = 0;
  int v = 0;
};

struct Graph {
  int n_nodes = 0;
  std::vector<Edge> edges;
};

// Minimum spanning tree over the full distance matrix (Kruskal). Equal-weight
// candidates are ordered by (weight, u, v) so the output is deterministic;
// which of several equally light trees is returned does not affect the
// statistics, only reproducibility.
Graph build_mst(const seqdata::DistanceMatrix& dist);

// Union of directed k-nearest-neighbor relations, deduplicated. Neighbor
// lists are ordered by (distance, index), so ties at the k-th slot keep the
// smallest index.
Graph build_knn(const seqdata::DistanceMatrix& dist, int k);

Graph graph_from_edges(int n_nodes, const std::vector<std::pair<int, int>>& pairs);

// Circular distance taxonomy of the edges for block length L, on the
// augmented circle of n = n_raw + x_aug positions. Edges fall into
// categories by delta = min(|i-j|, n-|i-j|): one category per delta in
// [1, L-1] plus a pooled category for delta >= L.
struct EdgeTaxonomy {
  int n_raw = 0;
  int L = 1;
  int x_aug = 0;
  int n = 0;
  int m = 0;
  std::vector<int> delta;        // per edge
  std::vector<int> arc_start;    // 0-based start of the short arc; -1 when delta >= L
  std::vector<long long> category_count;  // index 1..L; [L] pools delta >= L
};

EdgeTaxonomy classify_edges(const Graph& g, int L);

// Quantities that control how well the scan statistic's null is behaved for
// this graph and block length: neighborhood-growth sums and the distribution
// of block boundary degrees D over the L blockings.
struct ConditionDiagnostics {
  // Sum over edges of |A_{e,1}| * |A_{e,2}| and over nodes of |A_{i,1}| * |A_{i,2}|,
  // where A_{.,r} are the r-step neighborhood closures of the block-interaction
  // relation (edges with an endpoint within circular distance < L).
  long long edge_neighborhood_sum = 0;
  long long node_neighborhood_sum = 0;
  // boundary_degree[omega][b] = number of edges joining block b to another
  // block under blocking offset omega.
  std::vector<std::vector<int>> boundary_degree;
  double mean_total_boundary = 0.0;  // E_Omega(sum_b D_b); equals 2*c0
  double mean_sq_sum = 0.0;          // E_Omega(sum_b D_b^2)
};

ConditionDiagnostics condition_diagnostics(const Graph& g, int L);

}  // namespace cbpscan::simgraph
