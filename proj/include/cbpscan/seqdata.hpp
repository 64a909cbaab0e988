#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace cbpscan::seqdata {

enum class Metric { kEuclidean, kL1 };

Metric parse_metric(const std::string& name);

// A sequence of n observations in R^dim, row-major.
struct Sequence {
  std::size_t n = 0;
  std::size_t dim = 0;
  std::vector<double> values;

  double at(std::size_t i, std::size_t k) const { return values[i * dim + k]; }
  double& at(std::size_t i, std::size_t k) { return values[i * dim + k]; }
};

// Dense symmetric distance matrix between observations.
struct DistanceMatrix {
  std::size_t n = 0;
  std::vector<double> values;

  double at(std::size_t i, std::size_t j) const { return values[i * n + j]; }
  double& at(std::size_t i, std::size_t j) { return values[i * n + j]; }
};

// Numeric CSV, one observation per row. A leading line whose first field does
// not parse as a number is treated as a header and skipped. Ragged rows,
// empty fields and non-numeric values are hard errors that name file, line
// and column.
Sequence load_csv_rows(const std::string& path);

// Square numeric CSV of pairwise distances. Validated: square, finite,
// non-negative, symmetric (to 1e-8 relative), zero diagonal.
DistanceMatrix load_distance_matrix(const std::string& path);

// Edge list with two 1-based integer index columns. Indices are validated
// against [1, n_nodes]; self loops and duplicate edges are errors. Returns
// 0-based normalized (min,max) pairs.
std::vector<std::pair<int, int>> load_edge_list(const std::string& path,
                                                std::size_t n_nodes);

DistanceMatrix pairwise_distances(const Sequence& seq, Metric metric);

// Block arithmetic for a sequence of n_raw observations and block length L:
// the smallest multiple of L that is >= n_raw, realized by appending x_aug
// positions that carry no edges.
struct Augmentation {
  int L = 1;
  int x_aug = 0;
  int n = 0;  // n_raw + x_aug
  int m = 0;  // n / L blocks
};

Augmentation augment_length(std::size_t n_raw, int L);

// Pads the sequence with x_aug rows of NaN placeholders. The placeholder
// values are never read; padded positions only occupy slots in the circular
// block arithmetic.
Sequence augment(const Sequence& seq, int L, Augmentation* info = nullptr);

}  // namespace cbpscan::seqdata
