#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "cbpscan/moments.hpp"
#include "cbpscan/pvalue.hpp"
#include "cbpscan/simgraph.hpp"

namespace cbpscan::detector {

struct Options {
  int L = 1;
  // Scan window: explicit range wins; otherwise 5% of the augmented length is
  // trimmed from each side.
  std::optional<moments::Window> window;
  bool with_a1 = true;
  bool with_a2 = true;
  int mc_b = 0;  // Monte Carlo p-value sample count; 0 skips it
  int skew_b = 10000;
  std::uint64_t seed = 0;
  int workers = 1;
};

struct ScanResult {
  int n_raw = 0;
  int n = 0;
  int L = 1;
  int m = 0;
  int x_aug = 0;
  moments::Window window;
  int t_hat = 0;      // argmax of z over the window; ties take the smallest t
  double z_max = 0.0;
  std::vector<int> r_obs;
  std::vector<double> e;
  std::vector<double> sd;
  std::vector<double> z;
  // Optional p-values; NaN when not requested.
  double p_a1;
  double p_a2;
  double p_mc;
  std::vector<int> skipped_t;   // t dropped from the A2 sum
  std::vector<double> gamma;    // permutation skewness curve (when A2 ran)
  long long mc_count = 0;
  int mc_b = 0;
};

ScanResult detect(const simgraph::Graph& g, const Options& opt);

struct LSelection {
  std::vector<int> candidates;   // evaluated candidates, ascending
  std::vector<int> skipped;      // requested candidates dropped (m < 4)
  std::vector<double> z_max;     // per evaluated candidate
  std::vector<double> ratio;     // ratio[k] = z_max[k] / z_max[k-1]; ratio[0] is NaN
  double threshold = 0.99;
  int chosen_L = 1;
  bool fallback = false;  // no ratio reached the threshold; largest candidate used
};

// Block-length selection by the max-z stabilization rule: the chosen L is the
// smallest candidate (second onward) whose incoming ratio reaches the
// threshold, i.e. increasing the block length further no longer shrinks the
// scan maximum.
LSelection select_L(const simgraph::Graph& g, std::vector<int> candidates = {},
                    double threshold = 0.99,
                    std::optional<moments::Window> window = std::nullopt);

}  // namespace cbpscan::detector
