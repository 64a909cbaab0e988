#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cbpscan/rng.hpp"
#include "cbpscan/seqdata.hpp"

namespace cbpscan::simlab {

// Per-coordinate time series structure. Coefficients follow the convention
//   z_t = ar1*z_{t-1} + ar2*z_{t-2} + eps_t + ma1*eps_{t-1} + ma2*eps_{t-2}.
enum class Model {
  kM1,   // AR(1),   ar1 = 0.1
  kM2,   // AR(2),   ar1 = 0.1, ar2 = 0.05
  kM3,   // MA(1),   ma1 = 0.1
  kM4,   // MA(2),   ma1 = 0.1, ma2 = 0.05
  kM5,   // ARMA(1,1), ar1 = 0.1, ma1 = 0.1
  kIid,  // temporally independent (all coefficients 0)
};

enum class Noise {
  kGaussian,
  kT5,       // t with 5 df, scaled to unit variance
  kLaplace,  // scaled to unit variance
};

Model parse_model(const std::string& s);
Noise parse_noise(const std::string& s);
std::string model_name(Model m);
std::string noise_name(Noise x);

struct GenConfig {
  Model model = Model::kM1;
  Noise noise = Noise::kGaussian;
  int n = 200;
  int d = 10;
  double sigma_rho = 0.6;  // cross-coordinate correlation decay, Sigma(i,j) = rho^|i-j|
  int burn_in = 1000;
  // Draw the AR(1) start from its stationary law instead of burning in.
  // Only valid for M1 with gaussian noise.
  bool stationary_init = false;
};

// Generates n observations in R^d: each coordinate runs the chosen model on
// unit-variance noise, then rows are mixed by the symmetric square root of
// Sigma to impose cross-coordinate correlation.
seqdata::Sequence generate(const GenConfig& cfg, rng::Stream& rng);

// Adds delta_norm/sqrt(d) to every coordinate of observations tau+1..n
// (1-based), so the mean shift has Euclidean norm delta_norm.
void inject_mean_shift(seqdata::Sequence& seq, int tau, double delta_norm);

struct ExperimentConfig {
  std::string kind = "type1";  // type1 | power | critical
  GenConfig gen;
  std::string graph = "mst";  // mst | knn:K
  seqdata::Metric metric = seqdata::Metric::kEuclidean;
  int L = 5;
  double alpha = 0.05;
  int replicates = 500;
  bool with_analytic = true;  // compute the analytic p-values per replicate
  int mc_b = 0;  // per-replicate Monte Carlo p-value samples; 0 skips it
  int skew_b = 10000;
  int cv_mc_b = 10000;  // Monte Carlo samples for kind=critical
  double shift_norm = 2.0;
  int tau = 0;  // change position for kind=power; 0 means n/2
  std::uint64_t seed = 1;
  int workers = 1;
};

struct ReplicateResult {
  int rep = 0;
  bool ok = false;
  std::string error;
  int t_hat = 0;
  double z_max;
  double p_a1;
  double p_a2;
  double p_mc;
  // kind=critical only
  double cv_a1;
  double cv_a2;
  double cv_mc;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<ReplicateResult> replicates;
  int n_ok = 0;
  // Rejection rates at alpha among successful replicates (NaN when the
  // corresponding p-value was not computed).
  double reject_a1;
  double reject_a2;
  double reject_mc;
  // Kolmogorov-Smirnov distance of the p-value sample from U(0,1).
  double ks_a2;
  double ks_mc;
  // kind=critical only: thresholds for the scan maximum, averaged over
  // replicates.
  double cv_a1;
  double cv_a2;
  double cv_mc;
};

// Runs the configured batch. Replicate r uses rng stream (seed, r), so
// results are identical for any worker count.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

}  // namespace cbpscan::simlab
