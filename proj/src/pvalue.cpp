#include "cbpscan/pvalue.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cbpscan/common.hpp"
#include "cbpscan/parallel.hpp"
#include "cbpscan/rng.hpp"
#include "cbpscan/stats.hpp"

namespace cbpscan::pvalue {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Stream-id namespaces: the skewness estimator and the Monte Carlo samplers
// must stay uncorrelated even when a caller hands both the same seed.
constexpr std::uint64_t kSkewStreamBase = 0x534b455700000000ULL;
constexpr std::uint64_t kMcStreamBase = 0x4d43000000000000ULL;

// Shared tail sum for the analytic approximations. With gamma == nullptr this
// is the plain sum; with gamma it applies the per-t skewness factor S(t). The
// two paths run the identical operations when the correction degenerates to
// S(t) = 1 (gamma identically zero), so the corrected p-value reproduces the
// plain one bit for bit in that case.
double tail_sum(double b, const moments::Coefficients& coef, int n, int L,
                moments::Window w, const std::vector<double>* gamma,
                std::vector<int>* skipped) {
  stats::KahanSum acc;
  for (int t = w.lo; t <= w.hi; ++t) {
    const double c = c_of_t(coef, n, L, static_cast<double>(t));
    if (!(c > 0.0)) continue;
    double term = c * nu(std::sqrt(2.0 * b * b * c));
    if (gamma != nullptr) {
      const double g =
          t < static_cast<int>(gamma->size()) ? (*gamma)[t] : kNaN;
      if (!std::isfinite(g)) {
        skipped->push_back(t);
        continue;
      }
      const double disc = 1.0 + 2.0 * b * g;
      if (!(disc > 0.0)) {
        skipped->push_back(t);
        continue;
      }
      // theta solves theta*(1 + gamma*theta/2) = b; this root form is stable
      // and reduces to exactly theta = b when gamma = 0.
      const double theta = 2.0 * b / (1.0 + std::sqrt(disc));
      const double base = 1.0 + g * theta;
      if (!(base > 0.0)) {
        skipped->push_back(t);
        continue;
      }
      const double s = std::exp(0.5 * (b - theta) * (b - theta) +
                                g * theta * theta * theta / 6.0) /
                       std::sqrt(base);
      term *= s;
    }
    acc.add(term);
  }
  return acc.sum;
}

}  // namespace

double nu(double x) {
  if (!(x >= 0.0)) {
    throw ComputeError("nu: argument must be nonnegative, got " +
                       std::to_string(x));
  }
  // Limit value; below this the erfc-based numerator loses all digits.
  if (x < 1e-8) return 1.0;
  const double half = 0.5 * x;
  const double numerator = (2.0 / x) * (stats::norm_cdf(half) - 0.5);
  const double denominator = half * stats::norm_cdf(half) + stats::norm_pdf(half);
  return numerator / denominator;
}

double c_of_t(const moments::Coefficients& coef, int n, int L, double t) {
  const int m = n / L;
  if (m < 4) {
    throw ComputeError("decay rate needs at least 4 blocks, got " +
                       std::to_string(m));
  }
  const double md = static_cast<double>(m);
  const double a = t / static_cast<double>(L);
  const double h1 = 2.0 * md * (md - 2.0) * (md - 3.0);
  const double h2 = (md - 3.0) * ((md - 2.0 * a) * (md - 2.0 * a) - 2.0 * md);
  const double h3 = -4.0 * (md - 2.0 * a) * (md - 2.0 * a) + 4.0 * md;
  const double h4 = md * (md - 1.0) * (md - 2.0) * (md - 3.0);
  const double h5 = 4.0 * md * (md - 1.0) * (a - 1.0) * (md - a - 1.0);
  const double h6 = -4.0 * a * (md - a) * (md - 2.0) * (md - 3.0);
  const double numerator =
      md * (md - 1.0) * (h1 * coef.c1 + h2 * coef.c2 + h3 * coef.c3);
  const double denominator =
      2.0 * L * a * (md - a) *
      (h4 * (2.0 * coef.c1 + coef.c2) + h5 * coef.c3 + h6 * coef.c0 * coef.c0);
  if (!(denominator > 0.0)) {
    throw ComputeError("decay rate denominator not positive at t = " +
                       std::to_string(t));
  }
  return numerator / denominator;
}

double pvalue_a1(double b, const moments::Coefficients& coef, int n, int L,
                 moments::Window w) {
  // The approximation targets the upper tail; at or below zero the scan
  // maximum exceeds the level with near certainty.
  if (!(b > 0.0)) return 1.0;
  const double sum = tail_sum(b, coef, n, L, w, nullptr, nullptr);
  const double p = b * stats::norm_pdf(b) * sum;
  return std::clamp(p, 0.0, 1.0);
}

A2Result pvalue_a2(double b, const moments::Coefficients& coef, int n, int L,
                   moments::Window w, const std::vector<double>& gamma) {
  A2Result out;
  if (!(b > 0.0)) {
    out.p = 1.0;
    return out;
  }
  const double sum = tail_sum(b, coef, n, L, w, &gamma, &out.skipped_t);
  const double p = b * stats::norm_pdf(b) * sum;
  out.p = std::clamp(p, 0.0, 1.0);
  return out;
}

std::vector<double> skewness_curve(const simgraph::Graph& g, moments::Window w,
                                   int skew_b, std::uint64_t seed, int workers) {
  if (skew_b < 1000) {
    throw InputError("skewness estimation needs at least 1000 samples, got " +
                     std::to_string(skew_b));
  }
  const int n = g.n_nodes;
  if (w.lo < 1 || w.lo > w.hi) {
    throw InputError("invalid skewness window");
  }
  // Standardize with the exact full-permutation moments (block length 1, so
  // every t sits on the grid and no augmentation happens).
  const simgraph::EdgeTaxonomy tax = simgraph::classify_edges(g, 1);
  const std::vector<double> e = moments::expectation_curve(tax);
  const moments::Coefficients coef = moments::variance_coefficients(g, tax);
  const std::vector<double> var = moments::variance_grid(coef, tax);
  const std::vector<double> sd = moments::sd_curve(var, tax);

  // The caller's window may extend past n - 1 when its sequence was padded
  // for a longer block length; those positions have no permutation analogue
  // and stay NaN (the corrected sum skips them).
  const int hi_filled = std::min(w.hi, n - 1);
  const int size = std::max(n, w.hi) + 1;
  const int nw = parallel::resolve_workers(workers);

  std::vector<std::vector<stats::KahanSum>> acc(
      static_cast<std::size_t>(nw),
      std::vector<stats::KahanSum>(static_cast<std::size_t>(size)));
  parallel::run_chunked(nw, static_cast<std::size_t>(skew_b),
                        [&](int worker, std::size_t begin, std::size_t end) {
    rng::Stream rng(seed, kSkewStreamBase + static_cast<std::uint64_t>(worker));
    std::vector<int> pos(static_cast<std::size_t>(n));
    auto& mine = acc[static_cast<std::size_t>(worker)];
    for (std::size_t s = begin; s < end; ++s) {
      for (int i = 0; i < n; ++i) pos[static_cast<std::size_t>(i)] = i + 1;
      rng.shuffle(pos);
      const std::vector<int> r = cbp::r_curve(g, pos, n);
      for (int t = w.lo; t <= hi_filled; ++t) {
        if (!(sd[static_cast<std::size_t>(t)] > 0.0)) continue;
        const double z = (e[static_cast<std::size_t>(t)] -
                          r[static_cast<std::size_t>(t)]) /
                         sd[static_cast<std::size_t>(t)];
        mine[static_cast<std::size_t>(t)].add(z * z * z);
      }
    }
  });

  std::vector<double> gamma(static_cast<std::size_t>(size), kNaN);
  for (int t = w.lo; t <= hi_filled; ++t) {
    if (!(sd[static_cast<std::size_t>(t)] > 0.0)) continue;
    stats::KahanSum total;
    for (int worker = 0; worker < nw; ++worker) {
      total.add(acc[static_cast<std::size_t>(worker)][static_cast<std::size_t>(t)].sum);
    }
    gamma[static_cast<std::size_t>(t)] = total.sum / static_cast<double>(skew_b);
  }
  return gamma;
}

std::vector<double> mc_max_samples(const simgraph::Graph& g,
                                   const simgraph::EdgeTaxonomy& tax,
                                   const std::vector<double>& e,
                                   const std::vector<double>& sd,
                                   moments::Window w, int B, std::uint64_t seed,
                                   int workers) {
  if (B < 1) {
    throw InputError("Monte Carlo sample count must be positive, got " +
                     std::to_string(B));
  }
  const int n = tax.n;
  const int L = tax.L;
  if (w.lo < 1 || w.hi > n - 1 || w.lo > w.hi) {
    throw InputError("invalid Monte Carlo window");
  }
  for (int t = w.lo; t <= w.hi; ++t) {
    if (!(sd[static_cast<std::size_t>(t)] > 0.0)) {
      throw ComputeError("zero permutation variance inside the window at t = " +
                         std::to_string(t));
    }
  }
  const int nw = parallel::resolve_workers(workers);
  std::vector<double> maxima(static_cast<std::size_t>(B));
  parallel::run_chunked(nw, static_cast<std::size_t>(B),
                        [&](int worker, std::size_t begin, std::size_t end) {
    rng::Stream rng(seed, kMcStreamBase + static_cast<std::uint64_t>(worker));
    for (std::size_t s = begin; s < end; ++s) {
      const cbp::Assignment asg = cbp::sample_cbp(n, L, rng);
      const std::vector<int> pos = cbp::positions(asg, n, L);
      const std::vector<int> r = cbp::r_curve(g, pos, n);
      double zmax = -std::numeric_limits<double>::infinity();
      for (int t = w.lo; t <= w.hi; ++t) {
        const double z = (e[static_cast<std::size_t>(t)] -
                          r[static_cast<std::size_t>(t)]) /
                         sd[static_cast<std::size_t>(t)];
        if (z > zmax) zmax = z;
      }
      maxima[s] = zmax;
    }
  });
  return maxima;
}

McResult pvalue_mc(const simgraph::Graph& g, const simgraph::EdgeTaxonomy& tax,
                   const std::vector<double>& e, const std::vector<double>& sd,
                   moments::Window w, double z_obs_max, int B,
                   std::uint64_t seed, int workers) {
  const std::vector<double> maxima =
      mc_max_samples(g, tax, e, sd, w, B, seed, workers);
  McResult out;
  out.B = B;
  for (const double zmax : maxima) {
    if (zmax >= z_obs_max) ++out.count_geq;
  }
  out.p = (1.0 + static_cast<double>(out.count_geq)) /
          (static_cast<double>(B) + 1.0);
  return out;
}

double critical_value(const std::function<double(double)>& pvalue_of_b,
                      double alpha) {
  if (!(alpha > 0.0 && alpha < 0.5)) {
    throw InputError("critical value level must lie in (0, 0.5), got " +
                     std::to_string(alpha));
  }
  double lo = 1.0;
  double hi = 8.0;
  const double p_lo = pvalue_of_b(lo);
  const double p_hi = pvalue_of_b(hi);
  // p decreases in b; the root must be bracketed.
  if (!(p_lo >= alpha && p_hi <= alpha)) {
    throw ComputeError("critical value does not lie in [1, 8] (p(1) = " +
                       std::to_string(p_lo) + ", p(8) = " +
                       std::to_string(p_hi) + ")");
  }
  double mid = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    mid = 0.5 * (lo + hi);
    const double p = pvalue_of_b(mid);
    if (std::abs(p - alpha) <= 1e-5) return mid;
    if (p > alpha) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo < 1e-12) break;
  }
  return mid;
}

double mc_critical_value(std::vector<double> max_samples, double alpha) {
  if (max_samples.empty()) {
    throw InputError("empty Monte Carlo sample");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw InputError("critical value level must lie in (0, 1), got " +
                     std::to_string(alpha));
  }
  std::sort(max_samples.begin(), max_samples.end());
  const auto b = static_cast<double>(max_samples.size());
  auto rank = static_cast<long long>(std::ceil((1.0 - alpha) * (b + 1.0)));
  rank = std::max<long long>(1, std::min<long long>(rank, max_samples.size()));
  return max_samples[static_cast<std::size_t>(rank - 1)];
}

}  // namespace cbpscan::pvalue
