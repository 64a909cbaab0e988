#include "cbpscan/detector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cbpscan/cbp.hpp"
#include "cbpscan/common.hpp"

namespace cbpscan::detector {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

moments::Window resolve_window(const std::optional<moments::Window>& requested,
                               int n) {
  if (!requested.has_value()) return moments::default_window(n);
  const moments::Window w = *requested;
  if (w.lo < 1 || w.hi > n - 1 || w.lo > w.hi) {
    throw InputError("scan window [" + std::to_string(w.lo) + ", " +
                     std::to_string(w.hi) + "] does not fit in [1, " +
                     std::to_string(n - 1) + "]");
  }
  return w;
}

}  // namespace

ScanResult detect(const simgraph::Graph& g, const Options& opt) {
  if (g.n_nodes < 20) {
    throw InputError("detection needs at least 20 observations, got " +
                     std::to_string(g.n_nodes));
  }
  if (opt.L < 1) {
    throw InputError("block length must be positive, got " +
                     std::to_string(opt.L));
  }

  const simgraph::EdgeTaxonomy tax = simgraph::classify_edges(g, opt.L);
  ScanResult res;
  res.n_raw = tax.n_raw;
  res.n = tax.n;
  res.L = opt.L;
  res.m = tax.m;
  res.x_aug = tax.x_aug;
  res.window = resolve_window(opt.window, tax.n);

  res.e = moments::expectation_curve(tax);
  const moments::Coefficients coef = moments::variance_coefficients(g, tax);
  const std::vector<double> var = moments::variance_grid(coef, tax);
  res.sd = moments::sd_curve(var, tax);
  res.r_obs = cbp::r_curve(g, cbp::identity_positions(tax.n), tax.n);
  res.z = moments::z_curve(res.r_obs, res.e, res.sd, res.window);

  res.t_hat = res.window.lo;
  res.z_max = -std::numeric_limits<double>::infinity();
  for (int t = res.window.lo; t <= res.window.hi; ++t) {
    const double z = res.z[static_cast<std::size_t>(t)];
    if (z > res.z_max) {
      res.z_max = z;
      res.t_hat = t;
    }
  }

  res.p_a1 = kNaN;
  res.p_a2 = kNaN;
  res.p_mc = kNaN;
  if (opt.with_a1) {
    res.p_a1 = pvalue::pvalue_a1(res.z_max, coef, tax.n, opt.L, res.window);
  }
  if (opt.with_a2) {
    res.gamma = pvalue::skewness_curve(g, res.window, opt.skew_b, opt.seed,
                                       opt.workers);
    pvalue::A2Result a2 = pvalue::pvalue_a2(res.z_max, coef, tax.n, opt.L,
                                            res.window, res.gamma);
    res.p_a2 = a2.p;
    res.skipped_t = std::move(a2.skipped_t);
  }
  if (opt.mc_b > 0) {
    const pvalue::McResult mc =
        pvalue::pvalue_mc(g, tax, res.e, res.sd, res.window, res.z_max,
                          opt.mc_b, opt.seed, opt.workers);
    res.p_mc = mc.p;
    res.mc_count = mc.count_geq;
    res.mc_b = mc.B;
  }
  return res;
}

LSelection select_L(const simgraph::Graph& g, std::vector<int> candidates,
                    double threshold, std::optional<moments::Window> window) {
  if (candidates.empty()) {
    for (int L = 1; L <= 12; ++L) candidates.push_back(L);
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()),
                   candidates.end());
  if (candidates.front() < 1) {
    throw InputError("block length candidates must be positive");
  }

  LSelection sel;
  sel.threshold = threshold;
  for (const int L : candidates) {
    const simgraph::EdgeTaxonomy tax = simgraph::classify_edges(g, L);
    if (tax.m < 4) {
      sel.skipped.push_back(L);
      continue;
    }
    const moments::Window w = resolve_window(window, tax.n);
    const std::vector<double> e = moments::expectation_curve(tax);
    const moments::Coefficients coef = moments::variance_coefficients(g, tax);
    const std::vector<double> var = moments::variance_grid(coef, tax);
    const std::vector<double> sd = moments::sd_curve(var, tax);
    const std::vector<int> r_obs =
        cbp::r_curve(g, cbp::identity_positions(tax.n), tax.n);
    const std::vector<double> z = moments::z_curve(r_obs, e, sd, w);
    double zmax = -std::numeric_limits<double>::infinity();
    for (int t = w.lo; t <= w.hi; ++t) {
      zmax = std::max(zmax, z[static_cast<std::size_t>(t)]);
    }
    sel.candidates.push_back(L);
    sel.z_max.push_back(zmax);
  }
  if (sel.candidates.size() < 2) {
    throw InputError("block length selection needs at least two usable "
                     "candidates (blocks per candidate must be >= 4)");
  }

  sel.ratio.assign(sel.candidates.size(), kNaN);
  for (std::size_t k = 1; k < sel.candidates.size(); ++k) {
    const double prev = sel.z_max[k - 1];
    sel.ratio[k] = prev > 0.0 ? sel.z_max[k] / prev : kNaN;
  }
  sel.fallback = true;
  sel.chosen_L = sel.candidates.back();
  for (std::size_t k = 1; k < sel.candidates.size(); ++k) {
    if (sel.ratio[k] >= threshold) {
      sel.chosen_L = sel.candidates[k];
      sel.fallback = false;
      break;
    }
  }
  return sel;
}

}  // namespace cbpscan::detector
