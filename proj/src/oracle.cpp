#include "cbpscan/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

#include "cbpscan/cbp.hpp"
#include "cbpscan/common.hpp"
#include "cbpscan/parallel.hpp"
#include "cbpscan/rng.hpp"
#include "cbpscan/seqdata.hpp"

namespace cbpscan::oracle {

namespace {

constexpr double kTol = 1e-10;

int circular_delta(int p, int q, int n) {
  const int forward = ((q - p) % n + n) % n;
  return std::min(forward, n - forward);
}

// Discrepancy scaled so the tolerance reads as a relative error for large
// values and an absolute one near zero.
double scaled_err(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

struct Instance {
  int n_raw = 0;
  int L = 1;
  std::vector<std::pair<int, int>> edges;
  std::string tag;
};

std::string describe(const Instance& inst) {
  std::ostringstream os;
  os << inst.tag << " (n=" << inst.n_raw << ", L=" << inst.L << ", edges=";
  for (std::size_t i = 0; i < inst.edges.size(); ++i) {
    if (i > 0) os << " ";
    os << inst.edges[i].first << "-" << inst.edges[i].second;
  }
  os << ")";
  return os.str();
}

struct InstanceOutcome {
  long long checks = 0;
  double err_e = 0.0;
  double err_var = 0.0;
  double err_cov = 0.0;
  double err_coef = 0.0;
  PairCoverage coverage;
  std::string failure;  // empty when clean
};

InstanceOutcome check_instance(const Instance& inst, double corrupt_c1) {
  InstanceOutcome out;
  const simgraph::Graph g = simgraph::graph_from_edges(inst.n_raw, inst.edges);
  const simgraph::EdgeTaxonomy tax = simgraph::classify_edges(g, inst.L);

  moments::Coefficients analytic = moments::variance_coefficients(g, tax);
  if (corrupt_c1 != 0.0) analytic.c1 *= 1.0 + corrupt_c1;
  const moments::Coefficients counted = counting_coefficients(g, inst.L);
  const double coef_errs[] = {scaled_err(analytic.c0, counted.c0),
                              scaled_err(analytic.c1, counted.c1),
                              scaled_err(analytic.c2, counted.c2),
                              scaled_err(analytic.c3, counted.c3)};
  for (const double err : coef_errs) {
    out.err_coef = std::max(out.err_coef, err);
    ++out.checks;
  }

  const EnumeratedMoments exact = enumerate_moments(g, inst.L);
  const std::vector<double> e = moments::expectation_curve(tax);
  for (int t = 0; t <= tax.n; ++t) {
    out.err_e = std::max(out.err_e, scaled_err(e[static_cast<std::size_t>(t)],
                                               exact.e[static_cast<std::size_t>(t)]));
    ++out.checks;
  }

  if (tax.m >= 4) {
    const std::vector<double> var = moments::variance_grid(analytic, tax);
    for (int a = 0; a <= tax.m; ++a) {
      out.err_var =
          std::max(out.err_var, scaled_err(var[static_cast<std::size_t>(a)],
                                           exact.var[static_cast<std::size_t>(a)]));
      ++out.checks;
    }
    for (int a1 = 0; a1 <= tax.m; ++a1) {
      for (int a2 = a1; a2 <= tax.m; ++a2) {
        const double cov = moments::covariance_grid(analytic, tax.m, a1, a2);
        out.err_cov = std::max(
            out.err_cov,
            scaled_err(cov, exact.cov[static_cast<std::size_t>(a1)]
                                     [static_cast<std::size_t>(a2)]));
        ++out.checks;
      }
    }
  }

  if (inst.L == 1) {
    // Closed forms for full permutation: straddle-count coefficients are
    // polynomial in the edge count and degree sum.
    const double edge_count = static_cast<double>(g.edges.size());
    std::vector<long long> degree(static_cast<std::size_t>(g.n_nodes), 0);
    for (const simgraph::Edge& edge : g.edges) {
      ++degree[static_cast<std::size_t>(edge.u)];
      ++degree[static_cast<std::size_t>(edge.v)];
    }
    double degree_sq = 0.0;
    for (const long long d : degree) degree_sq += static_cast<double>(d * d);
    const double closed[] = {edge_count, edge_count, degree_sq - 2.0 * edge_count,
                             edge_count * edge_count + edge_count - degree_sq};
    const double got[] = {analytic.c0, analytic.c1, analytic.c2, analytic.c3};
    for (int i = 0; i < 4; ++i) {
      out.err_coef = std::max(out.err_coef, scaled_err(got[i], closed[i]));
      ++out.checks;
    }
  }

  out.coverage = pair_coverage(g, inst.L);
  const double worst = std::max({out.err_e, out.err_var, out.err_cov, out.err_coef});
  if (!(worst <= kTol)) {
    std::ostringstream os;
    os << describe(inst) << ": worst scaled discrepancy " << worst;
    out.failure = os.str();
  }
  return out;
}

std::vector<Instance> build_corpus(const SuiteConfig& cfg) {
  std::vector<Instance> corpus;
  corpus.reserve(static_cast<std::size_t>(cfg.instances) + 16);
  rng::Stream rng(cfg.seed, 0);
  if (cfg.sizes.empty() || cfg.l_set.empty()) {
    throw InputError("instance sizes and block lengths must be nonempty");
  }
  for (const int n : cfg.sizes) {
    if (n < 2) throw InputError("instance sizes must be at least 2");
  }
  for (const int L : cfg.l_set) {
    if (L < 1) throw InputError("block lengths must be positive");
  }
  for (int i = 0; i < cfg.instances; ++i) {
    Instance inst;
    inst.n_raw = cfg.sizes[rng.below(cfg.sizes.size())];
    inst.L = cfg.l_set[rng.below(cfg.l_set.size())];
    std::vector<std::pair<int, int>> all_pairs;
    for (int u = 0; u < inst.n_raw; ++u) {
      for (int v = u + 1; v < inst.n_raw; ++v) {
        all_pairs.emplace_back(u, v);
      }
    }
    rng.shuffle(all_pairs);
    const auto max_edges =
        std::min<std::uint64_t>(10, all_pairs.size());
    const auto n_edges = 1 + rng.below(max_edges);
    inst.edges.assign(all_pairs.begin(),
                      all_pairs.begin() + static_cast<std::ptrdiff_t>(n_edges));
    std::sort(inst.edges.begin(), inst.edges.end());
    inst.tag = "random#" + std::to_string(i);
    corpus.push_back(std::move(inst));
  }
  if (cfg.branch_extras) {
    // Deterministic instances that pin every structural case: j short
    // distances out of 3 for shared-endpoint pairs, j out of 6 for disjoint
    // pairs. The random corpus bounds (n <= 8, L <= 3) cannot produce 4
    // pairwise-close distinct endpoints, so the densest disjoint cases need
    // larger circles.
    corpus.push_back({8, 1, {{0, 1}, {1, 2}, {3, 7}}, "extra-L1"});
    corpus.push_back({8, 2, {{0, 1}, {0, 4}}, "extra-shared-1"});
    corpus.push_back({8, 2, {{0, 1}, {0, 7}}, "extra-shared-2"});
    corpus.push_back({12, 3, {{0, 1}, {0, 2}, {1, 2}}, "extra-shared-3"});
    corpus.push_back({6, 3, {{0, 1}, {0, 2}, {1, 2}}, "extra-shared-3-small"});
    corpus.push_back({8, 2, {{0, 1}, {3, 6}}, "extra-disjoint-1"});
    corpus.push_back({8, 2, {{0, 1}, {4, 5}}, "extra-disjoint-2"});
    corpus.push_back({8, 2, {{0, 1}, {2, 3}}, "extra-disjoint-3"});
    corpus.push_back({12, 3, {{0, 1}, {2, 4}}, "extra-disjoint-4"});
    corpus.push_back({12, 3, {{0, 1}, {2, 3}}, "extra-disjoint-5"});
    corpus.push_back({16, 4, {{0, 1}, {2, 3}, {5, 9}, {8, 15}}, "extra-disjoint-6"});
    corpus.push_back({4, 2, {{0, 1}, {2, 3}}, "extra-two-blocks"});
  }
  return corpus;
}

}  // namespace

EnumeratedMoments enumerate_moments(const simgraph::Graph& g, int L,
                                    std::uint64_t budget) {
  const seqdata::Augmentation aug =
      seqdata::augment_length(static_cast<std::size_t>(g.n_nodes), L);
  const int n = aug.n;
  const int m = aug.m;
  const std::uint64_t count = cbp::cbp_assignment_count(n, L, budget);

  std::vector<long long> sum_r(static_cast<std::size_t>(n) + 1, 0);
  std::vector<std::vector<long long>> sum_rr(
      static_cast<std::size_t>(m) + 1,
      std::vector<long long>(static_cast<std::size_t>(m) + 1, 0));
  cbp::enumerate_cbp(n, L, budget, [&](const std::vector<int>& pos) {
    const std::vector<int> r = cbp::r_curve(g, pos, n);
    for (int t = 0; t <= n; ++t) {
      sum_r[static_cast<std::size_t>(t)] += r[static_cast<std::size_t>(t)];
    }
    for (int a1 = 0; a1 <= m; ++a1) {
      const long long r1 = r[static_cast<std::size_t>(a1 * L)];
      for (int a2 = a1; a2 <= m; ++a2) {
        sum_rr[static_cast<std::size_t>(a1)][static_cast<std::size_t>(a2)] +=
            r1 * r[static_cast<std::size_t>(a2 * L)];
      }
    }
  });

  EnumeratedMoments out;
  out.n = n;
  out.L = L;
  out.m = m;
  out.e.resize(static_cast<std::size_t>(n) + 1);
  const auto total = static_cast<double>(count);
  for (int t = 0; t <= n; ++t) {
    out.e[static_cast<std::size_t>(t)] =
        static_cast<double>(sum_r[static_cast<std::size_t>(t)]) / total;
  }
  out.cov.assign(static_cast<std::size_t>(m) + 1,
                 std::vector<double>(static_cast<std::size_t>(m) + 1, 0.0));
  out.var.resize(static_cast<std::size_t>(m) + 1);
  for (int a1 = 0; a1 <= m; ++a1) {
    const long long s1 = sum_r[static_cast<std::size_t>(a1 * L)];
    for (int a2 = a1; a2 <= m; ++a2) {
      const long long s2 = sum_r[static_cast<std::size_t>(a2 * L)];
      const long long cross =
          static_cast<long long>(count) *
              sum_rr[static_cast<std::size_t>(a1)][static_cast<std::size_t>(a2)] -
          s1 * s2;
      const double value = static_cast<double>(cross) / (total * total);
      out.cov[static_cast<std::size_t>(a1)][static_cast<std::size_t>(a2)] = value;
      out.cov[static_cast<std::size_t>(a2)][static_cast<std::size_t>(a1)] = value;
    }
    out.var[static_cast<std::size_t>(a1)] =
        out.cov[static_cast<std::size_t>(a1)][static_cast<std::size_t>(a1)];
  }
  return out;
}

moments::Coefficients counting_coefficients(const simgraph::Graph& g, int L) {
  const seqdata::Augmentation aug =
      seqdata::augment_length(static_cast<std::size_t>(g.n_nodes), L);
  const int n = aug.n;
  const auto n_edges = g.edges.size();

  long long cross_total = 0;
  long long two_blocks = 0;
  long long three_blocks = 0;
  long long four_blocks = 0;
  std::vector<int> block(static_cast<std::size_t>(g.n_nodes), 0);
  std::vector<char> cut(n_edges, 0);
  for (int omega = 0; omega < L; ++omega) {
    for (int q = 0; q < g.n_nodes; ++q) {
      block[static_cast<std::size_t>(q)] = (((q - omega) % n + n) % n) / L;
    }
    for (std::size_t i = 0; i < n_edges; ++i) {
      const simgraph::Edge& e = g.edges[i];
      const bool is_cut = block[static_cast<std::size_t>(e.u)] !=
                          block[static_cast<std::size_t>(e.v)];
      cut[i] = is_cut ? 1 : 0;
      if (is_cut) ++cross_total;
    }
    for (std::size_t i = 0; i < n_edges; ++i) {
      if (!cut[i]) continue;
      for (std::size_t j = 0; j < n_edges; ++j) {
        if (!cut[j]) continue;
        const int ids[4] = {block[static_cast<std::size_t>(g.edges[i].u)],
                            block[static_cast<std::size_t>(g.edges[i].v)],
                            block[static_cast<std::size_t>(g.edges[j].u)],
                            block[static_cast<std::size_t>(g.edges[j].v)]};
        int distinct = 0;
        int seen[4];
        for (const int id : ids) {
          bool known = false;
          for (int s = 0; s < distinct; ++s) {
            if (seen[s] == id) {
              known = true;
              break;
            }
          }
          if (!known) seen[distinct++] = id;
        }
        if (distinct == 2) {
          ++two_blocks;
        } else if (distinct == 3) {
          ++three_blocks;
        } else {
          ++four_blocks;
        }
      }
    }
  }

  moments::Coefficients out;
  out.c0 = static_cast<double>(cross_total) / L;
  out.c1 = static_cast<double>(two_blocks) / L;
  out.c2 = static_cast<double>(three_blocks) / L;
  out.c3 = static_cast<double>(four_blocks) / L;
  return out;
}

PairCoverage pair_coverage(const simgraph::Graph& g, int L) {
  const seqdata::Augmentation aug =
      seqdata::augment_length(static_cast<std::size_t>(g.n_nodes), L);
  const int n = aug.n;
  PairCoverage out;
  const auto n_edges = g.edges.size();
  for (std::size_t i = 0; i < n_edges; ++i) {
    for (std::size_t j = i + 1; j < n_edges; ++j) {
      const simgraph::Edge& a = g.edges[i];
      const simgraph::Edge& b = g.edges[j];
      int common = -1;
      if (a.u == b.u || a.u == b.v) common = a.u;
      if (a.v == b.u || a.v == b.v) common = a.v;
      if (common >= 0) {
        const int x = a.u == common ? a.v : a.u;
        const int y = b.u == common ? b.v : b.u;
        const int shorts = (circular_delta(common, x, n) < L ? 1 : 0) +
                           (circular_delta(common, y, n) < L ? 1 : 0) +
                           (circular_delta(x, y, n) < L ? 1 : 0);
        ++out.shared_within[static_cast<std::size_t>(shorts)];
      } else {
        const int nodes[4] = {a.u, a.v, b.u, b.v};
        int shorts = 0;
        for (int p = 0; p < 4; ++p) {
          for (int q = p + 1; q < 4; ++q) {
            if (circular_delta(nodes[p], nodes[q], n) < L) ++shorts;
          }
        }
        ++out.disjoint_within[static_cast<std::size_t>(shorts)];
      }
    }
  }
  return out;
}

SuiteReport run_suite(const SuiteConfig& cfg) {
  if (cfg.instances < 0) throw InputError("negative instance count");
  const std::vector<Instance> corpus = build_corpus(cfg);

  std::vector<InstanceOutcome> outcomes(corpus.size());
  const int workers = parallel::resolve_workers(cfg.workers);
  parallel::run_chunked(workers, corpus.size(),
                        [&](int, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      try {
        outcomes[i] = check_instance(corpus[i], cfg.corrupt_c1);
      } catch (const std::exception& ex) {
        outcomes[i].failure = describe(corpus[i]) + ": " + ex.what();
      }
    }
  });

  SuiteReport report;
  report.instances_run = static_cast<int>(corpus.size());
  for (const InstanceOutcome& oc : outcomes) {
    report.checks += oc.checks;
    report.max_err_e = std::max(report.max_err_e, oc.err_e);
    report.max_err_var = std::max(report.max_err_var, oc.err_var);
    report.max_err_cov = std::max(report.max_err_cov, oc.err_cov);
    report.max_err_coef = std::max(report.max_err_coef, oc.err_coef);
    for (std::size_t k = 0; k < report.coverage.shared_within.size(); ++k) {
      report.coverage.shared_within[k] += oc.coverage.shared_within[k];
    }
    for (std::size_t k = 0; k < report.coverage.disjoint_within.size(); ++k) {
      report.coverage.disjoint_within[k] += oc.coverage.disjoint_within[k];
    }
    if (report.first_failure.empty() && !oc.failure.empty()) {
      report.first_failure = oc.failure;
    }
  }
  report.coverage_ok = true;
  for (const long long c : report.coverage.shared_within) {
    if (c == 0) report.coverage_ok = false;
  }
  for (const long long c : report.coverage.disjoint_within) {
    if (c == 0) report.coverage_ok = false;
  }
  // A narrowed corpus (custom sizes or block lengths, extras off) cannot hit
  // every structural case; completeness is only demanded of runs that include
  // the fixed extras.
  if (report.first_failure.empty() && cfg.branch_extras && !report.coverage_ok) {
    report.first_failure = "structural coverage incomplete";
  }
  report.pass = report.first_failure.empty();
  return report;
}

std::string format_report(const SuiteReport& r) {
  std::ostringstream os;
  os << "instances: " << r.instances_run << ", checks: " << r.checks << "\n";
  os << "worst scaled discrepancy: expectation " << r.max_err_e << ", variance "
     << r.max_err_var << ", covariance " << r.max_err_cov << ", coefficients "
     << r.max_err_coef << "\n";
  os << "shared-pair short-distance counts:";
  for (std::size_t k = 0; k < r.coverage.shared_within.size(); ++k) {
    os << " [" << k << "] " << r.coverage.shared_within[k];
  }
  os << "\ndisjoint-pair short-distance counts:";
  for (std::size_t k = 0; k < r.coverage.disjoint_within.size(); ++k) {
    os << " [" << k << "] " << r.coverage.disjoint_within[k];
  }
  os << "\ncoverage " << (r.coverage_ok ? "complete" : "INCOMPLETE") << "\n";
  os << (r.pass ? "PASS" : "FAIL: " + r.first_failure) << "\n";
  return os.str();
}

}  // namespace cbpscan::oracle
