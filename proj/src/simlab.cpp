#include "cbpscan/simlab.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <string>

#include "cbpscan/common.hpp"
#include "cbpscan/detector.hpp"
#include "cbpscan/parallel.hpp"
#include "cbpscan/pvalue.hpp"
#include "cbpscan/stats.hpp"

namespace cbpscan::simlab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Stream-id offset separating the per-replicate detector seeds from the
// per-replicate generator streams (which use the replicate index directly).
constexpr std::uint64_t kDetectSeedBase = 0x4445544543540000ULL;

std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

struct ArmaCoef {
  double ar1 = 0.0;
  double ar2 = 0.0;
  double ma1 = 0.0;
  double ma2 = 0.0;
};

ArmaCoef model_coefficients(Model m) {
  switch (m) {
    case Model::kM1:
      return {0.1, 0.0, 0.0, 0.0};
    case Model::kM2:
      return {0.1, 0.05, 0.0, 0.0};
    case Model::kM3:
      return {0.0, 0.0, 0.1, 0.0};
    case Model::kM4:
      return {0.0, 0.0, 0.1, 0.05};
    case Model::kM5:
      return {0.1, 0.0, 0.1, 0.0};
    case Model::kIid:
      return {0.0, 0.0, 0.0, 0.0};
  }
  throw InputError("unknown model");
}

double draw_noise(Noise kind, rng::Stream& rng) {
  switch (kind) {
    case Noise::kGaussian:
      return rng.normal();
    case Noise::kT5: {
      // t with 5 degrees of freedom, variance 5/3, rescaled to 1.
      const double z = rng.normal();
      double chi = 0.0;
      for (int i = 0; i < 5; ++i) {
        const double w = rng.normal();
        chi += w * w;
      }
      return z / std::sqrt(chi / 5.0) * std::sqrt(0.6);
    }
    case Noise::kLaplace: {
      // Inverse CDF with scale 1/sqrt(2), so the variance is 1.
      double u;
      do {
        u = rng.uniform01();
      } while (u == 0.0);
      const double b = 1.0 / std::sqrt(2.0);
      return u < 0.5 ? b * std::log(2.0 * u) : -b * std::log(2.0 * (1.0 - u));
    }
  }
  throw InputError("unknown noise kind");
}

Eigen::MatrixXd correlation_sqrt(int d, double rho) {
  Eigen::MatrixXd sigma(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      sigma(i, j) = std::pow(rho, std::abs(i - j));
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
  if (es.info() != Eigen::Success) {
    throw ComputeError("eigendecomposition of the correlation matrix failed");
  }
  const Eigen::VectorXd roots = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * roots.asDiagonal() * es.eigenvectors().transpose();
}

struct GraphSpec {
  bool mst = true;
  int knn_k = 0;
};

GraphSpec parse_graph(const std::string& s) {
  const std::string low = lowercase(s);
  if (low == "mst") return {true, 0};
  if (low.rfind("knn:", 0) == 0) {
    const std::string arg = low.substr(4);
    try {
      const int k = std::stoi(arg);
      if (k >= 1) return {false, k};
    } catch (const std::exception&) {
    }
    throw InputError("bad neighbor count in graph spec '" + s + "'");
  }
  throw InputError("unknown graph spec '" + s + "' (expected mst or knn:K)");
}

}  // namespace

Model parse_model(const std::string& s) {
  const std::string low = lowercase(s);
  if (low == "m1") return Model::kM1;
  if (low == "m2") return Model::kM2;
  if (low == "m3") return Model::kM3;
  if (low == "m4") return Model::kM4;
  if (low == "m5") return Model::kM5;
  if (low == "iid") return Model::kIid;
  throw InputError("unknown model '" + s + "' (expected m1..m5 or iid)");
}

Noise parse_noise(const std::string& s) {
  const std::string low = lowercase(s);
  if (low == "gaussian" || low == "normal") return Noise::kGaussian;
  if (low == "t5") return Noise::kT5;
  if (low == "laplace") return Noise::kLaplace;
  throw InputError("unknown noise '" + s + "' (expected gaussian, t5, laplace)");
}

std::string model_name(Model m) {
  switch (m) {
    case Model::kM1:
      return "M1";
    case Model::kM2:
      return "M2";
    case Model::kM3:
      return "M3";
    case Model::kM4:
      return "M4";
    case Model::kM5:
      return "M5";
    case Model::kIid:
      return "iid";
  }
  return "?";
}

std::string noise_name(Noise x) {
  switch (x) {
    case Noise::kGaussian:
      return "gaussian";
    case Noise::kT5:
      return "t5";
    case Noise::kLaplace:
      return "laplace";
  }
  return "?";
}

seqdata::Sequence generate(const GenConfig& cfg, rng::Stream& rng) {
  if (cfg.n < 1) throw InputError("sequence length must be positive");
  if (cfg.d < 1) throw InputError("dimension must be positive");
  if (cfg.burn_in < 0) throw InputError("burn-in must be nonnegative");
  if (!(std::abs(cfg.sigma_rho) < 1.0)) {
    throw InputError("cross-coordinate correlation must lie in (-1, 1)");
  }
  const ArmaCoef c = model_coefficients(cfg.model);
  const bool pure_ar1 = c.ar2 == 0.0 && c.ma1 == 0.0 && c.ma2 == 0.0;
  if (cfg.stationary_init && !(pure_ar1 && cfg.noise == Noise::kGaussian)) {
    throw InputError(
        "stationary initialization is exact only for a first-order "
        "autoregression with gaussian noise");
  }

  Eigen::MatrixXd z(cfg.d, cfg.n);
  for (int k = 0; k < cfg.d; ++k) {
    double prev1 = 0.0;
    double prev2 = 0.0;
    double eps1 = 0.0;
    double eps2 = 0.0;
    int start = -cfg.burn_in;
    if (cfg.stationary_init) {
      prev1 = rng.normal() / std::sqrt(1.0 - c.ar1 * c.ar1);
      start = 0;
    }
    for (int t = start; t < cfg.n; ++t) {
      const double eps = draw_noise(cfg.noise, rng);
      const double value =
          c.ar1 * prev1 + c.ar2 * prev2 + eps + c.ma1 * eps1 + c.ma2 * eps2;
      prev2 = prev1;
      prev1 = value;
      eps2 = eps1;
      eps1 = eps;
      if (t >= 0) z(k, t) = value;
    }
  }

  seqdata::Sequence out;
  out.n = static_cast<std::size_t>(cfg.n);
  out.dim = static_cast<std::size_t>(cfg.d);
  out.values.resize(out.n * out.dim);
  if (cfg.d == 1 || cfg.sigma_rho == 0.0) {
    for (int t = 0; t < cfg.n; ++t) {
      for (int k = 0; k < cfg.d; ++k) {
        out.at(static_cast<std::size_t>(t), static_cast<std::size_t>(k)) = z(k, t);
      }
    }
    return out;
  }
  const Eigen::MatrixXd mix = correlation_sqrt(cfg.d, cfg.sigma_rho);
  const Eigen::MatrixXd y = mix * z;
  for (int t = 0; t < cfg.n; ++t) {
    for (int k = 0; k < cfg.d; ++k) {
      out.at(static_cast<std::size_t>(t), static_cast<std::size_t>(k)) = y(k, t);
    }
  }
  return out;
}

void inject_mean_shift(seqdata::Sequence& seq, int tau, double delta_norm) {
  const int n = static_cast<int>(seq.n);
  if (tau < 1 || tau >= n) {
    throw InputError("change position must lie in [1, n-1], got " +
                     std::to_string(tau));
  }
  const double shift = delta_norm / std::sqrt(static_cast<double>(seq.dim));
  for (int t = tau; t < n; ++t) {
    for (std::size_t k = 0; k < seq.dim; ++k) {
      seq.at(static_cast<std::size_t>(t), k) += shift;
    }
  }
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  if (cfg.replicates < 1) throw InputError("replicate count must be positive");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) {
    throw InputError("alpha must lie in (0, 1)");
  }
  if (cfg.kind != "type1" && cfg.kind != "power" && cfg.kind != "critical") {
    throw InputError("unknown experiment kind '" + cfg.kind +
                     "' (expected type1, power, critical)");
  }
  const GraphSpec gspec = parse_graph(cfg.graph);

  ExperimentReport report;
  report.config = cfg;
  report.replicates.assign(static_cast<std::size_t>(cfg.replicates),
                           ReplicateResult{});

  const int workers = parallel::resolve_workers(cfg.workers);
  parallel::run_chunked(workers, static_cast<std::size_t>(cfg.replicates),
                        [&](int, std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      ReplicateResult& out = report.replicates[r];
      out.rep = static_cast<int>(r);
      out.t_hat = 0;
      out.z_max = kNaN;
      out.p_a1 = kNaN;
      out.p_a2 = kNaN;
      out.p_mc = kNaN;
      out.cv_a1 = kNaN;
      out.cv_a2 = kNaN;
      out.cv_mc = kNaN;
      try {
        rng::Stream gen_rng(cfg.seed, r);
        seqdata::Sequence seq = generate(cfg.gen, gen_rng);
        if (cfg.kind == "power") {
          const int tau = cfg.tau > 0 ? cfg.tau : cfg.gen.n / 2;
          inject_mean_shift(seq, tau, cfg.shift_norm);
        }
        const seqdata::DistanceMatrix dist =
            seqdata::pairwise_distances(seq, cfg.metric);
        const simgraph::Graph g = gspec.mst
                                      ? simgraph::build_mst(dist)
                                      : simgraph::build_knn(dist, gspec.knn_k);
        const std::uint64_t child_seed =
            rng::Stream(cfg.seed, kDetectSeedBase + r).next_u64();

        if (cfg.kind == "critical") {
          const simgraph::EdgeTaxonomy tax = simgraph::classify_edges(g, cfg.L);
          const std::vector<double> e = moments::expectation_curve(tax);
          const moments::Coefficients coef =
              moments::variance_coefficients(g, tax);
          const std::vector<double> var = moments::variance_grid(coef, tax);
          const std::vector<double> sd = moments::sd_curve(var, tax);
          const moments::Window w = moments::default_window(tax.n);
          const std::vector<double> gamma =
              pvalue::skewness_curve(g, w, cfg.skew_b, child_seed, 1);
          out.cv_a1 = pvalue::critical_value(
              [&](double b) {
                return pvalue::pvalue_a1(b, coef, tax.n, cfg.L, w);
              },
              cfg.alpha);
          out.cv_a2 = pvalue::critical_value(
              [&](double b) {
                return pvalue::pvalue_a2(b, coef, tax.n, cfg.L, w, gamma).p;
              },
              cfg.alpha);
          const std::vector<double> samples = pvalue::mc_max_samples(
              g, tax, e, sd, w, cfg.cv_mc_b, child_seed, 1);
          out.cv_mc = pvalue::mc_critical_value(samples, cfg.alpha);
        } else {
          detector::Options opt;
          opt.L = cfg.L;
          opt.with_a1 = cfg.with_analytic;
          opt.with_a2 = cfg.with_analytic;
          opt.mc_b = cfg.mc_b;
          opt.skew_b = cfg.skew_b;
          opt.seed = child_seed;
          opt.workers = 1;
          const detector::ScanResult res = detector::detect(g, opt);
          out.t_hat = res.t_hat;
          out.z_max = res.z_max;
          out.p_a1 = res.p_a1;
          out.p_a2 = res.p_a2;
          out.p_mc = res.p_mc;
        }
        out.ok = true;
      } catch (const std::exception& ex) {
        out.ok = false;
        out.error = ex.what();
      }
    }
  });

  report.n_ok = 0;
  for (const ReplicateResult& rep : report.replicates) {
    if (rep.ok) ++report.n_ok;
  }

  const auto rejection = [&](double ReplicateResult::* field) {
    long long used = 0;
    long long rejected = 0;
    for (const ReplicateResult& rep : report.replicates) {
      if (!rep.ok || !std::isfinite(rep.*field)) continue;
      ++used;
      if (rep.*field <= cfg.alpha) ++rejected;
    }
    return used > 0 ? static_cast<double>(rejected) / static_cast<double>(used)
                    : kNaN;
  };
  report.reject_a1 = rejection(&ReplicateResult::p_a1);
  report.reject_a2 = rejection(&ReplicateResult::p_a2);
  report.reject_mc = rejection(&ReplicateResult::p_mc);

  const auto ks_of = [&](double ReplicateResult::* field) {
    std::vector<double> sample;
    for (const ReplicateResult& rep : report.replicates) {
      if (rep.ok && std::isfinite(rep.*field)) sample.push_back(rep.*field);
    }
    return sample.empty() ? kNaN : stats::ks_statistic_uniform(std::move(sample));
  };
  report.ks_a2 = ks_of(&ReplicateResult::p_a2);
  report.ks_mc = ks_of(&ReplicateResult::p_mc);

  const auto mean_of = [&](double ReplicateResult::* field) {
    stats::KahanSum acc;
    long long used = 0;
    for (const ReplicateResult& rep : report.replicates) {
      if (!rep.ok || !std::isfinite(rep.*field)) continue;
      acc.add(rep.*field);
      ++used;
    }
    return used > 0 ? acc.sum / static_cast<double>(used) : kNaN;
  };
  report.cv_a1 = mean_of(&ReplicateResult::cv_a1);
  report.cv_a2 = mean_of(&ReplicateResult::cv_a2);
  report.cv_mc = mean_of(&ReplicateResult::cv_mc);
  return report;
}

}  // namespace cbpscan::simlab
