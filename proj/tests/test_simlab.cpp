#include <cmath>
#include <vector>

#include <doctest.h>

#include "cbpscan/common.hpp"
#include "cbpscan/rng.hpp"
#include "cbpscan/simlab.hpp"

using cbpscan::InputError;
namespace simlab = cbpscan::simlab;

namespace {

double mean_of(const std::vector<double>& xs) {
  double s = 0.0;
  for (const double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

// Sample covariance of coordinates (j, k) across rows.
double sample_cov(const cbpscan::seqdata::Sequence& seq, std::size_t j, std::size_t k) {
  double mj = 0.0;
  double mk = 0.0;
  for (std::size_t i = 0; i < seq.n; ++i) {
    mj += seq.at(i, j);
    mk += seq.at(i, k);
  }
  mj /= static_cast<double>(seq.n);
  mk /= static_cast<double>(seq.n);
  double acc = 0.0;
  for (std::size_t i = 0; i < seq.n; ++i) {
    acc += (seq.at(i, j) - mj) * (seq.at(i, k) - mk);
  }
  return acc / static_cast<double>(seq.n - 1);
}

}  // namespace

TEST_CASE("model and noise names round-trip") {
  CHECK(simlab::parse_model("m1") == simlab::Model::kM1);
  CHECK(simlab::parse_model("M3") == simlab::Model::kM3);
  CHECK(simlab::parse_model("IID") == simlab::Model::kIid);
  CHECK(simlab::model_name(simlab::Model::kM2) == "M2");
  CHECK(simlab::model_name(simlab::Model::kIid) == "iid");
  CHECK_THROWS_AS(simlab::parse_model("m6"), InputError);
  CHECK(simlab::parse_noise("gaussian") == simlab::Noise::kGaussian);
  CHECK(simlab::parse_noise("normal") == simlab::Noise::kGaussian);
  CHECK(simlab::parse_noise("T5") == simlab::Noise::kT5);
  CHECK(simlab::parse_noise("laplace") == simlab::Noise::kLaplace);
  CHECK_THROWS_AS(simlab::parse_noise("cauchy"), InputError);
}

TEST_CASE("generate produces the requested shape deterministically") {
  simlab::GenConfig cfg;
  cfg.model = simlab::Model::kM2;
  cfg.n = 50;
  cfg.d = 7;
  cbpscan::rng::Stream rng_a(5);
  const auto a = simlab::generate(cfg, rng_a);
  CHECK(a.n == 50);
  CHECK(a.dim == 7);
  CHECK(a.values.size() == 350);
  for (const double v : a.values) CHECK(std::isfinite(v));
  cbpscan::rng::Stream rng_b(5);
  const auto b = simlab::generate(cfg, rng_b);
  CHECK(a.values == b.values);
}

TEST_CASE("generate validates its configuration") {
  simlab::GenConfig cfg;
  cfg.n = 0;
  cbpscan::rng::Stream rng(1);
  CHECK_THROWS_AS(simlab::generate(cfg, rng), InputError);
  cfg.n = 10;
  cfg.d = 0;
  CHECK_THROWS_AS(simlab::generate(cfg, rng), InputError);
  cfg.d = 2;
  cfg.sigma_rho = 1.0;
  CHECK_THROWS_AS(simlab::generate(cfg, rng), InputError);
  cfg.sigma_rho = 0.6;
  cfg.burn_in = -1;
  CHECK_THROWS_AS(simlab::generate(cfg, rng), InputError);
  cfg.burn_in = 10;
  cfg.model = simlab::Model::kM3;
  cfg.stationary_init = true;
  CHECK_THROWS_WITH_AS(simlab::generate(cfg, rng),
                       doctest::Contains("stationary"), InputError);
  cfg.model = simlab::Model::kM1;
  CHECK_NOTHROW(simlab::generate(cfg, rng));
}

TEST_CASE("first-order autoregression has the configured lag-one correlation") {
  simlab::GenConfig cfg;
  cfg.model = simlab::Model::kM1;
  cfg.n = 20000;
  cfg.d = 1;
  cbpscan::rng::Stream rng(11);
  const auto seq = simlab::generate(cfg, rng);
  std::vector<double> x(seq.values);
  const double m = mean_of(x);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    den += (x[i] - m) * (x[i] - m);
    if (i + 1 < x.size()) num += (x[i] - m) * (x[i + 1] - m);
  }
  const double lag1 = num / den;
  CHECK(lag1 == doctest::Approx(0.1).epsilon(0.35));
  // Unit-variance noise drives the recursion; marginal variance is
  // 1/(1 - 0.1^2).
  CHECK(den / static_cast<double>(x.size()) ==
        doctest::Approx(1.0 / 0.99).epsilon(0.06));
}

TEST_CASE("heavy-tailed noise kinds are scaled to unit variance") {
  for (const auto noise : {simlab::Noise::kT5, simlab::Noise::kLaplace}) {
    simlab::GenConfig cfg;
    cfg.model = simlab::Model::kIid;
    cfg.noise = noise;
    cfg.n = 20000;
    cfg.d = 1;
    cfg.burn_in = 0;
    cbpscan::rng::Stream rng(13);
    const auto seq = simlab::generate(cfg, rng);
    CHECK(sample_cov(seq, 0, 0) == doctest::Approx(1.0).epsilon(0.12));
    CHECK(std::abs(mean_of(seq.values)) < 0.05);
  }
}

TEST_CASE("cross-coordinate correlation decays geometrically") {
  simlab::GenConfig cfg;
  cfg.model = simlab::Model::kIid;
  cfg.n = 40000;
  cfg.d = 4;
  cfg.burn_in = 0;
  cfg.sigma_rho = 0.6;
  cbpscan::rng::Stream rng(17);
  const auto seq = simlab::generate(cfg, rng);
  CHECK(sample_cov(seq, 0, 0) == doctest::Approx(1.0).epsilon(0.06));
  CHECK(sample_cov(seq, 0, 1) == doctest::Approx(0.6).epsilon(0.08));
  CHECK(sample_cov(seq, 0, 2) == doctest::Approx(0.36).epsilon(0.12));
  CHECK(sample_cov(seq, 0, 3) == doctest::Approx(0.216).epsilon(0.2));
  CHECK(sample_cov(seq, 1, 3) == doctest::Approx(0.36).epsilon(0.12));
}

TEST_CASE("inject_mean_shift moves the tail rows by delta/sqrt(d)") {
  cbpscan::seqdata::Sequence seq;
  seq.n = 5;
  seq.dim = 4;
  seq.values.assign(20, 1.0);
  simlab::inject_mean_shift(seq, 2, 2.0);  // 2/sqrt(4) = 1 per coordinate
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t k = 0; k < 4; ++k) CHECK(seq.at(i, k) == 1.0);
  }
  for (std::size_t i = 2; i < 5; ++i) {
    for (std::size_t k = 0; k < 4; ++k) CHECK(seq.at(i, k) == 2.0);
  }
  CHECK_THROWS_AS(simlab::inject_mean_shift(seq, 0, 1.0), InputError);
  CHECK_THROWS_AS(simlab::inject_mean_shift(seq, 5, 1.0), InputError);
}

TEST_CASE("run_experiment is reproducible and worker-count independent") {
  simlab::ExperimentConfig cfg;
  cfg.kind = "type1";
  cfg.gen.model = simlab::Model::kM1;
  cfg.gen.n = 40;
  cfg.gen.d = 3;
  cfg.gen.burn_in = 50;
  cfg.L = 2;
  cfg.replicates = 6;
  cfg.skew_b = 1000;
  cfg.seed = 9;
  cfg.workers = 1;
  const auto a = simlab::run_experiment(cfg);
  CHECK(a.n_ok == 6);
  REQUIRE(a.replicates.size() == 6);
  for (const auto& r : a.replicates) {
    CHECK(r.ok);
    CHECK(std::isfinite(r.z_max));
    CHECK(r.p_a1 > 0.0);
    CHECK(r.p_a1 <= 1.0);
    CHECK(r.p_a2 > 0.0);
    CHECK(r.p_a2 <= 1.0);
  }
  cfg.workers = 3;
  const auto b = simlab::run_experiment(cfg);
  REQUIRE(b.replicates.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(a.replicates[i].z_max == b.replicates[i].z_max);
    CHECK(a.replicates[i].t_hat == b.replicates[i].t_hat);
    CHECK(a.replicates[i].p_a1 == b.replicates[i].p_a1);
    CHECK(a.replicates[i].p_a2 == b.replicates[i].p_a2);
  }
  CHECK(a.reject_a1 == b.reject_a1);
  CHECK(a.reject_a2 == b.reject_a2);
}

TEST_CASE("run_experiment power kind plants the change at midpoint by default") {
  simlab::ExperimentConfig cfg;
  cfg.kind = "power";
  cfg.gen.model = simlab::Model::kIid;
  cfg.gen.n = 60;
  cfg.gen.d = 4;
  cfg.gen.burn_in = 0;
  cfg.L = 1;
  cfg.replicates = 5;
  cfg.skew_b = 1000;
  cfg.shift_norm = 6.0;  // large shift so the location is obvious
  cfg.seed = 31;
  const auto rep = simlab::run_experiment(cfg);
  CHECK(rep.n_ok == 5);
  for (const auto& r : rep.replicates) {
    CHECK(r.ok);
    CHECK(r.t_hat >= 20);
    CHECK(r.t_hat <= 40);
    CHECK(r.p_a2 < 0.2);
  }
}

TEST_CASE("run_experiment critical kind produces ordered thresholds") {
  simlab::ExperimentConfig cfg;
  cfg.kind = "critical";
  cfg.gen.model = simlab::Model::kM1;
  cfg.gen.n = 40;
  cfg.gen.d = 3;
  cfg.gen.burn_in = 50;
  cfg.L = 2;
  cfg.replicates = 2;
  cfg.skew_b = 1000;
  cfg.cv_mc_b = 400;
  cfg.seed = 23;
  const auto rep = simlab::run_experiment(cfg);
  CHECK(rep.n_ok == 2);
  CHECK(std::isfinite(rep.cv_a1));
  CHECK(std::isfinite(rep.cv_a2));
  CHECK(std::isfinite(rep.cv_mc));
  CHECK(rep.cv_a1 >= 1.0);
  CHECK(rep.cv_a1 <= 8.0);
  CHECK(rep.cv_a2 >= 1.0);
  CHECK(rep.cv_a2 <= 8.0);
  CHECK(rep.cv_mc > 0.0);
  // The skewness correction can only tighten the upper tail here, so its
  // threshold is no larger than the uncorrected one.
  CHECK(rep.cv_a2 <= rep.cv_a1 + 1e-9);
}

TEST_CASE("run_experiment validates configuration") {
  simlab::ExperimentConfig cfg;
  cfg.replicates = 0;
  CHECK_THROWS_AS(simlab::run_experiment(cfg), InputError);
  cfg.replicates = 1;
  cfg.alpha = 1.5;
  CHECK_THROWS_AS(simlab::run_experiment(cfg), InputError);
  cfg.alpha = 0.05;
  cfg.kind = "bogus";
  CHECK_THROWS_AS(simlab::run_experiment(cfg), InputError);
  cfg.kind = "type1";
  cfg.graph = "knn";
  CHECK_THROWS_AS(simlab::run_experiment(cfg), InputError);
}

TEST_CASE("failed replicates are recorded, not fatal") {
  simlab::ExperimentConfig cfg;
  cfg.kind = "type1";
  cfg.gen.model = simlab::Model::kIid;
  cfg.gen.n = 21;
  cfg.gen.d = 2;
  cfg.gen.burn_in = 0;
  cfg.L = 6;  // pads 21 to 24, m = 4 works; L=7 would leave 3 blocks
  cfg.replicates = 2;
  cfg.skew_b = 1000;
  const auto ok_rep = simlab::run_experiment(cfg);
  CHECK(ok_rep.n_ok == 2);
  cfg.L = 7;  // 21 positions, 3 blocks: every replicate fails
  const auto rep = simlab::run_experiment(cfg);
  CHECK(rep.n_ok == 0);
  REQUIRE(rep.replicates.size() == 2);
  for (const auto& r : rep.replicates) {
    CHECK_FALSE(r.ok);
    CHECK_FALSE(r.error.empty());
  }
  CHECK(std::isnan(rep.reject_a1));
}
