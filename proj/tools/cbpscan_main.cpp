// Command-line front end for the circular-block-permutation scan toolkit:
// detect, select-l, simulate, critical-value, oracle-check. Reports are JSON
// (deterministic for fixed inputs, seed, and worker count); curves and
// per-replicate tables are CSV.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cbpscan/common.hpp"
#include "cbpscan/detector.hpp"
#include "cbpscan/moments.hpp"
#include "cbpscan/oracle.hpp"
#include "cbpscan/parallel.hpp"
#include "cbpscan/pvalue.hpp"
#include "cbpscan/seqdata.hpp"
#include "cbpscan/simgraph.hpp"
#include "cbpscan/simlab.hpp"

namespace {

using nlohmann::ordered_json;
using namespace cbpscan;

ordered_json json_number(double v) {
  return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr);
}

ordered_json json_number_list(const std::vector<double>& values) {
  ordered_json out = ordered_json::array();
  for (const double v : values) out.push_back(json_number(v));
  return out;
}

void write_report(const ordered_json& report, const std::string& out_path) {
  const std::string text = report.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw InputError("cannot write output file '" + out_path + "'");
  out << text;
}

int parse_positive_int(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const int value = std::stoi(text, &used);
    if (used == text.size() && value >= 1) return value;
  } catch (const std::exception&) {
  }
  throw InputError("bad " + what + " '" + text + "'");
}

// ---- shared input plumbing ------------------------------------------------

struct InputOptions {
  std::string path;
  std::string format = "csv";  // csv | dist | edges
  int n_for_edges = 0;
  std::string graph = "mst";  // mst | knn:K | edges:PATH
  std::string metric = "euclidean";
};

void add_input_flags(CLI::App* cmd, InputOptions& in) {
  cmd->add_option("--input", in.path, "input file (observations, distances, or edges)")
      ->required();
  cmd->add_option("--input-format", in.format,
                  "csv (rows = observations) | dist (square distance matrix) | "
                  "edges (1-based edge list; needs --n)")
      ->check(CLI::IsMember({"csv", "dist", "edges"}));
  cmd->add_option("--n", in.n_for_edges,
                  "observation count, required for edge-list input");
  cmd->add_option("--graph", in.graph,
                  "similarity graph: mst | knn:K | edges:PATH (ignored for "
                  "edge-list input)");
  cmd->add_option("--metric", in.metric, "euclidean | l1 (csv input only)");
}

struct LoadedGraph {
  simgraph::Graph graph;
  std::string resolved;  // graph description for the report
};

LoadedGraph load_graph(const InputOptions& in) {
  if (in.format == "edges") {
    if (in.n_for_edges < 2) {
      throw InputError("edge-list input needs --n (observation count >= 2)");
    }
    const auto pairs = seqdata::load_edge_list(in.path, in.n_for_edges);
    return {simgraph::graph_from_edges(in.n_for_edges, pairs),
            "edges:" + in.path};
  }
  seqdata::DistanceMatrix dist;
  if (in.format == "dist") {
    dist = seqdata::load_distance_matrix(in.path);
  } else {
    const seqdata::Sequence seq = seqdata::load_csv_rows(in.path);
    dist = seqdata::pairwise_distances(seq, seqdata::parse_metric(in.metric));
  }
  const int n = static_cast<int>(dist.n);
  if (in.graph == "mst") return {simgraph::build_mst(dist), "mst"};
  if (in.graph.rfind("knn:", 0) == 0) {
    const int k = parse_positive_int(in.graph.substr(4), "neighbor count");
    return {simgraph::build_knn(dist, k), in.graph};
  }
  if (in.graph.rfind("edges:", 0) == 0) {
    const std::string path = in.graph.substr(6);
    const auto pairs = seqdata::load_edge_list(path, n);
    return {simgraph::graph_from_edges(n, pairs), in.graph};
  }
  throw InputError("unknown graph spec '" + in.graph +
                   "' (expected mst, knn:K, or edges:PATH)");
}

// ---- window flags -----------------------------------------------------------

struct WindowOptions {
  std::string explicit_range;  // "lo:hi", empty for fractional trimming
  double frac = 0.05;
};

void add_window_flags(CLI::App* cmd, WindowOptions& w) {
  cmd->add_option("--window", w.explicit_range,
                  "explicit scan window lo:hi (1-based cut positions)");
  cmd->add_option("--window-frac", w.frac,
                  "fraction trimmed from each side when no explicit window")
      ->check(CLI::Range(0.0, 0.49));
}

std::optional<moments::Window> resolve_window(const WindowOptions& w, int n) {
  if (!w.explicit_range.empty()) {
    const auto colon = w.explicit_range.find(':');
    if (colon == std::string::npos) {
      throw InputError("bad window '" + w.explicit_range + "' (expected lo:hi)");
    }
    moments::Window win;
    win.lo = parse_positive_int(w.explicit_range.substr(0, colon), "window low edge");
    win.hi = parse_positive_int(w.explicit_range.substr(colon + 1), "window high edge");
    return win;
  }
  if (w.frac != 0.05) {
    const int trim = std::max(1, static_cast<int>(std::floor(w.frac * n)));
    moments::Window win{trim, n - trim};
    if (win.lo > win.hi) {
      throw InputError("window fraction leaves no cut positions");
    }
    return win;
  }
  return std::nullopt;  // the detector applies its default trimming
}

ordered_json window_json(const WindowOptions& w) {
  ordered_json out;
  out["explicit"] = w.explicit_range.empty() ? ordered_json(nullptr)
                                             : ordered_json(w.explicit_range);
  out["frac"] = w.frac;
  return out;
}

// ---- p-value selection ------------------------------------------------------

struct PvalueSelection {
  bool a1 = false;
  bool a2 = false;
  bool mc = false;
  int mc_b = 1000;
};

PvalueSelection parse_pvalue_spec(const std::string& spec, int mc_b_flag) {
  PvalueSelection sel;
  sel.mc_b = mc_b_flag;
  std::size_t start = 0;
  while (start <= spec.size()) {
    const std::size_t comma = spec.find(',', start);
    const std::string token = spec.substr(
        start, comma == std::string::npos ? std::string::npos : comma - start);
    if (token == "a1") {
      sel.a1 = true;
    } else if (token == "a2") {
      sel.a2 = true;
    } else if (token == "mc") {
      sel.mc = true;
    } else if (token.rfind("mc:", 0) == 0) {
      sel.mc = true;
      sel.mc_b = parse_positive_int(token.substr(3), "Monte Carlo sample count");
    } else if (token == "all") {
      sel.a1 = sel.a2 = sel.mc = true;
    } else if (token == "none") {
      sel.a1 = sel.a2 = sel.mc = false;
    } else {
      throw InputError("unknown p-value kind '" + token +
                       "' (expected a1, a2, mc, mc:B, all, none)");
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return sel;
}

ordered_json pvalue_json(const PvalueSelection& sel) {
  ordered_json kinds = ordered_json::array();
  if (sel.a1) kinds.push_back("a1");
  if (sel.a2) kinds.push_back("a2");
  if (sel.mc) kinds.push_back("mc");
  return kinds;
}

// ---- detect -----------------------------------------------------------------

struct DetectOptions {
  InputOptions input;
  WindowOptions window;
  std::string l_spec = "1";
  std::vector<int> candidates;
  double threshold = 0.99;
  std::string pvalue_spec = "a1,a2";
  int mc_b = 1000;
  int skew_b = 10000;
  std::uint64_t seed = 0;
  int workers = 0;
  std::string out;
  std::string curve_out;
};

void write_curve_csv(const std::string& path, const detector::ScanResult& res) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write curve file '" + path + "'");
  out << "t,r,e,sd,z\n";
  char line[160];
  for (int t = 0; t <= res.n; ++t) {
    const auto i = static_cast<std::size_t>(t);
    std::snprintf(line, sizeof line, "%d,%d,%.17g,%.17g,%.17g\n", t,
                  res.r_obs[i], res.e[i], res.sd[i], res.z[i]);
    out << line;
  }
}

ordered_json selection_json(const detector::LSelection& sel) {
  ordered_json out;
  out["candidates"] = sel.candidates;
  out["skipped"] = sel.skipped;
  out["z_max"] = json_number_list(sel.z_max);
  out["ratio"] = json_number_list(sel.ratio);
  out["threshold"] = sel.threshold;
  out["chosen_L"] = sel.chosen_L;
  out["fallback"] = sel.fallback;
  return out;
}

int cmd_detect(const DetectOptions& o) {
  const PvalueSelection psel = parse_pvalue_spec(o.pvalue_spec, o.mc_b);
  const int workers = parallel::resolve_workers(o.workers);
  const LoadedGraph lg = load_graph(o.input);
  const std::optional<moments::Window> window =
      resolve_window(o.window, lg.graph.n_nodes);

  int L = 0;
  ordered_json trace = nullptr;
  if (o.l_spec == "auto") {
    const detector::LSelection sel =
        detector::select_L(lg.graph, o.candidates, o.threshold, window);
    L = sel.chosen_L;
    trace = selection_json(sel);
  } else {
    L = parse_positive_int(o.l_spec, "block length");
  }

  detector::Options opt;
  opt.L = L;
  opt.window = window;
  opt.with_a1 = psel.a1;
  opt.with_a2 = psel.a2;
  opt.mc_b = psel.mc ? psel.mc_b : 0;
  opt.skew_b = o.skew_b;
  opt.seed = o.seed;
  opt.workers = workers;
  const detector::ScanResult res = detector::detect(lg.graph, opt);

  ordered_json report;
  report["version"] = kVersion;
  report["command"] = "detect";
  ordered_json config;
  config["input"] = o.input.path;
  config["input_format"] = o.input.format;
  config["graph"] = lg.resolved;
  config["metric"] = o.input.metric;
  config["L"] = o.l_spec == "auto" ? ordered_json("auto") : ordered_json(L);
  config["window"] = window_json(o.window);
  config["pvalue"] = pvalue_json(psel);
  if (psel.mc) config["mc_b"] = psel.mc_b;
  if (psel.a2) config["skew_b"] = o.skew_b;
  config["seed"] = o.seed;
  config["workers"] = workers;
  report["config"] = config;

  report["t_hat"] = res.t_hat;
  report["z_max"] = json_number(res.z_max);
  report["window"] = ordered_json{{"lo", res.window.lo}, {"hi", res.window.hi}};
  report["L"] = res.L;
  report["m"] = res.m;
  report["n_raw"] = res.n_raw;
  report["n"] = res.n;
  report["x_aug"] = res.x_aug;
  report["graph"] = ordered_json{{"type", lg.resolved},
                                 {"edges", lg.graph.edges.size()}};
  report["p_a1"] = json_number(res.p_a1);
  report["p_a2"] = json_number(res.p_a2);
  report["p_mc"] = json_number(res.p_mc);
  if (psel.mc) {
    report["mc"] = ordered_json{{"count_geq", res.mc_count}, {"B", res.mc_b}};
  }
  if (psel.a2) report["skipped_t"] = res.skipped_t;
  if (!trace.is_null()) report["L_trace"] = trace;

  if (!o.curve_out.empty()) write_curve_csv(o.curve_out, res);
  write_report(report, o.out);

  std::fprintf(stderr, "t_hat=%d z_max=%.6g", res.t_hat, res.z_max);
  if (psel.a1) std::fprintf(stderr, " p_a1=%.6g", res.p_a1);
  if (psel.a2) std::fprintf(stderr, " p_a2=%.6g", res.p_a2);
  if (psel.mc) std::fprintf(stderr, " p_mc=%.6g", res.p_mc);
  std::fprintf(stderr, " (n_raw=%d, L=%d, m=%d, x_aug=%d)\n", res.n_raw, res.L,
               res.m, res.x_aug);
  return 0;
}

// ---- select-l ---------------------------------------------------------------

struct SelectLOptions {
  InputOptions input;
  WindowOptions window;
  std::vector<int> candidates;
  double threshold = 0.99;
  std::string out;
};

int cmd_select_l(const SelectLOptions& o) {
  const LoadedGraph lg = load_graph(o.input);
  const std::optional<moments::Window> window =
      resolve_window(o.window, lg.graph.n_nodes);
  const detector::LSelection sel =
      detector::select_L(lg.graph, o.candidates, o.threshold, window);

  ordered_json report;
  report["version"] = kVersion;
  report["command"] = "select-l";
  ordered_json config;
  config["input"] = o.input.path;
  config["input_format"] = o.input.format;
  config["graph"] = lg.resolved;
  config["metric"] = o.input.metric;
  config["candidates"] = o.candidates;
  config["threshold"] = o.threshold;
  config["window"] = window_json(o.window);
  report["config"] = config;
  report["selection"] = selection_json(sel);
  write_report(report, o.out);

  std::fprintf(stderr, "chosen_L=%d%s\n", sel.chosen_L,
               sel.fallback ? " (fallback: no ratio reached the threshold)" : "");
  return 0;
}

// ---- critical-value ---------------------------------------------------------

struct CriticalValueOptions {
  InputOptions input;
  WindowOptions window;
  int L = 1;
  double alpha = 0.05;
  int cv_mc_b = 10000;
  int skew_b = 10000;
  std::uint64_t seed = 0;
  int workers = 0;
  std::string out;
};

int cmd_critical_value(const CriticalValueOptions& o) {
  const int workers = parallel::resolve_workers(o.workers);
  const LoadedGraph lg = load_graph(o.input);
  const simgraph::EdgeTaxonomy tax = simgraph::classify_edges(lg.graph, o.L);
  const std::vector<double> e = moments::expectation_curve(tax);
  const moments::Coefficients coef = moments::variance_coefficients(lg.graph, tax);
  const std::vector<double> var = moments::variance_grid(coef, tax);
  const std::vector<double> sd = moments::sd_curve(var, tax);
  const moments::Window w = resolve_window(o.window, lg.graph.n_nodes)
                                .value_or(moments::default_window(tax.n));
  const std::vector<double> gamma =
      pvalue::skewness_curve(lg.graph, w, o.skew_b, o.seed, workers);
  const double cv_a1 = pvalue::critical_value(
      [&](double b) { return pvalue::pvalue_a1(b, coef, tax.n, o.L, w); },
      o.alpha);
  const double cv_a2 = pvalue::critical_value(
      [&](double b) {
        return pvalue::pvalue_a2(b, coef, tax.n, o.L, w, gamma).p;
      },
      o.alpha);
  const std::vector<double> samples =
      pvalue::mc_max_samples(lg.graph, tax, e, sd, w, o.cv_mc_b, o.seed, workers);
  const double cv_mc = pvalue::mc_critical_value(samples, o.alpha);

  ordered_json report;
  report["version"] = kVersion;
  report["command"] = "critical-value";
  ordered_json config;
  config["input"] = o.input.path;
  config["input_format"] = o.input.format;
  config["graph"] = lg.resolved;
  config["metric"] = o.input.metric;
  config["L"] = o.L;
  config["alpha"] = o.alpha;
  config["cv_mc_b"] = o.cv_mc_b;
  config["skew_b"] = o.skew_b;
  config["window"] = window_json(o.window);
  config["seed"] = o.seed;
  config["workers"] = workers;
  report["config"] = config;
  report["n_raw"] = tax.n_raw;
  report["n"] = tax.n;
  report["m"] = tax.m;
  report["x_aug"] = tax.x_aug;
  report["window"] = ordered_json{{"lo", w.lo}, {"hi", w.hi}};
  report["cv_a1"] = json_number(cv_a1);
  report["cv_a2"] = json_number(cv_a2);
  report["cv_mc"] = json_number(cv_mc);
  write_report(report, o.out);

  std::fprintf(stderr, "cv_a1=%.6g cv_a2=%.6g cv_mc=%.6g (alpha=%g, L=%d)\n",
               cv_a1, cv_a2, cv_mc, o.alpha, o.L);
  return 0;
}

// ---- simulate ---------------------------------------------------------------

struct SimulateOptions {
  std::string kind = "type1";
  std::string model = "m1";
  std::string noise = "gaussian";
  int n = 200;
  int d = 10;
  double sigma_rho = 0.6;
  int burn_in = 1000;
  bool stationary_init = false;
  std::string graph = "mst";
  std::string metric = "euclidean";
  int L = 5;
  double alpha = 0.05;
  int replicates = 500;
  bool no_analytic = false;
  int mc_b = 0;
  int skew_b = 10000;
  int cv_mc_b = 10000;
  double shift_norm = 2.0;
  int tau = 0;
  std::uint64_t seed = 1;
  int workers = 0;
  std::string out;
  std::string table_out;
};

void write_replicate_table(const std::string& path,
                           const simlab::ExperimentReport& report) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write table file '" + path + "'");
  out << "rep,ok,t_hat,z_max,p_a1,p_a2,p_mc,cv_a1,cv_a2,cv_mc,error\n";
  char line[256];
  for (const simlab::ReplicateResult& r : report.replicates) {
    std::snprintf(line, sizeof line,
                  "%d,%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,",
                  r.rep, r.ok ? 1 : 0, r.t_hat, r.z_max, r.p_a1, r.p_a2, r.p_mc,
                  r.cv_a1, r.cv_a2, r.cv_mc);
    out << line << r.error << "\n";
  }
}

int cmd_simulate(const SimulateOptions& o) {
  simlab::ExperimentConfig cfg;
  cfg.kind = o.kind;
  cfg.gen.model = simlab::parse_model(o.model);
  cfg.gen.noise = simlab::parse_noise(o.noise);
  cfg.gen.n = o.n;
  cfg.gen.d = o.d;
  cfg.gen.sigma_rho = o.sigma_rho;
  cfg.gen.burn_in = o.burn_in;
  cfg.gen.stationary_init = o.stationary_init;
  cfg.graph = o.graph;
  cfg.metric = seqdata::parse_metric(o.metric);
  cfg.L = o.L;
  cfg.alpha = o.alpha;
  cfg.replicates = o.replicates;
  cfg.with_analytic = !o.no_analytic;
  cfg.mc_b = o.mc_b;
  cfg.skew_b = o.skew_b;
  cfg.cv_mc_b = o.cv_mc_b;
  cfg.shift_norm = o.shift_norm;
  cfg.tau = o.tau;
  cfg.seed = o.seed;
  cfg.workers = parallel::resolve_workers(o.workers);
  const simlab::ExperimentReport report = simlab::run_experiment(cfg);

  ordered_json doc;
  doc["version"] = kVersion;
  doc["command"] = "simulate";
  ordered_json config;
  config["kind"] = cfg.kind;
  config["model"] = simlab::model_name(cfg.gen.model);
  config["noise"] = simlab::noise_name(cfg.gen.noise);
  config["n"] = cfg.gen.n;
  config["d"] = cfg.gen.d;
  config["sigma_rho"] = cfg.gen.sigma_rho;
  config["burn_in"] = cfg.gen.burn_in;
  config["stationary_init"] = cfg.gen.stationary_init;
  config["graph"] = cfg.graph;
  config["metric"] = o.metric;
  config["L"] = cfg.L;
  config["alpha"] = cfg.alpha;
  config["replicates"] = cfg.replicates;
  config["with_analytic"] = cfg.with_analytic;
  config["mc_b"] = cfg.mc_b;
  config["skew_b"] = cfg.skew_b;
  config["cv_mc_b"] = cfg.cv_mc_b;
  config["shift_norm"] = cfg.shift_norm;
  config["tau"] = cfg.tau;
  config["seed"] = cfg.seed;
  config["workers"] = cfg.workers;
  doc["config"] = config;

  doc["n_ok"] = report.n_ok;
  doc["reject_a1"] = json_number(report.reject_a1);
  doc["reject_a2"] = json_number(report.reject_a2);
  doc["reject_mc"] = json_number(report.reject_mc);
  doc["ks_a2"] = json_number(report.ks_a2);
  doc["ks_mc"] = json_number(report.ks_mc);
  doc["cv_a1"] = json_number(report.cv_a1);
  doc["cv_a2"] = json_number(report.cv_a2);
  doc["cv_mc"] = json_number(report.cv_mc);
  ordered_json reps = ordered_json::array();
  for (const simlab::ReplicateResult& r : report.replicates) {
    ordered_json row;
    row["rep"] = r.rep;
    row["ok"] = r.ok;
    if (!r.ok) row["error"] = r.error;
    row["t_hat"] = r.t_hat;
    row["z_max"] = json_number(r.z_max);
    row["p_a1"] = json_number(r.p_a1);
    row["p_a2"] = json_number(r.p_a2);
    row["p_mc"] = json_number(r.p_mc);
    if (o.kind == "critical") {
      row["cv_a1"] = json_number(r.cv_a1);
      row["cv_a2"] = json_number(r.cv_a2);
      row["cv_mc"] = json_number(r.cv_mc);
    }
    reps.push_back(std::move(row));
  }
  doc["replicates"] = reps;

  if (!o.table_out.empty()) write_replicate_table(o.table_out, report);
  write_report(doc, o.out);

  if (o.kind == "critical") {
    std::fprintf(stderr, "n_ok=%d cv_a1=%.6g cv_a2=%.6g cv_mc=%.6g\n",
                 report.n_ok, report.cv_a1, report.cv_a2, report.cv_mc);
  } else {
    std::fprintf(stderr,
                 "n_ok=%d reject_a1=%.6g reject_a2=%.6g reject_mc=%.6g "
                 "ks_a2=%.6g ks_mc=%.6g\n",
                 report.n_ok, report.reject_a1, report.reject_a2,
                 report.reject_mc, report.ks_a2, report.ks_mc);
  }
  return 0;
}

// ---- oracle-check -----------------------------------------------------------

struct OracleCheckOptions {
  int instances = 200;
  std::uint64_t seed = 20250819;
  int max_n = 0;  // 0 keeps the default sizes {4, 6, 8}
  std::vector<int> l_set = {1, 2, 3};
  bool no_extras = false;
  int workers = 0;
  double corrupt_c1 = 0.0;
  std::string out;
};

int cmd_oracle_check(const OracleCheckOptions& o) {
  oracle::SuiteConfig cfg;
  cfg.instances = o.instances;
  cfg.seed = o.seed;
  if (o.max_n > 0) {
    if (o.max_n < 4) throw InputError("--max-n must be at least 4");
    cfg.sizes.clear();
    for (int n = 4; n <= o.max_n; ++n) cfg.sizes.push_back(n);
  }
  cfg.l_set = o.l_set;
  cfg.branch_extras = !o.no_extras;
  cfg.workers = parallel::resolve_workers(o.workers);
  cfg.corrupt_c1 = o.corrupt_c1;
  const oracle::SuiteReport report = oracle::run_suite(cfg);

  std::cout << oracle::format_report(report);
  if (!report.pass && report.first_failure.find("budget") != std::string::npos) {
    std::cout << "enumeration too large; reduce --max-n\n";
  }

  if (!o.out.empty()) {
    ordered_json doc;
    doc["version"] = kVersion;
    doc["command"] = "oracle-check";
    ordered_json config;
    config["instances"] = cfg.instances;
    config["seed"] = cfg.seed;
    config["sizes"] = cfg.sizes;
    config["l_set"] = cfg.l_set;
    config["branch_extras"] = cfg.branch_extras;
    config["workers"] = cfg.workers;
    doc["config"] = config;
    doc["instances_run"] = report.instances_run;
    doc["checks"] = report.checks;
    doc["max_err_e"] = report.max_err_e;
    doc["max_err_var"] = report.max_err_var;
    doc["max_err_cov"] = report.max_err_cov;
    doc["max_err_coef"] = report.max_err_coef;
    doc["shared_within"] = report.coverage.shared_within;
    doc["disjoint_within"] = report.coverage.disjoint_within;
    doc["coverage_ok"] = report.coverage_ok;
    doc["pass"] = report.pass;
    doc["first_failure"] = report.first_failure;
    write_report(doc, o.out);
  }
  return report.pass ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"graph-based change-point scan under circular block permutation"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  DetectOptions det;
  CLI::App* detect_cmd =
      app.add_subcommand("detect", "scan a sequence for a change point");
  add_input_flags(detect_cmd, det.input);
  add_window_flags(detect_cmd, det.window);
  detect_cmd->add_option("--L", det.l_spec, "block length, or 'auto'");
  detect_cmd->add_option("--candidates", det.candidates,
                         "candidate block lengths for --L auto")
      ->delimiter(',');
  detect_cmd->add_option("--threshold", det.threshold,
                         "stabilization ratio threshold for --L auto");
  detect_cmd->add_option("--pvalue", det.pvalue_spec,
                         "comma list of a1, a2, mc, mc:B; or all / none");
  detect_cmd->add_option("--mc-b", det.mc_b, "Monte Carlo p-value samples");
  detect_cmd->add_option("--skew-b", det.skew_b,
                         "permutations for the skewness estimate");
  detect_cmd->add_option("--seed", det.seed, "random seed");
  detect_cmd->add_option("--workers", det.workers,
                         "worker threads (0: CBPSCAN_WORKERS or 1)");
  detect_cmd->add_option("--out", det.out, "JSON report path (default stdout)");
  detect_cmd->add_option("--curve-out", det.curve_out,
                         "CSV path for the t, r, e, sd, z curves");

  SelectLOptions sl;
  CLI::App* select_cmd =
      app.add_subcommand("select-l", "choose a block length from the data");
  add_input_flags(select_cmd, sl.input);
  add_window_flags(select_cmd, sl.window);
  select_cmd->add_option("--candidates", sl.candidates,
                         "candidate block lengths (default 1..12)")
      ->delimiter(',');
  select_cmd->add_option("--threshold", sl.threshold,
                         "stabilization ratio threshold");
  select_cmd->add_option("--out", sl.out, "JSON report path (default stdout)");

  CriticalValueOptions cv;
  CLI::App* cv_cmd = app.add_subcommand(
      "critical-value", "scan-maximum thresholds for a given dataset");
  add_input_flags(cv_cmd, cv.input);
  add_window_flags(cv_cmd, cv.window);
  cv_cmd->add_option("--L", cv.L, "block length");
  cv_cmd->add_option("--alpha", cv.alpha, "significance level");
  cv_cmd->add_option("--cv-mc-b", cv.cv_mc_b, "Monte Carlo samples");
  cv_cmd->add_option("--skew-b", cv.skew_b,
                     "permutations for the skewness estimate");
  cv_cmd->add_option("--seed", cv.seed, "random seed");
  cv_cmd->add_option("--workers", cv.workers,
                     "worker threads (0: CBPSCAN_WORKERS or 1)");
  cv_cmd->add_option("--out", cv.out, "JSON report path (default stdout)");

  SimulateOptions sim;
  CLI::App* sim_cmd =
      app.add_subcommand("simulate", "replicated null / power / threshold runs");
  sim_cmd->set_config("--config", "",
                      "flat key=value file with these same option names");
  sim_cmd->add_option("--kind", sim.kind, "type1 | power | critical")
      ->check(CLI::IsMember({"type1", "power", "critical"}));
  sim_cmd->add_option("--model", sim.model, "m1..m5 or iid");
  sim_cmd->add_option("--noise", sim.noise, "gaussian | t5 | laplace");
  sim_cmd->add_option("--n", sim.n, "sequence length");
  sim_cmd->add_option("--d", sim.d, "dimension");
  sim_cmd->add_option("--sigma-rho", sim.sigma_rho,
                      "cross-coordinate correlation decay");
  sim_cmd->add_option("--burn-in", sim.burn_in, "warm-up steps");
  sim_cmd->add_flag("--stationary-init", sim.stationary_init,
                    "exact stationary start (first-order gaussian only)");
  sim_cmd->add_option("--graph", sim.graph, "mst | knn:K");
  sim_cmd->add_option("--metric", sim.metric, "euclidean | l1");
  sim_cmd->add_option("--L", sim.L, "block length");
  sim_cmd->add_option("--alpha", sim.alpha, "significance level");
  sim_cmd->add_option("--replicates", sim.replicates, "replicate count");
  sim_cmd->add_flag("--no-analytic", sim.no_analytic,
                    "skip the analytic p-values");
  sim_cmd->add_option("--mc-b", sim.mc_b,
                      "Monte Carlo p-value samples per replicate (0: skip)");
  sim_cmd->add_option("--skew-b", sim.skew_b,
                      "permutations for the skewness estimate");
  sim_cmd->add_option("--cv-mc-b", sim.cv_mc_b,
                      "Monte Carlo samples for kind=critical");
  sim_cmd->add_option("--shift-norm", sim.shift_norm,
                      "mean shift size for kind=power");
  sim_cmd->add_option("--tau", sim.tau, "change position (0: midpoint)");
  sim_cmd->add_option("--seed", sim.seed, "random seed");
  sim_cmd->add_option("--workers", sim.workers,
                      "worker threads (0: CBPSCAN_WORKERS or 1)");
  sim_cmd->add_option("--out", sim.out, "JSON report path (default stdout)");
  sim_cmd->add_option("--table-out", sim.table_out,
                      "CSV path for the per-replicate table");

  OracleCheckOptions oc;
  CLI::App* oracle_cmd = app.add_subcommand(
      "oracle-check", "compare the closed-form moments with exhaustive "
                      "enumeration on small instances");
  oracle_cmd->add_option("--instances", oc.instances, "random instances");
  oracle_cmd->add_option("--seed", oc.seed, "corpus seed");
  oracle_cmd->add_option("--max-n", oc.max_n,
                         "draw instance sizes from 4..max-n (default sizes "
                         "4, 6, 8)");
  oracle_cmd->add_option("--l-set", oc.l_set, "block lengths to draw from")
      ->delimiter(',');
  oracle_cmd->add_flag("--no-extras", oc.no_extras,
                       "skip the fixed coverage-completing instances");
  oracle_cmd->add_option("--workers", oc.workers,
                         "worker threads (0: CBPSCAN_WORKERS or 1)");
  oracle_cmd->add_option("--corrupt-c1", oc.corrupt_c1,
                         "negative control: relative nudge applied to c1")
      ->group("");  // hidden; exists so the failure path stays testable
  oracle_cmd->add_option("--out", oc.out, "JSON report path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*detect_cmd) return cmd_detect(det);
    if (*select_cmd) return cmd_select_l(sl);
    if (*cv_cmd) return cmd_critical_value(cv);
    if (*sim_cmd) return cmd_simulate(sim);
    if (*oracle_cmd) return cmd_oracle_check(oc);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ComputeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
