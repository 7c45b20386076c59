#include "kryrank/cli.hpp"

#include <cctype>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "kryrank/criterion.hpp"
#include "kryrank/datagen.hpp"
#include "kryrank/harness/chi2.hpp"
#include "kryrank/harness/report.hpp"
#include "kryrank/harness/sweep.hpp"
#include "kryrank/harness/table1.hpp"
#include "kryrank/matrix_market.hpp"
#include "kryrank/theory.hpp"

namespace kryrank {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kSchema = 1;

// Bad flag values found after parsing; reported like parse errors.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EstimateArgs {
  std::string input;
  double sigma = 1.0;
  std::string cn = "log";
  long m = 10;
  double epsilon = 0.1;
  std::string mode = "accumulating";
  std::string scaling = "eq2";
  std::string op = "covariance";
  std::uint64_t seed = 0;
  std::string out;
  long max_k = 0;
  bool sigma_adjust = false;
  bool center = false;
  bool timings = false;
};

struct RunArgs {
  std::string config;
  std::string out_dir = ".";
  int workers = 0;
  bool timings = false;
};

struct ConditionsArgs {
  long p = 0;
  double n = 0;
  long q = 0;
  double sigma = 1.0;
  std::string cn = "log";
  double epsilon = 0.1;
  std::string spectrum;
  bool as_json = false;
};

struct GenerateArgs {
  std::string model = "signal";
  long p = 200;
  long n = 400;
  long q = 5;
  std::vector<double> lambdas = {20, 15, 10, 8, 6};
  double lambda_q = 5.0;
  double density = 0.05;
  double sigma = 1.0;
  double noise_edge = 3.8;
  std::uint64_t seed = 0;
  std::string out;
};

CriterionConfig make_config(const EstimateArgs& a) {
  CriterionConfig cfg;
  try {
    cfg.sigma = a.sigma;
    cfg.cn = CnPolicy::parse(a.cn);
    cfg.m = a.m;
    cfg.epsilon = a.epsilon;
    cfg.mode = basis_mode_from_string(a.mode);
    cfg.scaling = ic_scaling_from_string(a.scaling);
    cfg.max_k = a.max_k;
    cfg.sigma_adjust = a.sigma_adjust;
    cfg.validate();
  } catch (const ParameterError& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

template <typename Op>
EstimationResult<double> run_estimate(const Op& op, const CriterionConfig& cfg, Rng& rng) {
  return estimate_dimension(op, cfg, rng);
}

std::vector<double> to_std(const Vector<double>& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

int cmd_estimate(const EstimateArgs& a) {
  const CriterionConfig cfg = make_config(a);
  ObservationMatrixd x = load_matrix_market(a.input);
  if (a.center) x = center_columns(x);

  Rng rng(a.seed);
  EstimationResult<double> res;
  if (a.op == "direct" || (a.op == "auto" && asymmetry(x) <= 1e-10)) {
    res = run_estimate(DirectOperator<double>(x), cfg, rng);
  } else if (a.op == "gram" || a.op == "auto") {
    res = run_estimate(CovarianceOperator<double>(x, 1.0), cfg, rng);
  } else {
    res = run_estimate(CovarianceOperator<double>(x), cfg, rng);
  }

  json j;
  j["schema"] = kSchema;
  j["input"] = fs::path(a.input).filename().string();
  j["q_hat"] = res.q_hat;
  j["p"] = res.p;
  j["n"] = res.n;
  j["phi"] = res.phi;
  j["sigma_used"] = res.sigma_used;
  j["cn"] = res.cn;
  j["stopped_early"] = res.stopped_early;
  j["no_minimum_found"] = res.no_minimum_found;
  j["basis_size"] = res.basis_size;
  j["dropped_columns"] = res.dropped_columns;
  j["range_exhausted"] = res.range_exhausted;
  j["ic_trace"] = res.ic_trace;
  j["theta"] = to_std(res.theta);
  j["config"] = {{"sigma", a.sigma},     {"cn", cfg.cn.name()},       {"m", a.m},
                 {"epsilon", a.epsilon}, {"mode", to_string(cfg.mode)}, {"scaling", to_string(cfg.scaling)},
                 {"sigma_adjust", a.sigma_adjust}, {"max_k", a.max_k}, {"operator", a.op},
                 {"center", a.center},   {"seed", a.seed}};
  if (a.timings) j["wall_time"] = res.wall_time;
  const std::string doc = j.dump(2) + "\n";
  std::cout << doc;

  if (!a.out.empty()) {
    harness::write_text_file(a.out + ".json", doc);
    save_matrix_market_array(a.out + "_subspace.mtx", res.subspace);
    std::ostringstream theta;
    theta << "index,theta\n";
    for (Eigen::Index i = 0; i < res.theta.size(); ++i) theta << i + 1 << ',' << format_double(res.theta(i)) << '\n';
    harness::write_text_file(a.out + "_theta.csv", theta.str());
    std::ostringstream ic;
    ic << "k,ic,theta_k\n";
    for (std::size_t k = 0; k < res.ic_trace.size(); ++k) {
      ic << k << ',' << format_double(res.ic_trace[k]) << ',';
      if (k == 0) {
        ic << "NA";
      } else if (static_cast<Eigen::Index>(k) <= res.theta.size()) {
        ic << format_double(res.theta(static_cast<Eigen::Index>(k) - 1));
      } else {
        ic << "0";
      }
      ic << '\n';
    }
    harness::write_text_file(a.out + "_ic.csv", ic.str());
  }
  return 0;
}

fs::path output_path(const RunArgs& a, const std::string& name, const char* ext) {
  fs::create_directories(a.out_dir);
  return fs::path(a.out_dir) / (name + ext);
}

int cmd_sweep(const RunArgs& a) {
  const auto spec = harness::load_sweep_spec(a.config);
  const auto result = harness::run_sweep(spec, {a.workers, a.timings});
  std::ostringstream csv;
  harness::write_sweep_csv(csv, result, a.timings);
  harness::write_text_file(output_path(a, spec.name, ".csv").string(), csv.str());
  harness::write_text_file(output_path(a, spec.name, ".svg").string(), harness::sweep_svg(result, spec.name));
  std::cout << csv.str();
  return 0;
}

int cmd_table1(const RunArgs& a) {
  const auto spec = harness::load_table1_spec(a.config);
  const auto rows = harness::run_table1(spec);
  std::ostringstream csv;
  harness::write_table1_csv(csv, rows, a.timings);
  harness::write_text_file(output_path(a, spec.name, ".csv").string(), csv.str());
  std::cout << csv.str();
  return 0;
}

int cmd_chi2(const RunArgs& a) {
  const auto spec = harness::load_chi2_spec(a.config);
  const auto points = harness::run_chi2_check(spec, a.workers);
  std::ostringstream csv;
  harness::write_chi2_csv(csv, points);
  harness::write_text_file(output_path(a, spec.name, ".csv").string(), csv.str());
  harness::write_text_file(output_path(a, spec.name, ".svg").string(), harness::chi2_svg(points, spec.name));
  std::cout << csv.str();
  return 0;
}

// Whitespace or comma separated numbers. A file whose first line is a
// header (such as the theta CSV written by `estimate`) is read by its last
// column.
std::vector<double> read_spectrum(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::vector<double> out;
  std::string line;
  bool first = true;
  bool last_column = false;
  while (std::getline(in, line)) {
    for (char& c : line) {
      if (c == ',') c = ' ';
    }
    std::istringstream parts(line);
    std::vector<std::string> fields{std::istream_iterator<std::string>(parts), {}};
    if (fields.empty()) continue;
    if (first && !std::isdigit(static_cast<unsigned char>(fields[0][0])) && fields[0][0] != '-' &&
        fields[0][0] != '.') {
      first = false;
      last_column = true;
      continue;
    }
    first = false;
    if (last_column) fields.erase(fields.begin(), fields.end() - 1);
    for (const auto& f : fields) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(f, &used);
      } catch (const std::exception&) {
      }
      if (used != f.size()) throw Error(path + ": bad number '" + f + "'");
      out.push_back(v);
    }
  }
  return out;
}

json report_json(const DetectionReport& r) {
  json j;
  j["schema"] = kSchema;
  j["sigma"] = r.sigma;
  j["cn"] = r.cn;
  j["n"] = r.n;
  j["p"] = r.p;
  j["q"] = r.q;
  j["epsilon"] = r.epsilon;
  j["underest_threshold"] = r.underest_threshold;
  j["overest_threshold"] = r.overest_threshold;
  j["tw_edge"] = r.tw_edge;
  j["cn_lower_bound"] = r.cn_lower_bound;
  j["krylov_underest_threshold"] = r.krylov_underest_threshold;
  j["krylov_overest_threshold"] = r.krylov_overest_threshold;
  j["cn_above_bound"] = r.cn_above_bound;
  j["edge_below_overest"] = r.edge_below_overest;
  auto opt = [&](const char* key, const auto& v) {
    if (v) j[key] = *v;
  };
  opt("observed_lq", r.observed_lq);
  opt("observed_lq1", r.observed_lq1);
  opt("no_underestimation", r.no_underestimation);
  opt("no_overestimation", r.no_overestimation);
  opt("krylov_no_underestimation", r.krylov_no_underestimation);
  opt("krylov_no_overestimation", r.krylov_no_overestimation);
  return j;
}

int cmd_conditions(const ConditionsArgs& a) {
  double cn = 0.0;
  try {
    cn = CnPolicy::parse(a.cn)(a.n);
  } catch (const ParameterError& e) {
    throw UsageError(e.what());
  }
  std::vector<double> spectrum;
  if (!a.spectrum.empty()) spectrum = read_spectrum(a.spectrum);
  DetectionReport r;
  try {
    r = detection_report(a.sigma, cn, a.n, a.p, a.q, a.epsilon, spectrum);
  } catch (const ParameterError& e) {
    throw UsageError(e.what());
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
  if (a.as_json) {
    std::cout << report_json(r).dump(2) << '\n';
  } else {
    std::cout << format_report_text(r);
  }
  return 0;
}

int cmd_generate(const GenerateArgs& a) {
  ObservationMatrixd x = [&] {
    if (a.model == "sparse") {
      SparseModelSpec s;
      s.p = a.p;
      s.q = a.q;
      s.lambda_q = a.lambda_q;
      s.density = a.density;
      s.sigma = a.sigma;
      s.noise_edge = a.noise_edge;
      s.seed = a.seed;
      return gen_sparse_lowrank(s);
    }
    SignalModelSpec s;
    s.p = a.p;
    s.n = a.n;
    s.lambdas = a.lambdas;
    s.sigma = a.sigma;
    s.seed = a.seed;
    return gen_signal_data(s);
  }();
  if (a.out.empty()) {
    write_matrix_market(std::cout, x);
  } else {
    save_matrix_market(a.out, x);
  }
  return 0;
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"Principal subspace dimension estimation with block Krylov iterations", "kryrank"};
  app.require_subcommand(1);

  EstimateArgs est;
  auto* estimate = app.add_subcommand("estimate", "Estimate q and the principal subspace of a Matrix Market file");
  estimate->add_option("matrix", est.input, "p x n data matrix (.mtx)")->required();
  estimate->add_option("--sigma", est.sigma, "Noise variance")->capture_default_str();
  estimate->add_option("--cn", est.cn, "Penalty weight C_n: 'log' or a positive number")->capture_default_str();
  estimate->add_option("--m", est.m, "Krylov steps per iteration")->capture_default_str();
  estimate->add_option("--epsilon", est.epsilon, "Krylov accuracy parameter in (0, 1)")->capture_default_str();
  estimate->add_option("--mode", est.mode, "Basis mode")
      ->check(CLI::IsMember({"accumulating", "paper-truncated"}))
      ->capture_default_str();
  estimate->add_option("--scaling", est.scaling, "IC scaling")
      ->check(CLI::IsMember({"eq2", "alg1-literal"}))
      ->capture_default_str();
  estimate->add_option("--operator", est.op, "covariance: X X^T / n, gram: X X^T, direct: X itself, auto")
      ->check(CLI::IsMember({"covariance", "gram", "direct", "auto"}))
      ->capture_default_str();
  estimate->add_option("--seed", est.seed, "Seed for all randomness")->capture_default_str();
  estimate->add_option("--out", est.out, "Output prefix for .json, _subspace.mtx, _theta.csv and _ic.csv");
  estimate->add_option("--max-k", est.max_k, "Largest candidate dimension (0: min(p, n) - 1)")->capture_default_str();
  estimate->add_flag("--sigma-adjust", est.sigma_adjust, "Use (1 - epsilon) sigma inside the criterion");
  estimate->add_flag("--center", est.center, "Subtract row means first");
  estimate->add_flag("--timings", est.timings, "Include wall time in the JSON output");

  RunArgs sweep_args, table_args, chi_args;
  auto add_run = [&](const char* name, const char* help, RunArgs& args, bool workers) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("config", args.config, "JSON configuration")->required();
    sub->add_option("--out-dir", args.out_dir, "Directory for CSV and SVG output")->capture_default_str();
    if (workers) sub->add_option("--workers", args.workers, "Worker threads (0: $KRYRANK_WORKERS or all cores)");
    sub->add_flag("--timings", args.timings, "Record wall times instead of NA");
    return sub;
  };
  auto* sweep = add_run("sweep", "Monte-Carlo error-rate sweep", sweep_args, true);
  auto* table1 = add_run("table1", "Rank estimation on sparse and Matrix Market matrices", table_args, false);
  auto* chi2 = add_run("chi2", "Chi-square mean-ratio check", chi_args, true);

  ConditionsArgs cond;
  auto* conditions = app.add_subcommand("conditions", "Closed-form detection thresholds");
  conditions->add_option("--p", cond.p, "Dimension")->required();
  conditions->add_option("--n", cond.n, "Sample count")->required();
  conditions->add_option("--q", cond.q, "Signal dimension")->required();
  conditions->add_option("--sigma", cond.sigma, "Noise variance")->capture_default_str();
  conditions->add_option("--cn", cond.cn, "'log' or a positive number")->capture_default_str();
  conditions->add_option("--epsilon", cond.epsilon, "Krylov accuracy parameter")->capture_default_str();
  conditions->add_option("--spectrum", cond.spectrum, "File of observed eigenvalues, largest first");
  conditions->add_flag("--json", cond.as_json, "Print JSON instead of text");

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Write synthetic data as Matrix Market");
  generate->add_option("--model", gen.model, "signal or sparse")
      ->check(CLI::IsMember({"signal", "sparse"}))
      ->capture_default_str();
  generate->add_option("--p", gen.p)->capture_default_str();
  generate->add_option("--n", gen.n, "Samples (signal model)")->capture_default_str();
  generate->add_option("--q", gen.q, "Rank (sparse model)")->capture_default_str();
  generate->add_option("--lambdas", gen.lambdas, "Signal eigenvalues (signal model)")->delimiter(',');
  generate->add_option("--lambda-q", gen.lambda_q, "Smallest weight (sparse model)")->capture_default_str();
  generate->add_option("--density", gen.density)->capture_default_str();
  generate->add_option("--sigma", gen.sigma)->capture_default_str();
  generate->add_option("--noise-edge", gen.noise_edge)->capture_default_str();
  generate->add_option("--seed", gen.seed)->capture_default_str();
  generate->add_option("--out", gen.out, "Output file (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n";
    const CLI::App* sub = nullptr;
    for (const auto* s : app.get_subcommands()) sub = s;
    std::cerr << (sub ? sub->help() : app.help());
    return 1;
  }

  try {
    if (*estimate) return cmd_estimate(est);
    if (*sweep) return cmd_sweep(sweep_args);
    if (*table1) return cmd_table1(table_args);
    if (*chi2) return cmd_chi2(chi_args);
    if (*conditions) return cmd_conditions(cond);
    if (*generate) return cmd_generate(gen);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

}  // namespace kryrank
