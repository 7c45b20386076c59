#include "kryrank/harness/config.hpp"

#include <cstdlib>
#include <fstream>
#include <thread>

namespace kryrank::harness {

using nlohmann::json;

std::string to_string(SweepVariable v) {
  switch (v) {
    case SweepVariable::kN:
      return "n";
    case SweepVariable::kLambdaQ:
      return "lambda_q";
    case SweepVariable::kSigma:
      return "sigma";
    case SweepVariable::kM:
      return "m";
  }
  return "n";
}

SweepVariable sweep_variable_from_string(const std::string& name) {
  if (name == "n") return SweepVariable::kN;
  if (name == "lambda_q") return SweepVariable::kLambdaQ;
  if (name == "sigma") return SweepVariable::kSigma;
  if (name == "m") return SweepVariable::kM;
  throw ParameterError("unknown sweep variable '" + name + "'");
}

void SweepSpec::validate() const {
  if (grid.empty()) throw ParameterError("sweep grid is empty");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw ParameterError("sweep grid must be strictly increasing");
  }
  if (trials < 1) throw ParameterError("sweep needs trials >= 1");
  if (estimators.empty()) throw ParameterError("sweep needs at least one estimator");
  for (const auto& e : estimators) {
    if (std::find(kEstimators.begin(), kEstimators.end(), e) == kEstimators.end()) {
      throw ParameterError("unknown estimator '" + e + "'");
    }
  }
  criterion.validate();
}

void Chi2Spec::validate() const {
  if (n_grid.empty()) throw ParameterError("chi2 n_grid is empty");
  for (long n : n_grid) {
    if (n < 1) throw ParameterError("chi2 n_grid values must be >= 1");
  }
  if (trials < 1) throw ParameterError("chi2 needs trials >= 1");
  if (base.p - base.q() < 2) throw ParameterError("chi2 needs p - q >= 2");
}

namespace {

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  auto it = j.find(key);
  return it == j.end() ? fallback : it->template get<T>();
}

std::string name_of(const json& j, const std::string& fallback) { return get_or<std::string>(j, "name", fallback); }

}  // namespace

CriterionConfig parse_criterion(const json& j, CriterionConfig cfg) {
  if (j.is_null()) return cfg;
  if (!j.is_object()) throw ParameterError("criterion must be an object");
  if (j.contains("sigma")) cfg.sigma = j.at("sigma").get<double>();
  if (j.contains("cn")) {
    const auto& c = j.at("cn");
    cfg.cn = c.is_string() ? CnPolicy::parse(c.get<std::string>()) : CnPolicy::parse(std::to_string(c.get<double>()));
  }
  if (j.contains("m")) cfg.m = j.at("m").get<long>();
  if (j.contains("epsilon")) cfg.epsilon = j.at("epsilon").get<double>();
  if (j.contains("scaling")) cfg.scaling = ic_scaling_from_string(j.at("scaling").get<std::string>());
  if (j.contains("sigma_adjust")) cfg.sigma_adjust = j.at("sigma_adjust").get<bool>();
  if (j.contains("max_k")) cfg.max_k = j.at("max_k").get<long>();
  if (j.contains("mode")) cfg.mode = basis_mode_from_string(j.at("mode").get<std::string>());
  return cfg;
}

SignalModelSpec parse_signal_model(const json& j) {
  SignalModelSpec s;
  s.lambdas = {20.0, 15.0, 10.0, 8.0, 6.0};
  s.sigma = 1.1;
  if (j.is_null()) return s;
  s.p = get_or<long>(j, "p", s.p);
  s.n = get_or<long>(j, "n", s.n);
  s.sigma = get_or<double>(j, "sigma", s.sigma);
  s.lambdas = get_or<std::vector<double>>(j, "lambdas", s.lambdas);
  s.seed = get_or<std::uint64_t>(j, "seed", s.seed);
  return s;
}

SparseModelSpec parse_sparse_model(const json& j) {
  SparseModelSpec s;
  s.p = get_or<long>(j, "p", s.p);
  s.q = get_or<long>(j, "q", s.q);
  s.lambda_q = get_or<double>(j, "lambda_q", s.lambda_q);
  s.density = get_or<double>(j, "density", s.density);
  s.sigma = get_or<double>(j, "sigma", s.sigma);
  s.noise_edge = get_or<double>(j, "noise_edge", s.noise_edge);
  s.seed = get_or<std::uint64_t>(j, "seed", s.seed);
  return s;
}

SweepSpec parse_sweep_spec(const json& j, const std::string& default_name) {
  SweepSpec s;
  s.name = name_of(j, default_name);
  s.variable = sweep_variable_from_string(j.at("variable").get<std::string>());
  s.grid = j.at("grid").get<std::vector<double>>();
  s.trials = get_or<long>(j, "trials", s.trials);
  s.seed = get_or<std::uint64_t>(j, "seed", s.seed);
  s.base = parse_signal_model(j.value("model", json()));
  s.criterion = parse_criterion(j.value("criterion", json()));
  s.criterion.sigma = s.base.sigma;
  s.estimators = get_or<std::vector<std::string>>(j, "estimators", s.estimators);
  s.validate();
  return s;
}

Table1Spec parse_table1_spec(const json& j, const std::string& default_name, const std::filesystem::path& base_dir) {
  Table1Spec s;
  s.name = name_of(j, default_name);
  s.criterion = parse_criterion(j.value("criterion", json()));
  for (const auto& e : j.at("matrices")) {
    Table1Entry t;
    t.name = e.at("name").get<std::string>();
    if (e.contains("synthetic")) {
      t.synthetic = parse_sparse_model(e.at("synthetic"));
      t.sigma = t.synthetic->sigma > 0.0 ? t.synthetic->sigma : 1.0;
      t.actual_q = t.synthetic->q;
      t.lambda_q = t.synthetic->lambda_q;
    } else if (e.contains("path")) {
      t.path = e.at("path").get<std::string>();
      if (t.path.is_relative()) t.path = base_dir / t.path;
    } else {
      throw ParameterError("table1 entry '" + t.name + "' needs 'path' or 'synthetic'");
    }
    t.sigma = get_or<double>(e, "sigma", t.sigma);
    t.op = get_or<std::string>(e, "operator", t.op);
    if (t.op != "auto" && t.op != "direct" && t.op != "covariance" && t.op != "gram") {
      throw ParameterError("unknown operator '" + t.op + "'");
    }
    t.seeds = get_or<std::vector<std::uint64_t>>(e, "seeds", t.seeds);
    if (e.contains("actual_q")) t.actual_q = e.at("actual_q").get<long>();
    if (e.contains("lambda_q")) t.lambda_q = e.at("lambda_q").get<double>();
    if (e.contains("reference_error")) t.reference_error = e.at("reference_error").get<double>();
    if (!(t.sigma > 0.0)) throw ParameterError("table1 entry '" + t.name + "' needs sigma > 0");
    s.entries.push_back(std::move(t));
  }
  s.criterion.validate();
  return s;
}

Chi2Spec parse_chi2_spec(const json& j, const std::string& default_name) {
  Chi2Spec s;
  s.name = name_of(j, default_name);
  s.base = parse_signal_model(j.value("model", json()));
  s.n_grid = j.at("n_grid").get<std::vector<long>>();
  s.trials = get_or<long>(j, "trials", s.trials);
  s.seed = get_or<std::uint64_t>(j, "seed", s.seed);
  s.validate();
  return s;
}

json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  try {
    return json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

namespace {

// Turns nlohmann type / key errors into library errors.
template <typename F>
auto guarded(const std::filesystem::path& path, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw ParameterError(path.string() + ": " + e.what());
  }
}

}  // namespace

SweepSpec load_sweep_spec(const std::filesystem::path& path) {
  return guarded(path, [&] { return parse_sweep_spec(load_json(path), path.stem().string()); });
}

Table1Spec load_table1_spec(const std::filesystem::path& path) {
  return guarded(path, [&] {
    return parse_table1_spec(load_json(path), path.stem().string(), path.parent_path());
  });
}

Chi2Spec load_chi2_spec(const std::filesystem::path& path) {
  return guarded(path, [&] { return parse_chi2_spec(load_json(path), path.stem().string()); });
}

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("KRYRANK_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

}  // namespace kryrank::harness
