#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "kryrank/criterion.hpp"
#include "kryrank/datagen.hpp"

namespace kryrank::harness {

enum class SweepVariable { kN, kLambdaQ, kSigma, kM };

std::string to_string(SweepVariable v);
SweepVariable sweep_variable_from_string(const std::string& name);

inline const std::vector<std::string> kEstimators = {"mpt-krylov", "mpt-full", "mdl"};

struct SweepSpec {
  std::string name = "sweep";
  SweepVariable variable = SweepVariable::kN;
  std::vector<double> grid;
  long trials = 100;
  std::uint64_t seed = 0;
  SignalModelSpec base;
  CriterionConfig criterion;  ///< sigma is always taken from the model
  std::vector<std::string> estimators = {"mpt-full"};

  void validate() const;
};

/// One row group of a table1 run: a Matrix Market file or a synthetic
/// sparse model, analysed once per seed.
struct Table1Entry {
  std::string name;
  std::filesystem::path path;              ///< empty for synthetic entries
  std::optional<SparseModelSpec> synthetic;
  std::vector<std::uint64_t> seeds = {0};
  double sigma = 1.0;                      ///< noise level handed to the criterion
  std::string op = "auto";                 ///< auto | direct | covariance | gram
  std::optional<long> actual_q;
  std::optional<double> lambda_q;
  std::optional<double> reference_error;
};

struct Table1Spec {
  std::string name = "table1";
  CriterionConfig criterion;
  std::vector<Table1Entry> entries;
};

struct Chi2Spec {
  std::string name = "chi2";
  SignalModelSpec base;
  std::vector<long> n_grid;
  long trials = 30;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Reads the "criterion" object; absent keys keep the values of `base`.
CriterionConfig parse_criterion(const nlohmann::json& j, CriterionConfig base = {});
SignalModelSpec parse_signal_model(const nlohmann::json& j);
SparseModelSpec parse_sparse_model(const nlohmann::json& j);

/// Relative paths inside a config are resolved against `base_dir`.
SweepSpec parse_sweep_spec(const nlohmann::json& j, const std::string& default_name);
Table1Spec parse_table1_spec(const nlohmann::json& j, const std::string& default_name,
                             const std::filesystem::path& base_dir);
Chi2Spec parse_chi2_spec(const nlohmann::json& j, const std::string& default_name);

nlohmann::json load_json(const std::filesystem::path& path);
SweepSpec load_sweep_spec(const std::filesystem::path& path);
Table1Spec load_table1_spec(const std::filesystem::path& path);
Chi2Spec load_chi2_spec(const std::filesystem::path& path);

/// Worker count: `requested` if positive, else $KRYRANK_WORKERS, else the
/// hardware concurrency.
int resolve_workers(int requested);

/// Per-trial data seed.
inline std::uint64_t trial_seed(std::uint64_t seed, long trial) {
  return seed ^ static_cast<std::uint64_t>(trial);
}

}  // namespace kryrank::harness
