#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "kryrank/harness/config.hpp"

namespace kryrank::harness {

struct SweepCell {
  double grid = 0.0;
  std::string estimator;
  long trials = 0;
  long errors = 0;    ///< q_hat != q, failed trials included
  long failures = 0;  ///< trials where the estimator threw
  double mean_qhat = 0.0;  ///< over trials that did not fail
  double mean_time = 0.0;  ///< seconds per trial

  double error_rate() const { return trials > 0 ? static_cast<double>(errors) / static_cast<double>(trials) : 0.0; }
};

struct SweepResult {
  SweepVariable variable = SweepVariable::kN;
  std::vector<SweepCell> cells;  ///< grid-major, estimators in spec order
};

struct RunOptions {
  int workers = 0;  ///< 0 selects resolve_workers(0)
  bool timings = false;
};

/// Monte-Carlo error rates of each estimator over the grid. Trial t at every
/// grid point uses data seed trial_seed(spec.seed, t), so grid points share
/// common random numbers. Results do not depend on the worker count.
/// Throws Error when more than half of a cell's trials failed.
SweepResult run_sweep(const SweepSpec& spec, const RunOptions& options = {});

/// Header `grid,estimator,error_rate,mean_qhat,mean_time`; mean_time is NA
/// unless `timings`.
void write_sweep_csv(std::ostream& out, const SweepResult& result, bool timings);
std::string sweep_svg(const SweepResult& result, const std::string& title);

/// Value of the swept variable applied to a copy of the spec.
void apply_grid_value(SweepVariable variable, double value, SignalModelSpec& model, CriterionConfig& cfg);

}  // namespace kryrank::harness
