#include "kryrank/harness/sweep.hpp"

#include <chrono>
#include <cmath>
#include <ostream>

#include "kryrank/harness/parallel.hpp"
#include "kryrank/harness/report.hpp"

namespace kryrank::harness {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool failed = false;
  long q_hat = -1;
  double seconds = 0.0;
};

// Stream family for the start vectors of the Krylov estimator.
constexpr std::uint64_t kKrylovStream = stream_id(1, 0);

std::vector<Outcome> run_trial(const SweepSpec& spec, double value, long trial) {
  SignalModelSpec model = spec.base;
  CriterionConfig cfg = spec.criterion;
  apply_grid_value(spec.variable, value, model, cfg);
  model.seed = trial_seed(spec.seed, trial);

  std::vector<Outcome> out(spec.estimators.size());
  std::optional<ObservationMatrixd> x;
  try {
    x.emplace(gen_signal_data(model));
  } catch (const std::exception&) {
    for (auto& o : out) o.failed = true;
    return out;
  }

  std::optional<Vector<double>> ell;
  double spectrum_time = 0.0;
  auto spectrum = [&]() -> const Vector<double>& {
    if (!ell) {
      const auto t0 = Clock::now();
      ell = exact_spectrum(*x);
      spectrum_time = seconds_since(t0);
    }
    return *ell;
  };

  for (std::size_t e = 0; e < spec.estimators.size(); ++e) {
    const std::string& name = spec.estimators[e];
    Outcome& o = out[e];
    try {
      const auto t0 = Clock::now();
      if (name == "mpt-krylov") {
        Rng rng(model.seed, kKrylovStream);
        o.q_hat = static_cast<long>(estimate_dimension(*x, cfg, rng).q_hat);
        o.seconds = seconds_since(t0);
      } else if (name == "mpt-full") {
        const auto& l = spectrum();
        const auto t1 = Clock::now();
        o.q_hat = static_cast<long>(ic_full_spectrum(l, cfg, model.n).q_hat);
        o.seconds = spectrum_time + seconds_since(t1);
      } else {
        const auto& l = spectrum();
        const auto t1 = Clock::now();
        // With n < p only the leading n eigenvalues are nonzero.
        const Eigen::Index r = std::min<Eigen::Index>(model.p, model.n);
        o.q_hat = static_cast<long>(mdl_estimate(l.head(r), model.n));
        o.seconds = spectrum_time + seconds_since(t1);
      }
    } catch (const std::exception&) {
      o.failed = true;
    }
  }
  return out;
}

}  // namespace

void apply_grid_value(SweepVariable variable, double value, SignalModelSpec& model, CriterionConfig& cfg) {
  switch (variable) {
    case SweepVariable::kN:
      model.n = std::lround(value);
      break;
    case SweepVariable::kLambdaQ: {
      if (model.lambdas.empty()) throw ParameterError("lambda_q sweep needs q >= 1");
      const double factor = value / model.lambdas.back();
      for (double& l : model.lambdas) l *= factor;
      break;
    }
    case SweepVariable::kSigma:
      model.sigma = value;
      break;
    case SweepVariable::kM:
      cfg.m = std::lround(value);
      break;
  }
  cfg.sigma = model.sigma;
}

SweepResult run_sweep(const SweepSpec& spec, const RunOptions& options) {
  spec.validate();
  const std::size_t grid = spec.grid.size();
  const std::size_t trials = static_cast<std::size_t>(spec.trials);
  std::vector<std::vector<Outcome>> outcomes(grid * trials);
  parallel_for(outcomes.size(), resolve_workers(options.workers), [&](std::size_t i) {
    outcomes[i] = run_trial(spec, spec.grid[i / trials], static_cast<long>(i % trials));
  });

  SweepResult result;
  result.variable = spec.variable;
  const long q = spec.base.q();
  for (std::size_t g = 0; g < grid; ++g) {
    for (std::size_t e = 0; e < spec.estimators.size(); ++e) {
      SweepCell cell;
      cell.grid = spec.grid[g];
      cell.estimator = spec.estimators[e];
      cell.trials = spec.trials;
      double qsum = 0.0;
      double tsum = 0.0;
      for (std::size_t t = 0; t < trials; ++t) {
        const Outcome& o = outcomes[g * trials + t][e];
        tsum += o.seconds;
        if (o.failed) {
          ++cell.failures;
          ++cell.errors;
          continue;
        }
        qsum += static_cast<double>(o.q_hat);
        if (o.q_hat != q) ++cell.errors;
      }
      if (2 * cell.failures > cell.trials) {
        throw Error("sweep aborted: " + cell.estimator + " failed in " + std::to_string(cell.failures) + " of " +
                    std::to_string(cell.trials) + " trials at " + to_string(spec.variable) + " = " +
                    csv_number(cell.grid));
      }
      const long ok = cell.trials - cell.failures;
      cell.mean_qhat = ok > 0 ? qsum / static_cast<double>(ok) : std::nan("");
      cell.mean_time = tsum / static_cast<double>(cell.trials);
      result.cells.push_back(cell);
    }
  }
  return result;
}

void write_sweep_csv(std::ostream& out, const SweepResult& result, bool timings) {
  out << "grid,estimator,error_rate,mean_qhat,mean_time\n";
  for (const auto& c : result.cells) {
    out << csv_number(c.grid) << ',' << c.estimator << ',' << csv_number(c.error_rate()) << ','
        << csv_number(c.mean_qhat) << ',' << (timings ? csv_number(c.mean_time) : std::string("NA")) << '\n';
  }
}

std::string sweep_svg(const SweepResult& result, const std::string& title) {
  std::vector<Series> series;
  for (const auto& c : result.cells) {
    auto it = std::find_if(series.begin(), series.end(), [&](const Series& s) { return s.label == c.estimator; });
    if (it == series.end()) {
      series.push_back({c.estimator, {}});
      it = series.end() - 1;
    }
    it->points.emplace_back(c.grid, c.error_rate());
  }
  return line_chart_svg(title, to_string(result.variable), "Pr(q_hat != q)", series,
                        result.variable == SweepVariable::kN);
}

}  // namespace kryrank::harness
