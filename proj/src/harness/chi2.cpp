#include "kryrank/harness/chi2.hpp"

#include <ostream>

#include "kryrank/harness/parallel.hpp"
#include "kryrank/harness/report.hpp"
#include "kryrank/theory.hpp"

namespace kryrank::harness {

std::vector<Chi2Point> run_chi2_check(const Chi2Spec& spec, int workers) {
  spec.validate();
  const std::size_t trials = static_cast<std::size_t>(spec.trials);
  std::vector<double> ratios(spec.n_grid.size() * trials);
  parallel_for(ratios.size(), resolve_workers(workers), [&](std::size_t i) {
    SignalModelSpec model = spec.base;
    model.n = spec.n_grid[i / trials];
    model.seed = trial_seed(spec.seed, static_cast<long>(i % trials));
    const Vector<double> ell = exact_spectrum(gen_signal_data(model));
    ratios[i] = chi_square_ratio(std::span<const double>(ell.data(), static_cast<std::size_t>(ell.size())),
                                 model.sigma, model.q());
  });

  std::vector<Chi2Point> out;
  for (std::size_t g = 0; g < spec.n_grid.size(); ++g) {
    double sum = 0.0;
    for (std::size_t t = 0; t < trials; ++t) sum += ratios[g * trials + t];
    out.push_back({spec.n_grid[g], sum / static_cast<double>(trials)});
  }
  return out;
}

void write_chi2_csv(std::ostream& out, const std::vector<Chi2Point>& points) {
  out << "n,mean_ratio\n";
  for (const auto& p : points) out << p.n << ',' << csv_number(p.mean_ratio) << '\n';
}

std::string chi2_svg(const std::vector<Chi2Point>& points, const std::string& title) {
  Series ratio{"mean ratio", {}};
  Series target{"1", {}};
  for (const auto& p : points) {
    ratio.points.emplace_back(static_cast<double>(p.n), p.mean_ratio);
    target.points.emplace_back(static_cast<double>(p.n), 1.0);
  }
  return line_chart_svg(title, "n", "L(n, q) / eta", {ratio, target}, true);
}

}  // namespace kryrank::harness
