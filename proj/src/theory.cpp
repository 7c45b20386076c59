#include "kryrank/theory.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "kryrank/errors.hpp"

namespace kryrank {

namespace {

void require_positive_sigma(double sigma) {
  if (!(sigma > 0.0)) throw ParameterError("sigma must be > 0");
}

void require_samples(double n) {
  if (!(n >= 1.0)) throw ParameterError("n must be >= 1");
}

}  // namespace

double underestimation_threshold(double sigma, double cn, double n, long p, long q) {
  require_positive_sigma(sigma);
  require_samples(n);
  if (q < 0 || q >= p) throw DomainError("underestimation_threshold: need 0 <= q < p");
  return sigma * (std::sqrt(2.0 * cn * static_cast<double>(p - q) / n) + 1.0);
}

double overestimation_threshold(double sigma, double cn, double n, long p, long q) {
  require_positive_sigma(sigma);
  require_samples(n);
  if (q < 0 || q > p - 2) throw DomainError("overestimation_threshold: need 0 <= q <= p - 2");
  return sigma * (std::sqrt(cn * static_cast<double>(p - q - 1) / n) + 1.0);
}

double tracy_widom_edge(double sigma, double p, double n) {
  if (!(p >= 1.0) || !(n >= 1.0)) throw ParameterError("tracy_widom_edge: need p, n >= 1");
  const double root = 1.0 + std::sqrt(p / n);
  return sigma * root * root;
}

double cn_lower_bound(double p, double n, long q) {
  if (!(p >= 1.0) || !(n >= 1.0)) throw ParameterError("cn_lower_bound: need p, n >= 1");
  if (q < 0 || static_cast<double>(q) > p - 2.0) throw DomainError("cn_lower_bound: need 0 <= q <= p - 2");
  const double top = p + 2.0 * std::sqrt(n * p);
  return top * top / (n * (p - static_cast<double>(q) - 1.0));
}

KrylovThresholds krylov_adjusted_thresholds(double sigma, double cn, double n, long p, long q, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ParameterError("epsilon must lie in (0, 1)");
  require_positive_sigma(sigma);
  require_samples(n);
  if (q < 0 || q > p - 2) throw DomainError("krylov_adjusted_thresholds: need 0 <= q <= p - 2");
  const double widen = 1.0 / (1.0 - epsilon);
  return {
      sigma * widen * (std::sqrt(2.0 * cn * static_cast<double>(p - q) / n) + 1.0),
      sigma * (widen * std::sqrt(cn * static_cast<double>(p - q - 1) / n) + 1.0),
  };
}

double chi_square_ratio(std::span<const double> ell, double sigma, long q) {
  require_positive_sigma(sigma);
  const long p = static_cast<long>(ell.size());
  if (q < 0 || q >= p) throw DomainError("chi_square_ratio: need 0 <= q < p");
  if (p - q < 2) throw DomainError("chi_square_ratio: need at least two tail eigenvalues");
  double sum = 0.0;
  double sum_sq = 0.0;
  for (long i = q; i < p; ++i) {
    sum += ell[static_cast<std::size_t>(i)];
    sum_sq += ell[static_cast<std::size_t>(i)] * ell[static_cast<std::size_t>(i)];
  }
  const double tail = static_cast<double>(p - q);
  const double eta = tail * (tail - 1.0) / 2.0;
  return ((sum * sum - sum_sq) / (2.0 * sigma * sigma)) / eta;
}

DetectionReport detection_report(double sigma, double cn, double n, long p, long q, double epsilon,
                                 std::span<const double> spectrum) {
  if (q < 1 || q > p - 2) throw DomainError("detection_report: need 1 <= q <= p - 2");
  DetectionReport r;
  r.sigma = sigma;
  r.cn = cn;
  r.n = n;
  r.p = p;
  r.q = q;
  r.epsilon = epsilon;
  r.underest_threshold = underestimation_threshold(sigma, cn, n, p, q);
  r.overest_threshold = overestimation_threshold(sigma, cn, n, p, q);
  r.tw_edge = tracy_widom_edge(sigma, static_cast<double>(p), n);
  r.cn_lower_bound = cn_lower_bound(static_cast<double>(p), n, q);
  const auto k = krylov_adjusted_thresholds(sigma, cn, n, p, q, epsilon);
  r.krylov_underest_threshold = k.underestimation;
  r.krylov_overest_threshold = k.overestimation;
  r.cn_above_bound = cn > r.cn_lower_bound;
  r.edge_below_overest = r.tw_edge < r.overest_threshold;

  if (!spectrum.empty()) {
    if (static_cast<long>(spectrum.size()) < q + 1) throw DimensionError("detection_report: spectrum too short");
    r.observed_lq = spectrum[static_cast<std::size_t>(q - 1)];
    r.observed_lq1 = spectrum[static_cast<std::size_t>(q)];
    r.no_underestimation = *r.observed_lq > r.underest_threshold;
    r.no_overestimation = *r.observed_lq1 < r.overest_threshold;
    r.krylov_no_underestimation = *r.observed_lq > r.krylov_underest_threshold;
    r.krylov_no_overestimation = *r.observed_lq1 < r.krylov_overest_threshold;
  }
  return r;
}

std::string format_report_text(const DetectionReport& r) {
  std::ostringstream out;
  char line[160];
  auto row = [&](const char* label, double value) {
    std::snprintf(line, sizeof line, "%-34s %.10g\n", label, value);
    out << line;
  };
  auto flag = [&](const char* label, bool ok) {
    std::snprintf(line, sizeof line, "%-34s %s\n", label, ok ? "yes" : "no");
    out << line;
  };
  std::snprintf(line, sizeof line, "p=%ld n=%.10g q=%ld sigma=%.10g C_n=%.10g epsilon=%.10g\n", r.p, r.n, r.q,
                r.sigma, r.cn, r.epsilon);
  out << line;
  row("underestimation threshold", r.underest_threshold);
  row("overestimation threshold", r.overest_threshold);
  row("noise edge (Tracy-Widom)", r.tw_edge);
  row("C_n lower bound", r.cn_lower_bound);
  row("Krylov underestimation threshold", r.krylov_underest_threshold);
  row("Krylov overestimation threshold", r.krylov_overest_threshold);
  flag("C_n above lower bound", r.cn_above_bound);
  flag("noise edge below overest. thr.", r.edge_below_overest);
  if (r.observed_lq) {
    row("observed l_q", *r.observed_lq);
    row("observed l_{q+1}", *r.observed_lq1);
    flag("no underestimation", *r.no_underestimation);
    flag("no overestimation", *r.no_overestimation);
    flag("Krylov no underestimation", *r.krylov_no_underestimation);
    flag("Krylov no overestimation", *r.krylov_no_overestimation);
  }
  return out.str();
}

}  // namespace kryrank
