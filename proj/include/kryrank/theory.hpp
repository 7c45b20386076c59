#pragma once

#include <optional>
#include <span>
#include <string>

namespace kryrank {

/// Smallest l_q that avoids underestimating q: sigma (sqrt(2 C_n (p - q) / n) + 1).
double underestimation_threshold(double sigma, double cn, double n, long p, long q);

/// Largest l_{q+1} that avoids overestimating q: sigma (sqrt(C_n (p - q - 1) / n) + 1).
double overestimation_threshold(double sigma, double cn, double n, long p, long q);

/// Approximate largest noise eigenvalue sigma (1 + sqrt(p / n))^2.
double tracy_widom_edge(double sigma, double p, double n);

/// C_n must exceed (p + 2 sqrt(n p))^2 / (n (p - q - 1)) so that the noise
/// edge sits below the overestimation threshold.
double cn_lower_bound(double p, double n, long q);

struct KrylovThresholds {
  double underestimation;
  double overestimation;
};

/// Both thresholds with the 1 / (1 - epsilon) allowance for Ritz values.
KrylovThresholds krylov_adjusted_thresholds(double sigma, double cn, double n, long p, long q, double epsilon);

/// Mean-ratio statistic of the noise tail:
/// [sum_{i != j > q} l_i l_j / (2 sigma^2)] / [(p - q)(p - q - 1) / 2].
/// `ell` holds all p eigenvalues, largest first.
double chi_square_ratio(std::span<const double> ell, double sigma, long q);

/// Every closed-form detection condition for one parameter set, optionally
/// checked against an observed spectrum.
struct DetectionReport {
  double sigma = 0.0;
  double cn = 0.0;
  double n = 0.0;
  long p = 0;
  long q = 0;
  double epsilon = 0.0;

  double underest_threshold = 0.0;
  double overest_threshold = 0.0;
  double tw_edge = 0.0;
  double cn_lower_bound = 0.0;
  double krylov_underest_threshold = 0.0;
  double krylov_overest_threshold = 0.0;

  bool cn_above_bound = false;    ///< C_n > cn_lower_bound
  bool edge_below_overest = false;  ///< predicted noise edge < overestimation threshold

  std::optional<double> observed_lq;
  std::optional<double> observed_lq1;
  std::optional<bool> no_underestimation;  ///< l_q > underest_threshold
  std::optional<bool> no_overestimation;   ///< l_{q+1} < overest_threshold
  std::optional<bool> krylov_no_underestimation;
  std::optional<bool> krylov_no_overestimation;
};

/// `q` must satisfy 1 <= q <= p - 2; `spectrum`, when non-empty, is the
/// observed eigenvalues, largest first, with at least q + 1 entries.
DetectionReport detection_report(double sigma, double cn, double n, long p, long q, double epsilon,
                                 std::span<const double> spectrum = {});

std::string format_report_text(const DetectionReport& report);

}  // namespace kryrank
