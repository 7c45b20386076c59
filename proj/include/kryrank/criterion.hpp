#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "kryrank/krylov.hpp"

namespace kryrank {

/// Penalty weight C_n as a function of the sample count.
class CnPolicy {
 public:
  enum class Kind { kLogN, kConstant, kCustom };

  static CnPolicy log_n() { return CnPolicy(Kind::kLogN, 0.0, {}, "log"); }
  static CnPolicy constant(double value) { return CnPolicy(Kind::kConstant, value, {}, std::to_string(value)); }
  static CnPolicy custom(std::function<double(double)> fn, std::string name = "custom") {
    return CnPolicy(Kind::kCustom, 0.0, std::move(fn), std::move(name));
  }

  /// Parses "log" or a positive number.
  static CnPolicy parse(const std::string& text);

  double operator()(double n) const {
    switch (kind_) {
      case Kind::kLogN:
        return std::log(n);
      case Kind::kConstant:
        return value_;
      case Kind::kCustom:
        return fn_(n);
    }
    return 0.0;
  }

  Kind kind() const noexcept { return kind_; }
  const std::string& name() const noexcept { return name_; }

 private:
  CnPolicy(Kind kind, double value, std::function<double(double)> fn, std::string name)
      : kind_(kind), value_(value), fn_(std::move(fn)), name_(std::move(name)) {}

  Kind kind_;
  double value_;
  std::function<double(double)> fn_;
  std::string name_;
};

inline CnPolicy CnPolicy::parse(const std::string& text) {
  if (text == "log" || text == "log_n") return log_n();
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ParameterError("C_n must be 'log' or a number, got '" + text + "'");
  }
  if (used != text.size() || !(v > 0.0)) throw ParameterError("C_n must be 'log' or a positive number");
  CnPolicy p = constant(v);
  p.name_ = text;
  return p;
}

/// Scaling of the goodness-of-fit term in IC(k).
enum class IcScaling {
  kEq2,         ///< n / (2 sigma^2)
  kAlg1Literal  ///< n
};

inline std::string to_string(IcScaling s) { return s == IcScaling::kEq2 ? "eq2" : "alg1-literal"; }

inline IcScaling ic_scaling_from_string(const std::string& name) {
  if (name == "eq2") return IcScaling::kEq2;
  if (name == "alg1-literal") return IcScaling::kAlg1Literal;
  throw ParameterError("unknown IC scaling '" + name + "'");
}

struct CriterionConfig {
  double sigma = 1.0;  ///< noise variance
  CnPolicy cn = CnPolicy::log_n();
  Eigen::Index m = 10;  ///< Krylov steps per iteration
  double epsilon = 0.1;
  IcScaling scaling = IcScaling::kEq2;
  bool sigma_adjust = false;  ///< use (1 - epsilon) sigma inside the criterion
  Eigen::Index max_k = 0;     ///< 0 selects min(p, n) - 1
  BasisMode mode = BasisMode::kAccumulating;

  void validate() const {
    if (!(sigma > 0.0)) throw ParameterError("sigma must be > 0");
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw ParameterError("epsilon must lie in (0, 1)");
    if (m < 1) throw ParameterError("m must be >= 1");
    if (max_k < 0) throw ParameterError("max_k must be >= 0");
  }

  double effective_sigma() const { return sigma_adjust ? (1.0 - epsilon) * sigma : sigma; }

  double cn_at(double n) const {
    const double c = cn(n);
    if (!(c > 0.0) && n >= 2.0) throw ParameterError("C_n must be > 0");
    return c;
  }
};

/// Krylov depth ceil(log(p) / sqrt(epsilon)).
inline Eigen::Index krylov_depth(Eigen::Index p, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ParameterError("epsilon must lie in (0, 1)");
  return std::max<Eigen::Index>(1, static_cast<Eigen::Index>(std::ceil(std::log(static_cast<double>(p)) / std::sqrt(epsilon))));
}

template <typename Scalar>
struct EstimationResult {
  Eigen::Index q_hat = 0;
  std::vector<double> ic_trace;  ///< IC(0), IC(1), ..., IC(k_stop)
  Matrix<Scalar> subspace;       ///< p x q_hat, orthonormal
  Vector<Scalar> theta;          ///< Ritz values at the last iteration, descending
  double phi = 0.0;
  double sigma_used = 0.0;
  double cn = 0.0;
  Eigen::Index p = 0;
  Eigen::Index n = 0;
  bool stopped_early = false;
  bool no_minimum_found = false;
  Eigen::Index basis_size = 0;
  Eigen::Index dropped_columns = 0;
  bool range_exhausted = false;
  double wall_time = 0.0;  ///< seconds

  Eigen::Index k_stop() const { return static_cast<Eigen::Index>(ic_trace.size()) - 1; }
};

/// ||A - sigma I||_F^2 from the operator's ||A||_F^2 and trace; equals
/// sum_i (l_i - sigma)^2 over all p eigenvalues.
template <SymmetricOperator Op>
double phi(const Op& op, double sigma) {
  if (!(sigma > 0.0)) throw ParameterError("phi: sigma must be > 0");
  const double p = static_cast<double>(op.dim());
  return static_cast<double>(op.frob_sq()) - 2.0 * sigma * static_cast<double>(op.trace()) + p * sigma * sigma;
}

/// Sample-covariance form: ||X^T X||_F^2 / n^2 - (2 sigma / n) ||X||_F^2 + p sigma^2.
template <typename Scalar>
double phi(const ObservationMatrix<Scalar>& x, double sigma) {
  return phi(CovarianceOperator<Scalar>(x), sigma);
}

namespace detail {
inline double penalty(double cn, double p, double k) { return cn * (p - k) * (p - k - 1.0) / 2.0; }

inline double fit_scale(IcScaling scaling, double n, double sigma) {
  return scaling == IcScaling::kEq2 ? n / (2.0 * sigma * sigma) : n;
}
}  // namespace detail

/// IC(k) from the top-k values and the constant phi.
///
/// `theta_prefix` must hold exactly k non-increasing values. The sigma used is
/// cfg.effective_sigma(); `phi` must have been computed with the same sigma.
template <typename Derived>
double ic_value(const Eigen::MatrixBase<Derived>& theta_prefix, double phi_value, Eigen::Index k,
                const CriterionConfig& cfg, Eigen::Index n, Eigen::Index p) {
  if (k < 0 || k >= p) throw DimensionError("ic_value: need 0 <= k < p");
  if (theta_prefix.size() != k) throw DimensionError("ic_value: theta prefix must have k entries");
  const double sigma = cfg.effective_sigma();
  double explained = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    const double t = static_cast<double>(theta_prefix(i));
    if (i > 0 && t > static_cast<double>(theta_prefix(i - 1))) throw OrderError("ic_value: theta is not non-increasing");
    explained += (t - sigma) * (t - sigma);
  }
  const double slack = 1e-8 * (std::abs(phi_value) + static_cast<double>(p) * sigma * sigma);
  if (explained > phi_value + slack) {
    throw InconsistentInputError("ic_value: sum (theta_i - sigma)^2 exceeds phi");
  }
  const double nn = static_cast<double>(n);
  return detail::fit_scale(cfg.scaling, nn, sigma) * (phi_value - explained) -
         detail::penalty(cfg.cn_at(nn), static_cast<double>(p), static_cast<double>(k));
}

/// Index of the smallest value, ties to the smaller index.
inline Eigen::Index argmin_first(const std::vector<double>& values) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < static_cast<Eigen::Index>(values.size()); ++i) {
    if (values[static_cast<std::size_t>(i)] < values[static_cast<std::size_t>(best)]) best = i;
  }
  return best;
}

/// Simultaneous dimension estimate and principal-subspace basis.
///
/// IC(0) is evaluated first. Iteration k draws a start vector, extends the
/// Krylov basis with an m-column block, updates the Ritz values and evaluates
/// IC(k); the loop stops at the first k with IC(k) > IC(k-1) and returns
/// q = k - 1 with Y = Q V(:, 1:q). Without such a k by max_k, q is the argmin
/// of the trace and `no_minimum_found` is set.
///
/// When the operator's range is exhausted (a fresh random block adds nothing
/// and the basis is smaller than p) the remaining eigenvalues are exactly 0
/// and are supplied as such.
template <SymmetricOperator Op>
EstimationResult<typename Op::Scalar> estimate_dimension(const Op& op, const CriterionConfig& cfg, Rng& rng) {
  using Scalar = typename Op::Scalar;
  using Clock = std::chrono::steady_clock;
  const auto started = Clock::now();
  cfg.validate();

  const Eigen::Index p = op.dim();
  const Eigen::Index n = op.samples();
  if (p < 2) throw DimensionError("estimate_dimension: need p >= 2");

  EstimationResult<Scalar> res;
  res.p = p;
  res.n = n;
  res.sigma_used = cfg.effective_sigma();
  res.cn = cfg.cn_at(static_cast<double>(n));
  res.phi = phi(op, res.sigma_used);

  Eigen::Index max_k = cfg.max_k > 0 ? cfg.max_k : std::min(p, n) - 1;
  max_k = std::clamp<Eigen::Index>(max_k, 1, p - 1);

  res.ic_trace.push_back(ic_value(Vector<Scalar>(0), res.phi, 0, cfg, n, p));

  KrylovState<Scalar> state(p, cfg.mode);
  RitzProjector<Op> projector(op);
  Vector<Scalar> ritz;

  auto ritz_values = [&](Eigen::Index k) {
    Vector<Scalar> values = symmetric_eig_small(projector.projected(), false).values;
    if (values.size() < k) {
      const Eigen::Index have = values.size();
      values.conservativeResize(k);
      values.tail(k - have).setZero();
      std::sort(values.data(), values.data() + k, std::greater<Scalar>());
    }
    return values;
  };

  Eigen::Index k = 1;
  for (; k <= max_k; ++k) {
    if (!res.range_exhausted) {
      auto block = draw_block(op, cfg.m, rng);
      if (block) {
        state = extend_basis(std::move(state), *block);
        if (state.last_added == 0 && state.size() < p) res.range_exhausted = true;
      } else {
        state.k = k;
        res.range_exhausted = true;
      }
    } else {
      state.k = k;
    }
    projector.sync(state.q);
    ritz = ritz_values(k);
    const double ic = ic_value(ritz.head(k), res.phi, k, cfg, n, p);
    res.ic_trace.push_back(ic);
    // A growing basis also sharpens theta_1..theta_{k-1}, which would credit
    // step k with that refinement. Accumulating mode therefore re-evaluates
    // IC(k-1) on the current Ritz values before comparing.
    const double prev = cfg.mode == BasisMode::kAccumulating
                            ? ic_value(ritz.head(k - 1), res.phi, k - 1, cfg, n, p)
                            : res.ic_trace[static_cast<std::size_t>(k - 1)];
    if (ic > prev) {
      res.stopped_early = true;
      break;
    }
  }

  res.q_hat = res.stopped_early ? k - 1 : argmin_first(res.ic_trace);
  res.no_minimum_found = !res.stopped_early;
  res.theta = ritz;
  res.basis_size = state.size();
  res.dropped_columns = state.dropped;

  const Eigen::Index keep = std::min(res.q_hat, state.size());
  if (keep > 0) {
    const auto eig = symmetric_eig_small(projector.projected(), true);
    res.subspace = state.q * eig.vectors.leftCols(keep);
  } else {
    res.subspace.resize(p, 0);
  }
  res.wall_time = std::chrono::duration<double>(Clock::now() - started).count();
  return res;
}

/// Sample-covariance entry point: S_n = (1/n) X X^T.
template <typename Scalar>
EstimationResult<Scalar> estimate_dimension(const ObservationMatrix<Scalar>& x, const CriterionConfig& cfg,
                                            Rng& rng) {
  return estimate_dimension(CovarianceOperator<Scalar>(x), cfg, rng);
}

struct FullSpectrumEstimate {
  Eigen::Index q_hat = 0;
  std::vector<double> ic_trace;  ///< IC(0) .. IC(p - 1)
};

namespace detail {
template <typename Derived>
void require_non_increasing(const Eigen::MatrixBase<Derived>& ell, const char* who) {
  for (Eigen::Index i = 1; i < ell.size(); ++i) {
    if (ell(i) > ell(i - 1)) throw OrderError(std::string(who) + ": eigenvalues are not sorted descending");
  }
}
}  // namespace detail

/// IC(k) for every k = 0..p-1 from all p eigenvalues, using exact tail sums;
/// the global argmin (ties to the smaller k). Uses cfg.sigma as given.
template <typename Derived>
FullSpectrumEstimate ic_full_spectrum(const Eigen::MatrixBase<Derived>& ell, const CriterionConfig& cfg,
                                      Eigen::Index n) {
  detail::require_non_increasing(ell, "ic_full_spectrum");
  const Eigen::Index p = ell.size();
  if (p < 1) throw DimensionError("ic_full_spectrum: empty spectrum");
  if (!(cfg.sigma > 0.0)) throw ParameterError("sigma must be > 0");
  const double sigma = cfg.sigma;
  const double nn = static_cast<double>(n);
  const double scale = detail::fit_scale(cfg.scaling, nn, sigma);
  const double cn = cfg.cn_at(nn);

  std::vector<double> tail(static_cast<std::size_t>(p) + 1, 0.0);
  for (Eigen::Index i = p - 1; i >= 0; --i) {
    const double d = static_cast<double>(ell(i)) - sigma;
    tail[static_cast<std::size_t>(i)] = tail[static_cast<std::size_t>(i) + 1] + d * d;
  }
  FullSpectrumEstimate out;
  out.ic_trace.reserve(static_cast<std::size_t>(p));
  for (Eigen::Index k = 0; k < p; ++k) {
    out.ic_trace.push_back(scale * tail[static_cast<std::size_t>(k)] -
                           detail::penalty(cn, static_cast<double>(p), static_cast<double>(k)));
  }
  out.q_hat = argmin_first(out.ic_trace);
  return out;
}

/// Minimum Description Length estimate (Wax-Kailath form):
/// MDL(k) = -n (p - k) log(geometric / arithmetic mean of l_{k+1..p})
///          + k (2p - k) log(n) / 2.
template <typename Derived>
Eigen::Index mdl_estimate(const Eigen::MatrixBase<Derived>& ell, Eigen::Index n) {
  detail::require_non_increasing(ell, "mdl_estimate");
  const Eigen::Index p = ell.size();
  if (p < 1) throw DimensionError("mdl_estimate: empty spectrum");
  if (n < 2) throw ParameterError("mdl_estimate: need n >= 2");
  for (Eigen::Index i = 0; i < p; ++i) {
    if (!(ell(i) > 0)) throw DomainError("mdl_estimate: eigenvalues must be positive");
  }
  const double nn = static_cast<double>(n);
  const double pp = static_cast<double>(p);
  double log_sum = 0.0;
  double sum = 0.0;
  std::vector<double> score(static_cast<std::size_t>(p));
  for (Eigen::Index k = p - 1; k >= 0; --k) {
    log_sum += std::log(static_cast<double>(ell(k)));
    sum += static_cast<double>(ell(k));
    const double count = pp - static_cast<double>(k);
    const double log_ratio = log_sum / count - std::log(sum / count);
    const double kk = static_cast<double>(k);
    score[static_cast<std::size_t>(k)] = -nn * count * log_ratio + 0.5 * kk * (2.0 * pp - kk) * std::log(nn);
  }
  return argmin_first(score);
}

/// All p eigenvalues of S_n = (1/n) X X^T, descending, through the smaller of
/// the two Gram matrices (the remaining |p - n| eigenvalues are 0).
template <typename Scalar>
Vector<Scalar> exact_spectrum(const ObservationMatrix<Scalar>& x) {
  const Eigen::Index p = x.rows();
  const Eigen::Index n = x.cols();
  const Matrix<Scalar> d = x.to_dense();
  Matrix<Scalar> gram;
  if (p <= n) {
    gram.setZero(p, p);
    gram.template selfadjointView<Eigen::Lower>().rankUpdate(d);
  } else {
    gram.setZero(n, n);
    gram.template selfadjointView<Eigen::Lower>().rankUpdate(d.transpose());
  }
  gram = gram.template selfadjointView<Eigen::Lower>();
  gram /= static_cast<Scalar>(n);
  Vector<Scalar> values = symmetric_eig_small(gram, false).values;
  if (values.size() < p) {
    const Eigen::Index have = values.size();
    values.conservativeResize(p);
    values.tail(p - have).setZero();
  }
  return values;
}

}  // namespace kryrank
