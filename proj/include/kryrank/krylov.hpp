#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "kryrank/covariance_operator.hpp"
#include "kryrank/random.hpp"
#include "kryrank/symmetric_eigen.hpp"

namespace kryrank {

/// How the basis is managed after each new Krylov block.
enum class BasisMode {
  /// Keep only the first k columns (insertion order) after iteration k.
  kPaperTruncated,
  /// Keep every independent column, up to p.
  kAccumulating,
};

inline std::string to_string(BasisMode mode) {
  return mode == BasisMode::kPaperTruncated ? "paper-truncated" : "accumulating";
}

inline BasisMode basis_mode_from_string(const std::string& name) {
  if (name == "paper-truncated") return BasisMode::kPaperTruncated;
  if (name == "accumulating") return BasisMode::kAccumulating;
  throw ParameterError("unknown basis mode '" + name + "'");
}

/// Orthonormal Krylov basis under construction. Columns are only ever
/// appended, in both modes.
template <typename Scalar>
struct KrylovState {
  Matrix<Scalar> q;
  Eigen::Index k = 0;  // iteration counter / candidate dimension
  BasisMode mode = BasisMode::kAccumulating;
  Eigen::Index dropped = 0;  // columns rejected as linearly dependent, cumulative
  Eigen::Index last_added = 0;

  KrylovState() = default;
  KrylovState(Eigen::Index p, BasisMode m) : q(p, 0), mode(m) {}

  Eigen::Index size() const { return q.cols(); }
};

/// Ritz values (descending) and the matching orthonormal Ritz vectors.
template <typename Scalar>
struct SpectrumEstimate {
  Vector<Scalar> theta;
  Matrix<Scalar> y;

  Eigen::Index k() const { return theta.size(); }
};

inline constexpr double kDependentColumnTolerance = 1e-10;

/// Standard-normal vector of length `dim`, normalized.
template <typename Scalar>
Vector<Scalar> random_unit_vector(Eigen::Index dim, Rng& rng) {
  Vector<Scalar> v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v(i) = static_cast<Scalar>(rng.normal());
  return v / v.norm();
}

/// p x m Krylov block [x, A x, ..., A^{m-1} x] with x = op.start(v), each
/// column rescaled to unit norm (the span is unchanged).
template <SymmetricOperator Op>
Matrix<typename Op::Scalar> build_block(const Op& op, const Vector<typename Op::Scalar>& v, Eigen::Index m) {
  using Scalar = typename Op::Scalar;
  if (m < 1) throw ParameterError("build_block: m must be >= 1");
  if (v.size() != op.start_dim()) throw DimensionError("build_block: start vector has the wrong length");
  if (std::abs(v.norm() - Scalar(1)) > Scalar(1e-12)) throw ParameterError("build_block: start vector is not unit");

  Matrix<Scalar> k(op.dim(), m);
  Vector<Scalar> x = op.start(v);
  Scalar norm = x.norm();
  if (!(norm > Scalar(0))) throw DegenerateStartError("build_block: X v vanished");
  for (Eigen::Index j = 0; j < m; ++j) {
    if (norm > Scalar(0)) {
      x /= norm;
      k.col(j) = x;
      if (j + 1 < m) {
        x = op.apply(x);
        norm = x.norm();
      }
    } else {
      k.rightCols(m - j).setZero();
      break;
    }
  }
  return k;
}

template <typename Scalar>
Matrix<Scalar> build_block(const ObservationMatrix<Scalar>& x, const Vector<Scalar>& v, Eigen::Index m) {
  return build_block(CovarianceOperator<Scalar>(x), v, m);
}

/// Appends the columns of `block` to the basis.
///
/// Each column goes through two passes of modified Gram-Schmidt against every
/// basis column (including ones accepted earlier from the same block) and is
/// dropped when what remains is below 1e-10 of its original norm. Advances
/// the iteration counter; paper-truncated mode then keeps the first k
/// columns, accumulating mode keeps everything up to p.
template <typename Scalar, typename Derived>
KrylovState<Scalar> extend_basis(KrylovState<Scalar> state, const Eigen::MatrixBase<Derived>& block) {
  const Eigen::Index p = state.q.rows();
  if (block.rows() != p) throw DimensionError("extend_basis: block has the wrong number of rows");
  state.k += 1;
  const Eigen::Index cap = state.mode == BasisMode::kPaperTruncated ? std::min(state.k, p) : p;

  const Eigen::Index start = state.q.cols();
  Matrix<Scalar> accepted(p, std::max<Eigen::Index>(0, std::min(block.cols(), cap - start)));
  Eigen::Index count = 0;
  for (Eigen::Index j = 0; j < block.cols(); ++j) {
    if (start + count >= cap) {
      state.dropped += block.cols() - j;
      break;
    }
    Vector<Scalar> v = block.col(j);
    const Scalar before = v.norm();
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index i = 0; i < start; ++i) v -= state.q.col(i).dot(v) * state.q.col(i);
      for (Eigen::Index i = 0; i < count; ++i) v -= accepted.col(i).dot(v) * accepted.col(i);
    }
    const Scalar after = v.norm();
    if (!(before > Scalar(0)) || after < Scalar(kDependentColumnTolerance) * before) {
      ++state.dropped;
      continue;
    }
    accepted.col(count++) = v / after;
  }
  if (count > 0) {
    state.q.conservativeResize(Eigen::NoChange, start + count);
    state.q.rightCols(count) = accepted.leftCols(count);
  }
  state.last_added = count;
  return state;
}

/// Keeps A Q and T = Q^T A Q in step with an append-only basis, so each new
/// basis column costs one operator application.
template <SymmetricOperator Op>
class RitzProjector {
 public:
  using Scalar = typename Op::Scalar;

  explicit RitzProjector(const Op& op) : op_(&op), aq_(op.dim(), 0), t_(0, 0) {}

  void sync(const Matrix<Scalar>& q) {
    const Eigen::Index old = aq_.cols();
    const Eigen::Index b = q.cols();
    if (b < old) throw DimensionError("RitzProjector: basis shrank");
    if (b == old) return;
    const Eigen::Index fresh = b - old;
    aq_.conservativeResize(Eigen::NoChange, b);
    for (Eigen::Index j = old; j < b; ++j) aq_.col(j) = op_->apply(q.col(j));
    t_.conservativeResize(b, b);
    t_.rightCols(fresh).noalias() = q.transpose() * aq_.rightCols(fresh);
    if (old > 0) t_.bottomLeftCorner(fresh, old).noalias() = q.rightCols(fresh).transpose() * aq_.leftCols(old);
  }

  /// The projected matrix, symmetrized.
  Matrix<Scalar> projected() const { return (t_ + t_.transpose()) * Scalar(0.5); }
  const Matrix<Scalar>& operator_times_basis() const { return aq_; }

 private:
  const Op* op_;
  Matrix<Scalar> aq_;
  Matrix<Scalar> t_;
};

/// Rayleigh-Ritz on an orthonormal basis: T = Q^T A Q via b operator
/// applications, then Ritz values (descending) and Ritz vectors Y = Q V.
template <SymmetricOperator Op>
SpectrumEstimate<typename Op::Scalar> rayleigh_ritz(const Op& op, const Matrix<typename Op::Scalar>& q) {
  using Scalar = typename Op::Scalar;
  if (q.rows() != op.dim()) throw DimensionError("rayleigh_ritz: basis has the wrong number of rows");
  if (q.cols() > 0) {
    const Scalar off = (q.transpose() * q - Matrix<Scalar>::Identity(q.cols(), q.cols())).cwiseAbs().maxCoeff();
    if (off > Scalar(1e-8)) throw ParameterError("rayleigh_ritz: basis is not orthonormal");
  }
  RitzProjector<Op> projector(op);
  projector.sync(q);
  const auto eig = symmetric_eig_small(projector.projected());
  return {eig.values, q * eig.vectors};
}

template <typename Scalar>
SpectrumEstimate<Scalar> rayleigh_ritz(const ObservationMatrix<Scalar>& x, const Matrix<Scalar>& q) {
  return rayleigh_ritz(CovarianceOperator<Scalar>(x), q);
}

/// Draws a start vector and its Krylov block, redrawing when X v vanishes.
/// Empty when every attempt degenerated (the operator is zero on every draw).
template <SymmetricOperator Op>
std::optional<Matrix<typename Op::Scalar>> draw_block(const Op& op, Eigen::Index m, Rng& rng, int attempts = 8) {
  using Scalar = typename Op::Scalar;
  for (int a = 0; a < attempts; ++a) {
    const Vector<Scalar> v = random_unit_vector<Scalar>(op.start_dim(), rng);
    try {
      return build_block(op, v, m);
    } catch (const DegenerateStartError&) {
    }
  }
  return std::nullopt;
}

/// Top-k Ritz pairs from k rounds of {random start, Krylov block, extend}
/// followed by one Rayleigh-Ritz step. Fewer than k pairs come back only when
/// the operator's range is exhausted before the basis reaches k columns.
template <SymmetricOperator Op>
SpectrumEstimate<typename Op::Scalar> topk_spectrum(const Op& op, Eigen::Index k, Eigen::Index m, BasisMode mode,
                                                    Rng& rng) {
  using Scalar = typename Op::Scalar;
  if (k < 1 || k > op.dim()) throw DimensionError("topk_spectrum: need 1 <= k <= p");
  if (m < 1) throw ParameterError("topk_spectrum: m must be >= 1");
  KrylovState<Scalar> state(op.dim(), mode);
  for (Eigen::Index it = 0; it < k; ++it) {
    auto block = draw_block(op, m, rng);
    if (!block) break;
    state = extend_basis(std::move(state), *block);
  }
  auto full = rayleigh_ritz(op, state.q);
  const Eigen::Index keep = std::min(k, full.k());
  return {full.theta.head(keep), full.y.leftCols(keep)};
}

template <typename Scalar>
SpectrumEstimate<Scalar> topk_spectrum(const ObservationMatrix<Scalar>& x, Eigen::Index k, Eigen::Index m,
                                       BasisMode mode, Rng& rng) {
  return topk_spectrum(CovarianceOperator<Scalar>(x), k, m, mode, rng);
}

}  // namespace kryrank
