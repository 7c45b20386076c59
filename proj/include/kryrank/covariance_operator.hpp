#pragma once

#include <concepts>

#include "kryrank/observation_matrix.hpp"

namespace kryrank {

/// What the Krylov engine and the criterion need from a symmetric operator A.
///
/// `start(v)` maps a random vector of length `start_dim()` into the range of
/// A; `samples()` is the n that enters the criterion's n / (2 sigma^2) factor.
template <typename Op>
concept SymmetricOperator = requires(const Op& op, const Vector<typename Op::Scalar>& v) {
  typename Op::Scalar;
  { op.dim() } -> std::convertible_to<Eigen::Index>;
  { op.start_dim() } -> std::convertible_to<Eigen::Index>;
  { op.samples() } -> std::convertible_to<Eigen::Index>;
  { op.apply(v) } -> std::convertible_to<Vector<typename Op::Scalar>>;
  { op.start(v) } -> std::convertible_to<Vector<typename Op::Scalar>>;
  { op.frob_sq() } -> std::convertible_to<typename Op::Scalar>;
  { op.trace() } -> std::convertible_to<typename Op::Scalar>;
};

/// S = scale * X X^T, applied as scale * X (X^T v). Never formed.
template <typename ScalarT>
class CovarianceOperator {
 public:
  using Scalar = ScalarT;

  /// The sample covariance (1/n) X X^T.
  explicit CovarianceOperator(const ObservationMatrix<Scalar>& data)
      : data_(&data), scale_(Scalar(1) / static_cast<Scalar>(data.cols())) {}

  CovarianceOperator(const ObservationMatrix<Scalar>& data, Scalar scale) : data_(&data), scale_(scale) {}

  const ObservationMatrix<Scalar>& data() const noexcept { return *data_; }
  Scalar scale() const noexcept { return scale_; }

  Eigen::Index dim() const { return data_->rows(); }
  Eigen::Index start_dim() const { return data_->cols(); }
  Eigen::Index samples() const { return data_->cols(); }

  Vector<Scalar> apply(const Vector<Scalar>& v) const {
    if (v.size() != dim()) throw DimensionError("cov_matvec: vector length != p");
    return scale_ * data_->apply(data_->apply_transpose(v));
  }

  /// scale * X v with v in R^n.
  Vector<Scalar> start(const Vector<Scalar>& v) const { return scale_ * data_->apply(v); }

  /// ||S||_F^2 = scale^2 ||X^T X||_F^2.
  Scalar frob_sq() const { return scale_ * scale_ * gram_frob_sq(*data_); }

  /// trace(S) = scale ||X||_F^2.
  Scalar trace() const { return scale_ * kryrank::frob_sq(*data_); }

 private:
  const ObservationMatrix<Scalar>* data_;
  Scalar scale_;
};

/// A square symmetric matrix used as the operator itself (A v).
///
/// This is how a matrix such as B Lambda B^T + N is analysed directly: its own
/// eigenvalues play the role of the covariance spectrum and n is taken as p.
template <typename ScalarT>
class DirectOperator {
 public:
  using Scalar = ScalarT;

  explicit DirectOperator(const ObservationMatrix<Scalar>& data, Scalar tolerance = Scalar(1e-10))
      : data_(&data) {
    if (data.rows() != data.cols()) throw DimensionError("direct operator needs a square matrix");
    if (asymmetry(data) > tolerance) throw SymmetryError("direct operator needs a symmetric matrix");
  }

  const ObservationMatrix<Scalar>& data() const noexcept { return *data_; }

  Eigen::Index dim() const { return data_->rows(); }
  Eigen::Index start_dim() const { return data_->rows(); }
  Eigen::Index samples() const { return data_->cols(); }

  Vector<Scalar> apply(const Vector<Scalar>& v) const { return data_->apply(v); }
  Vector<Scalar> start(const Vector<Scalar>& v) const { return data_->apply(v); }

  Scalar frob_sq() const { return kryrank::frob_sq(*data_); }
  Scalar trace() const { return kryrank::trace(*data_); }

 private:
  const ObservationMatrix<Scalar>* data_;
};

static_assert(SymmetricOperator<CovarianceOperator<double>>);
static_assert(SymmetricOperator<DirectOperator<double>>);

/// (1/n) X (X^T v) through the operator; two passes over X.
template <typename Scalar, typename Derived>
Vector<Scalar> cov_matvec(const CovarianceOperator<Scalar>& op, const Eigen::MatrixBase<Derived>& v) {
  if (v.size() != op.dim()) throw DimensionError("cov_matvec: vector length != p");
  return op.apply(v);
}

}  // namespace kryrank
