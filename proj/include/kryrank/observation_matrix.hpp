#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cstdint>
#include <limits>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "kryrank/errors.hpp"

namespace kryrank {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Compressed sparse rows.
template <typename Scalar>
using SparseRows = Eigen::SparseMatrix<Scalar, Eigen::RowMajor>;

/// The p x n data matrix X, one sample per column. Immutable once built.
///
/// Storage is either dense column-major or compressed sparse rows; every
/// kernel in this header dispatches on it.
template <typename Scalar>
class ObservationMatrix {
 public:
  using Dense = Matrix<Scalar>;
  using Sparse = SparseRows<Scalar>;

  explicit ObservationMatrix(Dense values) : storage_(std::move(values)) { check_shape(); }

  explicit ObservationMatrix(Sparse values) : storage_(std::move(values)) {
    check_shape();
    std::get<Sparse>(storage_).makeCompressed();
  }

  /// Builds sparse storage from coordinates; rejects out-of-range and
  /// repeated (row, col) pairs instead of summing them.
  static ObservationMatrix from_triplets(Eigen::Index rows, Eigen::Index cols,
                                         std::vector<Eigen::Triplet<Scalar>> entries) {
    if (rows < 1 || cols < 1) throw DimensionError("observation matrix needs p >= 1 and n >= 1");
    for (const auto& t : entries) {
      if (t.row() < 0 || t.row() >= rows || t.col() < 0 || t.col() >= cols) {
        throw DimensionError("entry (" + std::to_string(t.row()) + ", " + std::to_string(t.col()) +
                             ") outside " + std::to_string(rows) + " x " + std::to_string(cols));
      }
    }
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
      return a.row() != b.row() ? a.row() < b.row() : a.col() < b.col();
    });
    const auto dup = std::adjacent_find(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
      return a.row() == b.row() && a.col() == b.col();
    });
    if (dup != entries.end()) {
      throw DimensionError("duplicate entry (" + std::to_string(dup->row()) + ", " +
                           std::to_string(dup->col()) + ")");
    }
    Sparse s(rows, cols);
    s.setFromTriplets(entries.begin(), entries.end());
    return ObservationMatrix(std::move(s));
  }

  Eigen::Index rows() const {
    return std::visit([](const auto& m) { return static_cast<Eigen::Index>(m.rows()); }, storage_);
  }
  Eigen::Index cols() const {
    return std::visit([](const auto& m) { return static_cast<Eigen::Index>(m.cols()); }, storage_);
  }

  bool is_sparse() const noexcept { return std::holds_alternative<Sparse>(storage_); }
  const Dense& dense() const { return std::get<Dense>(storage_); }
  const Sparse& sparse() const { return std::get<Sparse>(storage_); }

  Eigen::Index stored_entries() const {
    return is_sparse() ? sparse().nonZeros() : rows() * cols();
  }

  /// X v, v of length n.
  template <typename Derived>
  Vector<Scalar> apply(const Eigen::MatrixBase<Derived>& v) const {
    if (v.size() != cols()) throw DimensionError("apply: vector length != n");
    return std::visit([&](const auto& m) -> Vector<Scalar> { return m * v; }, storage_);
  }

  /// X^T w, w of length p.
  template <typename Derived>
  Vector<Scalar> apply_transpose(const Eigen::MatrixBase<Derived>& w) const {
    if (w.size() != rows()) throw DimensionError("apply_transpose: vector length != p");
    return std::visit([&](const auto& m) -> Vector<Scalar> { return m.transpose() * w; }, storage_);
  }

  /// X B for a dense block B with n rows.
  template <typename Derived>
  Matrix<Scalar> apply_block(const Eigen::MatrixBase<Derived>& b) const {
    return std::visit([&](const auto& m) -> Matrix<Scalar> { return m * b; }, storage_);
  }

  /// X^T B for a dense block B with p rows.
  template <typename Derived>
  Matrix<Scalar> apply_transpose_block(const Eigen::MatrixBase<Derived>& b) const {
    return std::visit([&](const auto& m) -> Matrix<Scalar> { return m.transpose() * b; }, storage_);
  }

  /// Dense copy of columns [first, first + count).
  Dense column_block(Eigen::Index first, Eigen::Index count) const {
    if (!is_sparse()) return dense().middleCols(first, count);
    Dense out = Dense::Zero(rows(), count);
    const Sparse& s = sparse();
    for (Eigen::Index r = 0; r < s.outerSize(); ++r) {
      for (typename Sparse::InnerIterator it(s, r); it; ++it) {
        if (it.col() >= first && it.col() < first + count) out(r, it.col() - first) = it.value();
      }
    }
    return out;
  }

  Dense to_dense() const { return is_sparse() ? Dense(sparse()) : dense(); }

  template <typename F>
  decltype(auto) visit(F&& f) const {
    return std::visit(std::forward<F>(f), storage_);
  }

 private:
  void check_shape() const {
    if (rows() < 1 || cols() < 1) throw DimensionError("observation matrix needs p >= 1 and n >= 1");
  }

  std::variant<Dense, Sparse> storage_;
};

using ObservationMatrixd = ObservationMatrix<double>;

/// Sum of squared entries, trace(X^T X).
template <typename Scalar>
Scalar frob_sq(const ObservationMatrix<Scalar>& x) {
  return x.visit([](const auto& m) -> Scalar {
    using M = std::decay_t<decltype(m)>;
    if constexpr (std::is_same_v<M, Matrix<Scalar>>) {
      return m.squaredNorm();
    } else {
      return Eigen::Map<const Vector<Scalar>>(m.valuePtr(), m.nonZeros()).squaredNorm();
    }
  });
}

namespace detail {
inline constexpr Eigen::Index kGramBlock = 256;
}  // namespace detail

/// ||X^T X||_F^2, the sum of fourth powers of the singular values of X.
///
/// Exact. Works on whichever Gram matrix is smaller (X^T X is n x n, X X^T is
/// p x p; both have the same Frobenius norm) and accumulates it 256 columns at
/// a time, so memory stays at O(max(p, n) * 256) for dense input.
template <typename Scalar>
Scalar gram_frob_sq(const ObservationMatrix<Scalar>& x) {
  const bool over_columns = x.cols() <= x.rows();
  const Eigen::Index side = over_columns ? x.cols() : x.rows();
  Scalar total = 0;
  if (!x.is_sparse()) {
    const auto& m = x.dense();
    for (Eigen::Index j = 0; j < side; j += detail::kGramBlock) {
      const Eigen::Index w = std::min(detail::kGramBlock, side - j);
      if (over_columns) {
        total += (m.transpose() * m.middleCols(j, w)).squaredNorm();
      } else {
        total += (m * m.middleRows(j, w).transpose()).squaredNorm();
      }
    }
    return total;
  }
  if (over_columns) {
    const Eigen::SparseMatrix<Scalar, Eigen::ColMajor> c = x.sparse();
    for (Eigen::Index j = 0; j < side; j += detail::kGramBlock) {
      const Eigen::Index w = std::min(detail::kGramBlock, side - j);
      const Eigen::SparseMatrix<Scalar, Eigen::ColMajor> g = c.transpose() * c.middleCols(j, w);
      total += g.squaredNorm();
    }
  } else {
    const auto& r = x.sparse();
    for (Eigen::Index i = 0; i < side; i += detail::kGramBlock) {
      const Eigen::Index w = std::min(detail::kGramBlock, side - i);
      const SparseRows<Scalar> block = r.middleRows(i, w);
      const SparseRows<Scalar> g = block * r.transpose();
      total += g.squaredNorm();
    }
  }
  return total;
}

/// Subtracts each row's mean over the n samples. Always returns dense storage.
template <typename Scalar>
ObservationMatrix<Scalar> center_columns(const ObservationMatrix<Scalar>& x) {
  Matrix<Scalar> d = x.to_dense();
  const Vector<Scalar> mean = d.rowwise().mean();
  d.colwise() -= mean;
  return ObservationMatrix<Scalar>(std::move(d));
}

/// Sum of diagonal entries of a square matrix.
template <typename Scalar>
Scalar trace(const ObservationMatrix<Scalar>& x) {
  if (x.rows() != x.cols()) throw DimensionError("trace of a non-square matrix");
  return x.visit([](const auto& m) -> Scalar {
    using M = std::decay_t<decltype(m)>;
    if constexpr (std::is_same_v<M, Matrix<Scalar>>) {
      return m.trace();
    } else {
      Scalar t = 0;
      for (Eigen::Index r = 0; r < m.outerSize(); ++r) t += m.coeff(r, r);
      return t;
    }
  });
}

/// max |X - X^T| relative to max |X|; infinite for non-square input.
template <typename Scalar>
Scalar asymmetry(const ObservationMatrix<Scalar>& x) {
  if (x.rows() != x.cols()) return std::numeric_limits<Scalar>::infinity();
  return x.visit([](const auto& m) -> Scalar {
    using M = std::decay_t<decltype(m)>;
    Scalar scale = 0;
    Scalar diff = 0;
    if constexpr (std::is_same_v<M, Matrix<Scalar>>) {
      scale = m.cwiseAbs().maxCoeff();
      diff = (m - m.transpose()).cwiseAbs().maxCoeff();
    } else {
      if (m.nonZeros() == 0) return Scalar(0);
      const SparseRows<Scalar> t = m.transpose();
      const SparseRows<Scalar> d = m - t;
      scale = Eigen::Map<const Vector<Scalar>>(m.valuePtr(), m.nonZeros()).cwiseAbs().maxCoeff();
      if (d.nonZeros() > 0) {
        diff = Eigen::Map<const Vector<Scalar>>(d.valuePtr(), d.nonZeros()).cwiseAbs().maxCoeff();
      }
    }
    return scale > 0 ? diff / scale : Scalar(0);
  });
}

}  // namespace kryrank
