#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "kryrank/observation_matrix.hpp"

namespace kryrank {

/// Eigenpairs of a small dense symmetric matrix, values descending.
template <typename Scalar>
struct SymmetricEigen {
  Vector<Scalar> values;
  Matrix<Scalar> vectors;  // empty when only values were requested
};

namespace detail {

/// Reduces symmetric `a` (overwritten) to tridiagonal form Q^T a Q with
/// Householder reflections. Returns diagonal and subdiagonal; accumulates Q
/// into `q` when it is non-null.
template <typename Scalar>
void householder_tridiagonalize(Matrix<Scalar>& a, Vector<Scalar>& diag, Vector<Scalar>& sub,
                                Matrix<Scalar>* q) {
  const Eigen::Index n = a.rows();
  if (q) q->setIdentity(n, n);
  for (Eigen::Index k = 0; k + 2 < n; ++k) {
    const Eigen::Index m = n - k - 1;
    Vector<Scalar> v = a.col(k).tail(m);
    const Scalar xnorm = v.norm();
    if (xnorm == Scalar(0)) continue;
    const Scalar alpha = v(0) > 0 ? -xnorm : xnorm;
    v(0) -= alpha;
    const Scalar vv = v.squaredNorm();
    if (vv == Scalar(0)) continue;
    const Scalar beta = Scalar(2) / vv;

    auto trailing = a.bottomRightCorner(m, m);
    const Vector<Scalar> p = beta * (trailing.template selfadjointView<Eigen::Lower>() * v);
    const Vector<Scalar> w = p - (beta * Scalar(0.5) * p.dot(v)) * v;
    trailing.template selfadjointView<Eigen::Lower>().rankUpdate(v, w, Scalar(-1));

    a(k + 1, k) = alpha;
    a.col(k).tail(m - 1).setZero();
    if (q) {
      auto cols = q->rightCols(m);
      const Vector<Scalar> qv = cols * v;
      cols.noalias() -= beta * qv * v.transpose();
    }
  }
  diag = a.diagonal();
  sub = n > 1 ? Vector<Scalar>(a.diagonal(-1)) : Vector<Scalar>();
}

/// Implicit-shift QL on a symmetric tridiagonal matrix (the EISPACK tql2
/// scheme). Rotations are applied to the columns of `z` when non-null.
/// At most `max_iterations` QL sweeps in total.
template <typename Scalar>
void tridiagonal_ql(Vector<Scalar>& d, const Vector<Scalar>& sub, Matrix<Scalar>* z, long max_iterations) {
  const Eigen::Index n = d.size();
  if (n == 0) return;
  Vector<Scalar> e = Vector<Scalar>::Zero(n);
  e.head(n - 1) = sub;

  const Scalar eps = std::numeric_limits<Scalar>::epsilon();
  Scalar shift_total = 0;
  Scalar tst1 = 0;
  long iterations = 0;
  for (Eigen::Index l = 0; l < n; ++l) {
    tst1 = std::max(tst1, std::abs(d(l)) + std::abs(e(l)));
    Eigen::Index m = l;
    while (m < n - 1 && std::abs(e(m)) > eps * tst1) ++m;
    if (m > l) {
      do {
        if (++iterations > max_iterations) {
          throw ConvergenceError("tridiagonal QL exceeded " + std::to_string(max_iterations) + " iterations");
        }
        Scalar g = d(l);
        Scalar p = (d(l + 1) - g) / (Scalar(2) * e(l));
        Scalar r = std::hypot(p, Scalar(1));
        if (p < 0) r = -r;
        d(l) = e(l) / (p + r);
        d(l + 1) = e(l) * (p + r);
        const Scalar dl1 = d(l + 1);
        Scalar h = g - d(l);
        for (Eigen::Index i = l + 2; i < n; ++i) d(i) -= h;
        shift_total += h;

        p = d(m);
        Scalar c = 1, c2 = 1, c3 = 1;
        const Scalar el1 = e(l + 1);
        Scalar s = 0, s2 = 0;
        for (Eigen::Index i = m - 1; i >= l; --i) {
          c3 = c2;
          c2 = c;
          s2 = s;
          g = c * e(i);
          h = c * p;
          r = std::hypot(p, e(i));
          e(i + 1) = s * r;
          s = e(i) / r;
          c = p / r;
          p = c * d(i) - s * g;
          d(i + 1) = h + s * (c * g + s * d(i));
          if (z) {
            auto zi = z->col(i);
            auto zi1 = z->col(i + 1);
            const Vector<Scalar> tmp = zi1;
            zi1 = s * zi + c * tmp;
            zi = c * zi - s * tmp;
          }
        }
        p = -s * s2 * c3 * el1 * e(l) / dl1;
        e(l) = s * p;
        d(l) = c * p;
      } while (std::abs(e(l)) > eps * tst1);
    }
    d(l) += shift_total;
    e(l) = 0;
  }
}

}  // namespace detail

/// Eigen-decomposition of a small dense symmetric matrix.
///
/// Householder tridiagonalization followed by implicit-shift QL. The input is
/// checked for symmetry (max |T - T^T| <= 1e-10 max |T|) and symmetrized.
/// Values come back in descending order; `vectors` column i belongs to
/// `values(i)`.
template <typename Derived>
SymmetricEigen<typename Derived::Scalar> symmetric_eig_small(const Eigen::MatrixBase<Derived>& t,
                                                             bool compute_vectors = true) {
  using Scalar = typename Derived::Scalar;
  if (t.rows() != t.cols()) throw DimensionError("symmetric_eig_small: matrix is not square");
  const Eigen::Index n = t.rows();
  SymmetricEigen<Scalar> out;
  if (n == 0) {
    out.values.resize(0);
    if (compute_vectors) out.vectors.resize(0, 0);
    return out;
  }
  if (!t.allFinite()) throw DomainError("symmetric_eig_small: non-finite entry");
  const Scalar scale = t.cwiseAbs().maxCoeff();
  const Scalar skew = (t - t.transpose()).cwiseAbs().maxCoeff();
  if (skew > Scalar(1e-10) * scale) throw SymmetryError("symmetric_eig_small: matrix is not symmetric");

  Matrix<Scalar> a = (t + t.transpose()) * Scalar(0.5);
  Vector<Scalar> diag, sub;
  Matrix<Scalar> z;
  detail::householder_tridiagonalize(a, diag, sub, compute_vectors ? &z : nullptr);
  detail::tridiagonal_ql(diag, sub, compute_vectors ? &z : nullptr, 30L * static_cast<long>(n));

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) { return diag(x) > diag(y); });

  out.values.resize(n);
  if (compute_vectors) out.vectors.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values(i) = diag(order[static_cast<std::size_t>(i)]);
    if (compute_vectors) out.vectors.col(i) = z.col(order[static_cast<std::size_t>(i)]);
  }
  return out;
}

}  // namespace kryrank
