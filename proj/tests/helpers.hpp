#pragma once

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>

#include "kryrank/observation_matrix.hpp"
#include "kryrank/random.hpp"

namespace testing {

using kryrank::Matrix;
using kryrank::Vector;

inline Matrix<double> random_matrix(Eigen::Index rows, Eigen::Index cols, kryrank::Rng& rng) {
  Matrix<double> m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
  return m;
}

inline Vector<double> random_vector(Eigen::Index n, kryrank::Rng& rng) {
  Vector<double> v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.normal();
  return v;
}

/// Sparse matrix with roughly `density` of the entries set.
inline kryrank::SparseRows<double> random_sparse(Eigen::Index rows, Eigen::Index cols, double density,
                                                 kryrank::Rng& rng) {
  std::vector<Eigen::Triplet<double>> t;
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j)
      if (rng.uniform() < density) t.emplace_back(i, j, rng.normal());
  kryrank::SparseRows<double> s(rows, cols);
  s.setFromTriplets(t.begin(), t.end());
  return s;
}

/// Oracle: eigenvalues of (1/n) X X^T, descending, via Eigen's solver.
inline Vector<double> oracle_spectrum(const Matrix<double>& x) {
  const Matrix<double> s = x * x.transpose() / static_cast<double>(x.cols());
  Eigen::SelfAdjointEigenSolver<Matrix<double>> es(s, Eigen::EigenvaluesOnly);
  Vector<double> v = es.eigenvalues().reverse();
  return v;
}

/// Data whose sample covariance has eigenvalues `ell` exactly (p <= n):
/// X = U diag(sqrt(n ell)) W^T with orthonormal U (p x p) and W (n x p).
inline Matrix<double> planted_data(const Vector<double>& ell, Eigen::Index n, kryrank::Rng& rng) {
  const Eigen::Index p = ell.size();
  Eigen::HouseholderQR<Matrix<double>> qu(random_matrix(p, p, rng));
  Eigen::HouseholderQR<Matrix<double>> qw(random_matrix(n, p, rng));
  const Matrix<double> u = qu.householderQ() * Matrix<double>::Identity(p, p);
  const Matrix<double> w = qw.householderQ() * Matrix<double>::Identity(n, p);
  const Vector<double> s = (ell * static_cast<double>(n)).cwiseSqrt();
  return u * s.asDiagonal() * w.transpose();
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace testing
