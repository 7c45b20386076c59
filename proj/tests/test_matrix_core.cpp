#include <doctest.h>

#include "helpers.hpp"
#include "kryrank/covariance_operator.hpp"

using namespace kryrank;
using testing::random_matrix;
using testing::rel;

TEST_CASE("observation matrix validates shape and entries") {
  CHECK_THROWS_AS(ObservationMatrixd(Matrix<double>(0, 3)), DimensionError);
  CHECK_THROWS_AS(ObservationMatrixd::from_triplets(2, 2, {{2, 0, 1.0}}), DimensionError);
  CHECK_THROWS_AS(ObservationMatrixd::from_triplets(2, 2, {{0, 1, 1.0}, {0, 1, 2.0}}), DimensionError);
  const auto x = ObservationMatrixd::from_triplets(2, 3, {{0, 1, 1.0}, {1, 2, 2.0}});
  CHECK(x.is_sparse());
  CHECK(x.rows() == 2);
  CHECK(x.cols() == 3);
  CHECK(x.stored_entries() == 2);
}

TEST_CASE("dense and sparse storage agree") {
  Rng rng(11);
  const auto s = testing::random_sparse(40, 30, 0.2, rng);
  const ObservationMatrixd xs(s);
  const ObservationMatrixd xd{Matrix<double>(s)};
  const Vector<double> v = testing::random_vector(30, rng);
  const Vector<double> w = testing::random_vector(40, rng);
  CHECK((xs.apply(v) - xd.apply(v)).norm() <= 1e-12 * xd.apply(v).norm());
  CHECK((xs.apply_transpose(w) - xd.apply_transpose(w)).norm() <= 1e-12 * xd.apply_transpose(w).norm());
  CHECK((xs.column_block(5, 7) - xd.column_block(5, 7)).norm() == 0.0);
  CHECK_THROWS_AS(xs.apply(w), DimensionError);
  CHECK_THROWS_AS(xd.apply_transpose(v), DimensionError);
}

TEST_CASE("cov_matvec") {
  SUBCASE("zero matrix") {
    const ObservationMatrixd x{Matrix<double>::Zero(4, 6)};
    CHECK(cov_matvec(CovarianceOperator<double>(x), Vector<double>::Ones(4)).norm() == 0.0);
  }
  SUBCASE("identity covariance") {
    const ObservationMatrixd x{Matrix<double>(Matrix<double>::Identity(5, 5) * std::sqrt(5.0))};
    const Vector<double> v = Vector<double>::LinSpaced(5, 1, 5);
    CHECK((cov_matvec(CovarianceOperator<double>(x), v) - v).norm() < 1e-12);
  }
  SUBCASE("explicit formation oracle") {
    Rng rng(1);
    const Matrix<double> d = random_matrix(6, 9, rng);
    const ObservationMatrixd x(d);
    const Vector<double> v = testing::random_vector(6, rng);
    const Vector<double> expect = (d * d.transpose() / 9.0) * v;
    CHECK((cov_matvec(CovarianceOperator<double>(x), v) - expect).norm() <= 1e-12 * expect.norm());
  }
  SUBCASE("dimension mismatch") {
    const ObservationMatrixd x{Matrix<double>::Ones(3, 4)};
    CHECK_THROWS_AS(cov_matvec(CovarianceOperator<double>(x), Vector<double>::Ones(4)), DimensionError);
  }
}

TEST_CASE("frob_sq") {
  CHECK(frob_sq(ObservationMatrixd(Matrix<double>::Zero(3, 3))) == 0.0);
  CHECK(frob_sq(ObservationMatrixd(Matrix<double>::Ones(2, 2))) == 4.0);
  Rng rng(2);
  const auto s = testing::random_sparse(100, 50, 0.1, rng);
  CHECK(rel(frob_sq(ObservationMatrixd(s)), Matrix<double>(s).squaredNorm()) < 1e-12);
}

TEST_CASE("gram_frob_sq") {
  CHECK(gram_frob_sq(ObservationMatrixd(Matrix<double>::Zero(4, 3))) == 0.0);
  Rng rng(3);
  Vector<double> u = testing::random_vector(6, rng), w = testing::random_vector(4, rng);
  u.normalize();
  w.normalize();
  CHECK(gram_frob_sq(ObservationMatrixd(Matrix<double>(u * w.transpose()))) == doctest::Approx(1.0).epsilon(1e-12));

  const Matrix<double> d = random_matrix(8, 5, rng);
  const Vector<double> ell = testing::oracle_spectrum(d);
  CHECK(rel(gram_frob_sq(ObservationMatrixd(d)), ell.squaredNorm() * 25.0) < 1e-10);

  // Both Gram sides, dense and sparse, wider than one block.
  for (auto [p, n] : {std::pair{300, 40}, std::pair{40, 300}}) {
    const auto s = testing::random_sparse(p, n, 0.05, rng);
    const Matrix<double> dense(s);
    const double expect = (dense.transpose() * dense).squaredNorm();
    CHECK(rel(gram_frob_sq(ObservationMatrixd(s)), expect) < 1e-12);
    CHECK(rel(gram_frob_sq(ObservationMatrixd(dense)), expect) < 1e-12);
  }
}

TEST_CASE("center_columns") {
  CHECK(center_columns(ObservationMatrixd(Matrix<double>::Constant(3, 4, 5.0))).dense().norm() == 0.0);
  CHECK(center_columns(ObservationMatrixd(Matrix<double>::Constant(3, 1, 2.0))).dense().norm() == 0.0);
  Rng rng(4);
  const auto c = center_columns(ObservationMatrixd(testing::random_sparse(4, 6, 0.5, rng)));
  CHECK_FALSE(c.is_sparse());
  CHECK(c.dense().rowwise().sum().cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("trace and asymmetry") {
  Matrix<double> a(2, 2);
  a << 1, 2, 2, 5;
  CHECK(trace(ObservationMatrixd(a)) == 6.0);
  CHECK(asymmetry(ObservationMatrixd(a)) == 0.0);
  a(0, 1) = 3;
  CHECK(asymmetry(ObservationMatrixd(a)) == doctest::Approx(0.2));
  CHECK(std::isinf(asymmetry(ObservationMatrixd(Matrix<double>::Ones(2, 3)))));
  CHECK_THROWS_AS(trace(ObservationMatrixd(Matrix<double>::Ones(2, 3))), DimensionError);
}

TEST_CASE("covariance operator properties on random data") {
  Rng rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::Index p = 10 + 8 * trial, n = 15 + 13 * trial;
    const Matrix<double> d = random_matrix(p, n, rng);
    const ObservationMatrixd x(d);
    const CovarianceOperator<double> op(x);
    for (int k = 0; k < 20; ++k) {
      const Vector<double> u = testing::random_vector(p, rng), v = testing::random_vector(p, rng);
      CHECK(std::abs(u.dot(op.apply(v)) - op.apply(u).dot(v)) <= 1e-10 * u.norm() * v.norm());
      CHECK(v.dot(op.apply(v)) >= -1e-12 * v.squaredNorm());
    }
    const Vector<double> ell = testing::oracle_spectrum(d);
    CHECK(rel(ell.sum(), frob_sq(x) / static_cast<double>(n)) < 1e-10);
    CHECK(rel(gram_frob_sq(x) / static_cast<double>(n * n), ell.squaredNorm()) < 1e-10);
    CHECK(rel(op.trace(), ell.sum()) < 1e-10);
    CHECK(rel(op.frob_sq(), ell.squaredNorm()) < 1e-10);
  }
}

TEST_CASE("direct operator") {
  Matrix<double> a(2, 2);
  a << 2, 1, 1, 3;
  const ObservationMatrixd x(a);
  const DirectOperator<double> op(x);
  CHECK(op.samples() == 2);
  CHECK(op.trace() == 5.0);
  CHECK(op.frob_sq() == 15.0);
  CHECK((op.apply(Vector<double>::Ones(2)) - Vector<double>(a.rowwise().sum())).norm() == 0.0);
  a(0, 1) = 0;
  const ObservationMatrixd y(a);
  CHECK_THROWS_AS(DirectOperator<double>{y}, SymmetryError);
  const ObservationMatrixd z{Matrix<double>::Ones(2, 3)};
  CHECK_THROWS_AS(DirectOperator<double>{z}, DimensionError);
}
