#pragma once

#include <Eigen/QR>

#include <cmath>
#include <cstdint>
#include <vector>

#include "kryrank/observation_matrix.hpp"
#include "kryrank/random.hpp"

namespace kryrank {

/// Gaussian spiked model: x_i = B s_i + sqrt(sigma) n_i.
///
/// `lambdas` are eigenvalues of the population covariance Sigma = B B^T +
/// sigma I, i.e. they include the noise floor; B's columns are orthonormal and
/// scaled by sqrt(lambda_i - sigma).
struct SignalModelSpec {
  long p = 200;
  long n = 400;
  std::vector<double> lambdas;  ///< descending, each > sigma; q = lambdas.size()
  double sigma = 1.0;
  std::uint64_t seed = 0;

  long q() const { return static_cast<long>(lambdas.size()); }

  void validate() const {
    if (p < 1 || n < 1) throw SpecError("signal model needs p, n >= 1");
    if (!(sigma > 0.0)) throw SpecError("signal model needs sigma > 0");
    if (q() > p) throw SpecError("signal model needs q <= p");
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
      if (i > 0 && lambdas[i] > lambdas[i - 1]) throw SpecError("signal eigenvalues must be non-increasing");
      if (!(lambdas[i] > sigma)) throw SpecError("signal eigenvalues must exceed sigma");
    }
  }
};

/// Sparse low-rank-plus-noise square matrix A = B Lambda B^T + N.
///
/// B is p x q with i.i.d. Bernoulli(density) support and normal values,
/// columns scaled to unit norm. Lambda is linearly spaced from 2 lambda_q down
/// to lambda_q. N is symmetric with the same density and normal entries of
/// standard deviation noise_edge * sigma / (2 sqrt(p density)), which puts
/// its spectral edge near noise_edge * sigma; sigma = 0 omits N.
struct SparseModelSpec {
  long p = 5000;
  long q = 50;
  double lambda_q = 5.0;
  double density = 0.05;
  double sigma = 1.0;
  double noise_edge = 3.8;
  std::uint64_t seed = 0;

  void validate() const {
    if (p < 1 || q < 1 || q > p) throw SpecError("sparse model needs 1 <= q <= p");
    if (!(density > 0.0 && density <= 1.0)) throw SpecError("sparse model needs 0 < density <= 1");
    if (!(lambda_q > 0.0)) throw SpecError("sparse model needs lambda_q > 0");
    if (sigma < 0.0 || !(noise_edge > 0.0)) throw SpecError("sparse model needs sigma >= 0 and noise_edge > 0");
    if (density * static_cast<double>(p) * static_cast<double>(q) < static_cast<double>(q)) {
      throw SpecError("sparse model density too low to place unit-norm columns");
    }
  }
};

/// p x q matrix with orthonormal columns scaled by sqrt(lambda_i - sigma).
/// Draws p q normals from `rng`.
template <typename Scalar = double>
Matrix<Scalar> signal_mixing(const SignalModelSpec& spec, Rng& rng) {
  const Eigen::Index p = spec.p;
  const Eigen::Index q = spec.q();
  Matrix<Scalar> g(p, q);
  for (Eigen::Index j = 0; j < q; ++j)
    for (Eigen::Index i = 0; i < p; ++i) g(i, j) = static_cast<Scalar>(rng.normal());
  if (q == 0) return g;
  Eigen::HouseholderQR<Matrix<Scalar>> qr(g);
  Matrix<Scalar> b = qr.householderQ() * Matrix<Scalar>::Identity(p, q);
  for (Eigen::Index j = 0; j < q; ++j) {
    b.col(j) *= static_cast<Scalar>(std::sqrt(spec.lambdas[static_cast<std::size_t>(j)] - spec.sigma));
  }
  return b;
}

/// Sigma = B B^T + sigma I for the mixing matrix drawn from `spec.seed`.
template <typename Scalar = double>
Matrix<Scalar> population_covariance(const SignalModelSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const Matrix<Scalar> b = signal_mixing<Scalar>(spec, rng);
  Matrix<Scalar> sigma = b * b.transpose();
  sigma.diagonal().array() += static_cast<Scalar>(spec.sigma);
  return sigma;
}

/// p x n observations, one sample per column. Draw order: mixing matrix,
/// then the q x n latent signals, then the p x n noise, all column-major
/// from stream 0 of `spec.seed`.
template <typename Scalar = double>
ObservationMatrix<Scalar> gen_signal_data(const SignalModelSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const Matrix<Scalar> b = signal_mixing<Scalar>(spec, rng);
  const Eigen::Index p = spec.p;
  const Eigen::Index n = spec.n;
  const Eigen::Index q = spec.q();
  Matrix<Scalar> s(q, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < q; ++i) s(i, j) = static_cast<Scalar>(rng.normal());
  Matrix<Scalar> x(p, n);
  const Scalar noise = static_cast<Scalar>(std::sqrt(spec.sigma));
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < p; ++i) x(i, j) = noise * static_cast<Scalar>(rng.normal());
  if (q > 0) x.noalias() += b * s;
  return ObservationMatrix<Scalar>(std::move(x));
}

/// Diagonal of Lambda for the sparse model.
inline std::vector<double> sparse_model_weights(const SparseModelSpec& spec) {
  std::vector<double> w(static_cast<std::size_t>(spec.q));
  for (long j = 0; j < spec.q; ++j) {
    const double t = spec.q > 1 ? static_cast<double>(j) / static_cast<double>(spec.q - 1) : 1.0;
    w[static_cast<std::size_t>(j)] = spec.lambda_q * (2.0 - t);
  }
  return w;
}

/// Builds A = B Lambda B^T + N (p x p, compressed sparse rows). Draw order:
/// B column by column, then the upper triangle of N row by row.
template <typename Scalar = double>
ObservationMatrix<Scalar> gen_sparse_lowrank(const SparseModelSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const Eigen::Index p = spec.p;
  const Eigen::Index q = spec.q;

  std::vector<Eigen::Triplet<Scalar>> entries;
  entries.reserve(static_cast<std::size_t>(spec.density * static_cast<double>(p * q) * 1.1) + static_cast<std::size_t>(q));
  for (Eigen::Index j = 0; j < q; ++j) {
    const std::size_t first = entries.size();
    double norm_sq = 0.0;
    for (Eigen::Index i = 0; i < p; ++i) {
      if (rng.uniform() < spec.density) {
        const double v = rng.normal();
        norm_sq += v * v;
        entries.emplace_back(i, j, static_cast<Scalar>(v));
      }
    }
    if (entries.size() == first) {
      const double v = rng.normal();
      norm_sq = v * v;
      entries.emplace_back(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(p))), j, static_cast<Scalar>(v));
    }
    const Scalar inv = static_cast<Scalar>(1.0 / std::sqrt(norm_sq));
    for (std::size_t e = first; e < entries.size(); ++e) {
      entries[e] = Eigen::Triplet<Scalar>(entries[e].row(), entries[e].col(), entries[e].value() * inv);
    }
  }
  Eigen::SparseMatrix<Scalar, Eigen::ColMajor> b(p, q);
  b.setFromTriplets(entries.begin(), entries.end());

  const auto weights = sparse_model_weights(spec);
  Eigen::SparseMatrix<Scalar, Eigen::ColMajor> bl = b;
  for (Eigen::Index j = 0; j < q; ++j) bl.col(j) *= static_cast<Scalar>(weights[static_cast<std::size_t>(j)]);
  SparseRows<Scalar> a = SparseRows<Scalar>(bl * b.transpose());
  // Rounding in the product leaves tiny asymmetries; average them out exactly.
  a = (SparseRows<Scalar>(a + SparseRows<Scalar>(a.transpose())) * Scalar(0.5));

  if (spec.sigma > 0.0) {
    const double sd = spec.noise_edge * spec.sigma / (2.0 * std::sqrt(static_cast<double>(p) * spec.density));
    std::vector<Eigen::Triplet<Scalar>> noise;
    noise.reserve(static_cast<std::size_t>(spec.density * static_cast<double>(p) * static_cast<double>(p) * 1.05));
    for (Eigen::Index i = 0; i < p; ++i) {
      for (Eigen::Index j = i; j < p; ++j) {
        if (rng.uniform() < spec.density) {
          const Scalar v = static_cast<Scalar>(sd * rng.normal());
          noise.emplace_back(i, j, v);
          if (j != i) noise.emplace_back(j, i, v);
        }
      }
    }
    SparseRows<Scalar> nmat(p, p);
    nmat.setFromTriplets(noise.begin(), noise.end());
    a += nmat;
  }
  a.prune(Scalar(0));
  return ObservationMatrix<Scalar>(std::move(a));
}

}  // namespace kryrank
