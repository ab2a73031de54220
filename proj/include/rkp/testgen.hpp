#pragma once

// Rank-deficient test matrices with known singular structure:
//   A = sum_{i=1}^{n-k} u_i (1/i) v_i*
// where u_i and v_i come from Gram-Schmidt (with reorthogonalization) applied
// to Gaussian vectors.

#include <cstdint>

#include "rkp/matrix.hpp"
#include "rkp/qr.hpp"
#include "rkp/rng.hpp"

namespace rkp {

template <Scalar T>
struct TestMatrix {
  Matrix<T> A;
  Matrix<T> left_basis;   // n x (n-k), u_1..u_{n-k}
  Matrix<T> right_basis;  // n x (n-k), v_1..v_{n-k}
  std::vector<double> sigma;
  index_t n = 0;
  index_t k = 0;
  std::uint64_t seed = 0;

  /// sigma_1 / sigma_{n-k}, the condition number with the zero singular values ignored.
  double cond_statistic() const { return sigma.front() / sigma.back(); }
};

template <Scalar T = double>
TestMatrix<T> build_test_matrix(index_t n, index_t k, std::uint64_t seed) {
  require(k >= 1 && k < n, "build_test_matrix needs 1 <= k < n");
  const index_t r = n - k;
  TestMatrix<T> tm;
  tm.n = n;
  tm.k = k;
  tm.seed = seed;
  tm.left_basis = qr_orthonormalize(gaussian_matrix<T>(n, r, RngStream{seed, 1}));
  tm.right_basis = qr_orthonormalize(gaussian_matrix<T>(n, r, RngStream{seed, 2}));
  tm.sigma.resize(static_cast<std::size_t>(r));
  for (index_t i = 0; i < r; ++i) tm.sigma[i] = 1.0 / static_cast<double>(i + 1);

  Matrix<T> us = tm.left_basis;
  for (index_t i = 0; i < r; ++i) scale<T>(us.col(i), T{tm.sigma[i]});
  tm.A = matmul_adjoint(us, tm.right_basis);
  return tm;
}

template <Scalar T>
struct NullBases {
  Matrix<T> N;  // n x k, orthonormal basis of N(A)
  Matrix<T> V;  // n x k, orthonormal basis of N(A*)
};

/// Null bases as orthogonal complements of the stored singular bases.
template <Scalar T>
NullBases<T> ground_truth_null_bases(const TestMatrix<T>& tm) {
  return {orthonormal_complement(tm.right_basis, RngStream{tm.seed, 3}),
          orthonormal_complement(tm.left_basis, RngStream{tm.seed, 4})};
}

}  // namespace rkp
