#pragma once

#include <cmath>

#include "rkp/matrix.hpp"
#include "rkp/rng.hpp"

namespace rkp {

namespace detail {

// One classical Gram-Schmidt sweep of v against the first `count` columns of q.
template <Scalar T>
void project_out(const Matrix<T>& q, index_t count, std::span<T> v) {
  std::vector<T> h(static_cast<std::size_t>(count));
  for (index_t j = 0; j < count; ++j) h[j] = dot<T>(q.col(j), std::span<const T>(v));
  for (index_t j = 0; j < count; ++j) axpy<T>(-h[j], q.col(j), v);
}

// Orthogonalize v against q(:, 0:count) twice and normalize it in place.
// Returns the norm left after both passes.
template <Scalar T>
double orthogonalize_twice(const Matrix<T>& q, index_t count, std::span<T> v) {
  project_out(q, count, v);
  project_out(q, count, v);
  const double nv = norm2<T>(std::span<const T>(v));
  if (nv > 0.0) scale<T>(v, T{1.0 / nv});
  return nv;
}

}  // namespace detail

/// Orthonormal basis for span(X) by Gram-Schmidt with one full
/// reorthogonalization pass per column. Throws RankCollapse when a column
/// retains less than 1e-12 of its norm after projection.
template <Scalar T>
Matrix<T> qr_orthonormalize(const Matrix<T>& x) {
  require(x.cols() <= x.rows(), "qr_orthonormalize needs cols <= rows");
  Matrix<T> q = x;
  for (index_t j = 0; j < q.cols(); ++j) {
    const double original = norm2<T>(x.col(j));
    const double left = detail::orthogonalize_twice(q, j, q.col(j));
    if (original == 0.0 || left < 1e-12 * original) {
      throw Error(ErrorKind::RankCollapse,
                  "column " + std::to_string(j) + " is numerically dependent on earlier columns",
                  original == 0.0 ? 0.0 : left / original);
    }
  }
  return q;
}

/// Orthonormal basis of the orthogonal complement of span(basis), which must
/// already be orthonormal. Built by orthogonalizing Gaussian columns drawn
/// from `stream`, so it never consults an SVD.
template <Scalar T>
Matrix<T> orthonormal_complement(const Matrix<T>& basis, RngStream stream) {
  const index_t n = basis.rows();
  const index_t m = basis.cols();
  require(m <= n, "basis has more columns than rows");
  Matrix<T> work = hcat(basis, Matrix<T>(n, n - m));
  GaussianSampler g(stream);
  for (index_t j = m; j < n; ++j) {
    for (int attempt = 0;; ++attempt) {
      auto c = work.col(j);
      for (T& v : c) v = g.draw<T>();
      const double original = norm2<T>(std::span<const T>(c));
      const double left = detail::orthogonalize_twice(work, j, c);
      if (left > 1e-8 * original) break;
      if (attempt > 8) throw Error(ErrorKind::RankCollapse, "orthonormal completion failed");
    }
  }
  return block_columns(work, m, n - m);
}

}  // namespace rkp
