#pragma once

// One-sided (Hestenes) Jacobi SVD. Slow compared to bidiagonalization but
// simple and accurate in the relative sense, which matters when it is the
// oracle for condition numbers around 1e8.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rkp/matrix.hpp"
#include "rkp/qr.hpp"

namespace rkp {

template <Scalar T>
struct SvdFactors {
  Matrix<T> U;                // m x r, orthonormal columns
  std::vector<double> sigma;  // non-increasing, length r = min(m, n)
  Matrix<T> V;                // n x r, orthonormal columns

  Matrix<T> reconstruct() const {
    Matrix<T> us = U;
    for (index_t j = 0; j < us.cols(); ++j) scale<T>(us.col(j), T{sigma[j]});
    return matmul_adjoint(us, V);
  }
};

inline constexpr int kJacobiMaxSweeps = 80;

namespace detail {

// Orthogonalizes the columns of `a` in place; applies the same rotations to
// `v` when non-null. Requires a.rows() >= a.cols().
template <Scalar T>
void jacobi_orthogonalize(Matrix<T>& a, Matrix<T>* v) {
  const index_t m = a.rows();
  const index_t n = a.cols();
  const double tol = std::numeric_limits<double>::epsilon() * std::max<double>(10.0, static_cast<double>(m));

  std::vector<double> sq(static_cast<std::size_t>(n));
  for (index_t j = 0; j < n; ++j) sq[j] = abs2(norm2<T>(a.col(j)));

  for (int sweep = 0; sweep < kJacobiMaxSweeps; ++sweep) {
    bool rotated = false;
    for (index_t i = 0; i + 1 < n; ++i) {
      for (index_t j = i + 1; j < n; ++j) {
        const double alpha = sq[i];
        const double beta = sq[j];
        if (alpha == 0.0 || beta == 0.0) continue;
        const T gamma = dot<T>(a.col(i), a.col(j));
        const double g = std::abs(gamma);
        if (g <= tol * std::sqrt(alpha) * std::sqrt(beta)) continue;
        rotated = true;

        // Reduce to a real symmetric 2x2 problem by rotating the phase of column j.
        const T phase = gamma / g;
        const double zeta = (beta - alpha) / (2.0 * g);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;

        auto rotate = [&](Matrix<T>& m_) {
          auto ci = m_.col(i);
          auto cj = m_.col(j);
          const T ph = conj(phase);
          for (index_t r = 0; r < m_.rows(); ++r) {
            const T xi = ci[r];
            const T xj = cj[r] * ph;
            ci[r] = c * xi - s * xj;
            cj[r] = s * xi + c * xj;
          }
        };
        rotate(a);
        if (v) rotate(*v);
        sq[i] = abs2(norm2<T>(a.col(i)));
        sq[j] = abs2(norm2<T>(a.col(j)));
        // A column left at rounding level relative to the pair is a zero column;
        // keeping the residue would let it stay parallel to its partner forever.
        const double floor = std::numeric_limits<double>::epsilon() * std::numeric_limits<double>::epsilon() *
                             (alpha + beta);
        for (index_t c : {i, j}) {
          if (sq[c] <= floor) {
            std::fill(a.col(c).begin(), a.col(c).end(), T{});
            sq[c] = 0.0;
          }
        }
      }
    }
    if (!rotated) return;
  }
  throw Error(ErrorKind::NoConvergence,
              "Jacobi SVD did not converge within " + std::to_string(kJacobiMaxSweeps) + " sweeps");
}

template <Scalar T>
SvdFactors<T> svd_tall(const Matrix<T>& a) {
  const index_t m = a.rows();
  const index_t n = a.cols();
  Matrix<T> work = a;
  Matrix<T> v = Matrix<T>::identity(n);
  jacobi_orthogonalize(work, &v);

  std::vector<double> s(static_cast<std::size_t>(n));
  for (index_t j = 0; j < n; ++j) s[j] = norm2<T>(work.col(j));
  std::vector<index_t> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), index_t{0});
  std::stable_sort(order.begin(), order.end(), [&](index_t x, index_t y) { return s[x] > s[y]; });

  SvdFactors<T> out{Matrix<T>(m, n), std::vector<double>(static_cast<std::size_t>(n)), Matrix<T>(n, n)};
  index_t nonzero = 0;
  for (index_t p = 0; p < n; ++p) {
    const index_t j = order[p];
    out.sigma[p] = s[j];
    std::copy(v.col(j).begin(), v.col(j).end(), out.V.col(p).begin());
    if (s[j] > 0.0) {
      auto dst = out.U.col(p);
      auto src = work.col(j);
      for (index_t r = 0; r < m; ++r) dst[r] = src[r] / s[j];
      ++nonzero;
    }
  }
  // Exactly-zero columns carry no direction; complete U deterministically.
  if (nonzero < n) {
    Matrix<T> head = block_columns(out.U, 0, nonzero);
    Matrix<T> extra = orthonormal_complement(head, RngStream{0x5bd1e995ULL, 0});
    for (index_t p = nonzero; p < n; ++p)
      std::copy(extra.col(p - nonzero).begin(), extra.col(p - nonzero).end(), out.U.col(p).begin());
  }
  return out;
}

}  // namespace detail

/// Thin SVD A = U diag(sigma) V*, sigma sorted non-increasing.
template <Scalar T>
SvdFactors<T> svd(const Matrix<T>& a) {
  for (const T& x : a.data())
    if (!is_finite(x)) throw Error(ErrorKind::NonFinite, "svd input is not finite");
  if (a.rows() >= a.cols()) return detail::svd_tall(a);
  SvdFactors<T> t = detail::svd_tall(adjoint(a));
  return {std::move(t.V), std::move(t.sigma), std::move(t.U)};
}

/// Singular values only (no accumulation of V).
template <Scalar T>
std::vector<double> singular_values(const Matrix<T>& a) {
  Matrix<T> work = a.rows() >= a.cols() ? a : adjoint(a);
  detail::jacobi_orthogonalize<T>(work, nullptr);
  std::vector<double> s(static_cast<std::size_t>(work.cols()));
  for (index_t j = 0; j < work.cols(); ++j) s[j] = norm2<T>(work.col(j));
  std::sort(s.begin(), s.end(), std::greater<>());
  return s;
}

/// ||A||_2. Tall or wide inputs go through the small Gram matrix; squaring
/// the spectrum is harmless for the largest singular value.
template <Scalar T>
double spectral_norm(const Matrix<T>& a) {
  if (a.empty()) return 0.0;
  if (a.rows() >= 2 * a.cols()) return std::sqrt(singular_values(adjoint_matmul(a, a)).front());
  if (a.cols() >= 2 * a.rows()) return std::sqrt(singular_values(matmul_adjoint(a, a)).front());
  return singular_values(a).front();
}

/// sigma_max / sigma_min; infinite when the smallest singular value is zero.
template <Scalar T>
double condition_number(const Matrix<T>& a) {
  const auto s = singular_values(a);
  if (s.back() == 0.0) return std::numeric_limits<double>::infinity();
  return s.front() / s.back();
}

/// Minimum-norm solution A^+ b, truncating singular values below
/// rcond * sigma_max.
template <Scalar T>
Vector<T> pseudoinverse_solve(const Matrix<T>& a, const Vector<T>& b, double rcond = 1e-10) {
  const SvdFactors<T> f = svd(a);
  const Vector<T> c = adjoint_matvec(f.U, b);
  Vector<T> y(c.size(), T{});
  const double cut = rcond * (f.sigma.empty() ? 0.0 : f.sigma.front());
  for (std::size_t i = 0; i < c.size(); ++i)
    if (f.sigma[i] > cut) y[i] = c[i] / f.sigma[i];
  return matvec(f.V, y);
}

}  // namespace rkp
