#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "rkp/matrix.hpp"

namespace rkp {

/// LU factorization with partial pivoting, PA = LU, stored in place.
///
/// Factorization stops with SingularPivot when a pivot falls below
/// 2^-52 * max|A_ij|; the exception's diagnostic() carries the smallest pivot
/// magnitude reached so far.
template <Scalar T>
class LuFactorization {
 public:
  explicit LuFactorization(Matrix<T> a) : lu_(std::move(a)), perm_(static_cast<std::size_t>(lu_.rows())) {
    require(lu_.is_square(), "LU needs a square matrix");
    const index_t n = lu_.rows();
    const double threshold = std::numeric_limits<double>::epsilon() * max_abs(lu_);
    min_pivot_ = std::numeric_limits<double>::infinity();
    if (n == 0) return;

    for (index_t k = 0; k < n; ++k) {
      index_t p = k;
      double best = std::abs(lu_(k, k));
      for (index_t i = k + 1; i < n; ++i) {
        const double v = std::abs(lu_(i, k));
        if (v > best) {
          best = v;
          p = i;
        }
      }
      perm_[k] = p;
      min_pivot_ = std::min(min_pivot_, best);
      if (best <= threshold || best == 0.0) {
        throw Error(ErrorKind::SingularPivot,
                    "pivot " + std::to_string(best) + " at step " + std::to_string(k), min_pivot_);
      }
      if (p != k)
        for (index_t j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(p, j));

      const T inv = T{1} / lu_(k, k);
      auto ck = lu_.col(k);
      for (index_t i = k + 1; i < n; ++i) ck[i] *= inv;
      for (index_t j = k + 1; j < n; ++j) {
        const T ukj = lu_(k, j);
        if (ukj == T{}) continue;
        auto cj = lu_.col(j);
        for (index_t i = k + 1; i < n; ++i) cj[i] -= ck[i] * ukj;
      }
    }
  }

  index_t size() const noexcept { return lu_.rows(); }
  double min_pivot() const noexcept { return min_pivot_; }

  Vector<T> solve(std::span<const T> b) const {
    const index_t n = lu_.rows();
    require(static_cast<index_t>(b.size()) == n, "LU solve dimension mismatch");
    Vector<T> x(b.begin(), b.end());
    for (index_t k = 0; k < n; ++k)
      if (perm_[k] != k) std::swap(x[k], x[perm_[k]]);
    // Forward substitution, unit lower triangle.
    for (index_t j = 0; j < n; ++j) {
      const T xj = x[j];
      if (xj == T{}) continue;
      auto cj = lu_.col(j);
      for (index_t i = j + 1; i < n; ++i) x[i] -= cj[i] * xj;
    }
    // Back substitution.
    for (index_t j = n - 1; j >= 0; --j) {
      x[j] /= lu_(j, j);
      const T xj = x[j];
      if (xj == T{}) continue;
      auto cj = lu_.col(j);
      for (index_t i = 0; i < j; ++i) x[i] -= cj[i] * xj;
    }
    return x;
  }

  Vector<T> solve(const Vector<T>& b) const { return solve(std::span<const T>(b)); }

  Matrix<T> solve(const Matrix<T>& b) const {
    Matrix<T> x(b.rows(), b.cols());
    for (index_t j = 0; j < b.cols(); ++j) {
      const Vector<T> xj = solve(b.col(j));
      std::copy(xj.begin(), xj.end(), x.col(j).begin());
    }
    return x;
  }

 private:
  Matrix<T> lu_;
  std::vector<index_t> perm_;
  double min_pivot_ = 0.0;
};

template <Scalar T>
struct LuSolveResult {
  Vector<T> x;
  double min_pivot = 0.0;
};

template <Scalar T>
LuSolveResult<T> lu_solve(const Matrix<T>& a, const Vector<T>& b) {
  require(a.is_square(), "lu_solve needs a square matrix");
  require(static_cast<index_t>(b.size()) == a.rows(), "lu_solve right-hand side length mismatch");
  LuFactorization<T> lu(a);
  return {lu.solve(b), lu.min_pivot()};
}

}  // namespace rkp
