#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <concepts>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <type_traits>
#include <vector>

#include "rkp/error.hpp"

namespace rkp {

using index_t = std::ptrdiff_t;
using complex_t = std::complex<double>;

template <class T>
concept Scalar = std::same_as<T, double> || std::same_as<T, complex_t>;

template <class T>
inline constexpr bool is_complex_v = std::same_as<T, complex_t>;

inline double conj(double x) { return x; }
inline complex_t conj(const complex_t& x) { return std::conj(x); }
inline double abs2(double x) { return x * x; }
inline double abs2(const complex_t& x) { return std::norm(x); }
inline double real_part(double x) { return x; }
inline double real_part(const complex_t& x) { return x.real(); }
inline bool is_finite(double x) { return std::isfinite(x); }
inline bool is_finite(const complex_t& x) {
  return std::isfinite(x.real()) && std::isfinite(x.imag());
}

template <Scalar T>
using Vector = std::vector<T>;

/// Dense column-major matrix over double or complex<double>.
template <Scalar T>
class Matrix {
 public:
  using value_type = T;

  Matrix() = default;
  Matrix(index_t rows, index_t cols) : rows_(rows), cols_(cols), data_(checked_size(rows, cols)) {}

  // Column-major entries; rejects NaN/Inf.
  Matrix(index_t rows, index_t cols, std::vector<T> entries)
      : rows_(rows), cols_(cols), data_(std::move(entries)) {
    require(static_cast<index_t>(data_.size()) == checked_size(rows, cols),
            "matrix entry count does not match its shape");
    for (const T& v : data_) {
      if (!is_finite(v)) throw Error(ErrorKind::NonFinite, "matrix entry is not finite");
    }
  }

  // Row-wise nested initializer, convenient for small literals.
  Matrix(std::initializer_list<std::initializer_list<T>> rows) {
    rows_ = static_cast<index_t>(rows.size());
    cols_ = rows_ == 0 ? 0 : static_cast<index_t>(rows.begin()->size());
    data_.assign(checked_size(rows_, cols_), T{});
    index_t i = 0;
    for (const auto& row : rows) {
      require(static_cast<index_t>(row.size()) == cols_, "ragged matrix initializer");
      index_t j = 0;
      for (const T& v : row) (*this)(i, j++) = v;
      ++i;
    }
  }

  static Matrix identity(index_t n) {
    Matrix m(n, n);
    for (index_t i = 0; i < n; ++i) m(i, i) = T{1};
    return m;
  }

  static Matrix diagonal(std::span<const double> d) {
    const auto n = static_cast<index_t>(d.size());
    Matrix m(n, n);
    for (index_t i = 0; i < n; ++i) m(i, i) = T{d[i]};
    return m;
  }

  static Matrix from_columns(std::span<const Vector<T>> columns) {
    require(!columns.empty(), "from_columns needs at least one column");
    Matrix m(static_cast<index_t>(columns[0].size()), static_cast<index_t>(columns.size()));
    for (index_t j = 0; j < m.cols(); ++j) {
      require(static_cast<index_t>(columns[j].size()) == m.rows(), "column length mismatch");
      std::copy(columns[j].begin(), columns[j].end(), m.col(j).begin());
    }
    return m;
  }

  index_t rows() const noexcept { return rows_; }
  index_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }
  bool is_square() const noexcept { return rows_ == cols_; }

  T& operator()(index_t i, index_t j) { return data_[static_cast<std::size_t>(j * rows_ + i)]; }
  const T& operator()(index_t i, index_t j) const {
    return data_[static_cast<std::size_t>(j * rows_ + i)];
  }

  std::span<T> col(index_t j) {
    return {data_.data() + j * rows_, static_cast<std::size_t>(rows_)};
  }
  std::span<const T> col(index_t j) const {
    return {data_.data() + j * rows_, static_cast<std::size_t>(rows_)};
  }
  Vector<T> column(index_t j) const {
    auto c = col(j);
    return {c.begin(), c.end()};
  }

  std::span<const T> data() const noexcept { return data_; }
  std::span<T> data() noexcept { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  static index_t checked_size(index_t rows, index_t cols) {
    require(rows >= 0 && cols >= 0, "negative matrix dimension");
    return rows * cols;
  }

  index_t rows_ = 0;
  index_t cols_ = 0;
  std::vector<T> data_;
};

// ---------------------------------------------------------------------------
// Vector kernels

template <Scalar T>
T dot(std::span<const T> x, std::span<const T> y) {
  T s{};
  for (std::size_t i = 0; i < x.size(); ++i) s += conj(x[i]) * y[i];
  return s;
}

template <Scalar T>
T dot(const Vector<T>& x, const Vector<T>& y) {
  return dot<T>(std::span<const T>(x), std::span<const T>(y));
}

/// Euclidean norm with scaling against overflow.
template <Scalar T>
double norm2(std::span<const T> x) {
  double scale = 0.0;
  for (const T& v : x) scale = std::max(scale, std::abs(v));
  if (scale == 0.0 || !std::isfinite(scale)) return scale;
  double s = 0.0;
  for (const T& v : x) s += abs2(v / scale);
  return scale * std::sqrt(s);
}

template <Scalar T>
double norm2(const Vector<T>& x) {
  return norm2<T>(std::span<const T>(x));
}

template <Scalar T>
void axpy(T alpha, std::span<const T> x, std::span<T> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

template <Scalar T>
void scale(std::span<T> x, T alpha) {
  for (T& v : x) v *= alpha;
}

template <Scalar T>
Vector<T> operator-(const Vector<T>& a, const Vector<T>& b) {
  require(a.size() == b.size(), "vector length mismatch");
  Vector<T> r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

template <Scalar T>
Vector<T> operator+(const Vector<T>& a, const Vector<T>& b) {
  require(a.size() == b.size(), "vector length mismatch");
  Vector<T> r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

// ---------------------------------------------------------------------------
// Matrix kernels

template <Scalar T>
Matrix<T> adjoint(const Matrix<T>& a) {
  Matrix<T> r(a.cols(), a.rows());
  for (index_t j = 0; j < a.cols(); ++j)
    for (index_t i = 0; i < a.rows(); ++i) r(j, i) = conj(a(i, j));
  return r;
}

template <Scalar T>
Vector<T> matvec(const Matrix<T>& a, std::span<const T> x) {
  require(static_cast<index_t>(x.size()) == a.cols(), "matvec dimension mismatch");
  Vector<T> y(static_cast<std::size_t>(a.rows()), T{});
  for (index_t j = 0; j < a.cols(); ++j) {
    const T xj = x[j];
    if (xj == T{}) continue;
    auto c = a.col(j);
    for (index_t i = 0; i < a.rows(); ++i) y[i] += c[i] * xj;
  }
  return y;
}

template <Scalar T>
Vector<T> matvec(const Matrix<T>& a, const Vector<T>& x) {
  return matvec(a, std::span<const T>(x));
}

/// y = A* x without forming the adjoint.
template <Scalar T>
Vector<T> adjoint_matvec(const Matrix<T>& a, std::span<const T> x) {
  require(static_cast<index_t>(x.size()) == a.rows(), "adjoint matvec dimension mismatch");
  Vector<T> y(static_cast<std::size_t>(a.cols()));
  for (index_t j = 0; j < a.cols(); ++j) y[j] = dot<T>(a.col(j), x);
  return y;
}

template <Scalar T>
Vector<T> adjoint_matvec(const Matrix<T>& a, const Vector<T>& x) {
  return adjoint_matvec(a, std::span<const T>(x));
}

template <Scalar T>
Matrix<T> matmul(const Matrix<T>& a, const Matrix<T>& b) {
  require(a.cols() == b.rows(), "matmul dimension mismatch");
  Matrix<T> c(a.rows(), b.cols());
  for (index_t j = 0; j < b.cols(); ++j) {
    auto cj = c.col(j);
    for (index_t p = 0; p < a.cols(); ++p) {
      const T bpj = b(p, j);
      if (bpj == T{}) continue;
      auto ap = a.col(p);
      for (index_t i = 0; i < a.rows(); ++i) cj[i] += ap[i] * bpj;
    }
  }
  return c;
}

/// A* B.
template <Scalar T>
Matrix<T> adjoint_matmul(const Matrix<T>& a, const Matrix<T>& b) {
  require(a.rows() == b.rows(), "adjoint_matmul dimension mismatch");
  Matrix<T> c(a.cols(), b.cols());
  for (index_t j = 0; j < b.cols(); ++j)
    for (index_t i = 0; i < a.cols(); ++i) c(i, j) = dot<T>(a.col(i), b.col(j));
  return c;
}

/// A B*.
template <Scalar T>
Matrix<T> matmul_adjoint(const Matrix<T>& a, const Matrix<T>& b) {
  require(a.cols() == b.cols(), "matmul_adjoint dimension mismatch");
  Matrix<T> c(a.rows(), b.rows());
  for (index_t p = 0; p < a.cols(); ++p) {
    auto ap = a.col(p);
    auto bp = b.col(p);
    for (index_t j = 0; j < b.rows(); ++j) {
      const T w = conj(bp[j]);
      if (w == T{}) continue;
      auto cj = c.col(j);
      for (index_t i = 0; i < a.rows(); ++i) cj[i] += ap[i] * w;
    }
  }
  return c;
}

template <Scalar T>
Matrix<T> operator+(const Matrix<T>& a, const Matrix<T>& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "matrix shape mismatch");
  Matrix<T> r = a;
  auto rd = r.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < rd.size(); ++i) rd[i] += bd[i];
  return r;
}

template <Scalar T>
Matrix<T> operator-(const Matrix<T>& a, const Matrix<T>& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "matrix shape mismatch");
  Matrix<T> r = a;
  auto rd = r.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < rd.size(); ++i) rd[i] -= bd[i];
  return r;
}

template <Scalar T>
Matrix<T> operator*(T alpha, const Matrix<T>& a) {
  Matrix<T> r = a;
  for (T& v : r.data()) v *= alpha;
  return r;
}

template <Scalar T>
double max_abs(const Matrix<T>& a) {
  double m = 0.0;
  for (const T& v : a.data()) m = std::max(m, std::abs(v));
  return m;
}

template <Scalar T>
double frobenius_norm(const Matrix<T>& a) {
  return norm2<T>(a.data());
}

/// Largest absolute deviation of A*A from the identity.
template <Scalar T>
double orthonormality_defect(const Matrix<T>& a) {
  const Matrix<T> g = adjoint_matmul(a, a);
  double d = 0.0;
  for (index_t j = 0; j < g.cols(); ++j)
    for (index_t i = 0; i < g.rows(); ++i)
      d = std::max(d, std::abs(g(i, j) - (i == j ? T{1} : T{})));
  return d;
}

template <Scalar T>
Matrix<T> hcat(const Matrix<T>& a, const Matrix<T>& b) {
  require(a.rows() == b.rows(), "hcat row mismatch");
  Matrix<T> r(a.rows(), a.cols() + b.cols());
  for (index_t j = 0; j < a.cols(); ++j) std::copy(a.col(j).begin(), a.col(j).end(), r.col(j).begin());
  for (index_t j = 0; j < b.cols(); ++j)
    std::copy(b.col(j).begin(), b.col(j).end(), r.col(a.cols() + j).begin());
  return r;
}

template <Scalar T>
Matrix<T> column_matrix(const Vector<T>& v) {
  return Matrix<T>(static_cast<index_t>(v.size()), 1, v);
}

template <Scalar T>
Matrix<T> block_columns(const Matrix<T>& a, index_t first, index_t count) {
  require(first >= 0 && count >= 0 && first + count <= a.cols(), "column block out of range");
  Matrix<T> r(a.rows(), count);
  for (index_t j = 0; j < count; ++j)
    std::copy(a.col(first + j).begin(), a.col(first + j).end(), r.col(j).begin());
  return r;
}

}  // namespace rkp
