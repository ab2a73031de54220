#pragma once

#include <cmath>
#include <functional>
#include <limits>

#include "rkp/matrix.hpp"
#include "rkp/rng.hpp"

namespace rkp {

template <Scalar T>
using LinearOperator = std::function<Vector<T>(const Vector<T>&)>;

enum class GmresStatus { Converged, Stagnated };

template <Scalar T>
struct GmresResult {
  Vector<T> x;
  double achieved_residual = 0.0;  // ||b - A x|| / ||b||, recomputed from x
  index_t iterations = 0;
  GmresStatus status = GmresStatus::Converged;

  bool converged() const noexcept { return status == GmresStatus::Converged; }
};

namespace detail {

inline void givens(double a, double b, double& c, double& s) {
  if (b == 0.0) {
    c = 1.0;
    s = 0.0;
  } else {
    const double r = std::hypot(a, b);
    c = a / r;
    s = b / r;
  }
}

// Complex Givens rotation zeroing b in [a; b]: [c s; -conj(s) c] with real c.
inline void givens(const complex_t& a, const complex_t& b, double& c, complex_t& s) {
  const double ab = std::abs(b);
  if (ab == 0.0) {
    c = 1.0;
    s = 0.0;
    return;
  }
  const double aa = std::abs(a);
  if (aa == 0.0) {
    c = 0.0;
    s = std::conj(b) / ab;
    return;
  }
  const double r = std::hypot(aa, ab);
  c = aa / r;
  s = (a / aa) * std::conj(b) / r;
}

}  // namespace detail

/// Full (unrestarted) GMRES from a zero initial guess, with classical
/// Gram-Schmidt Arnoldi plus one reorthogonalization pass.
///
/// The returned residual is recomputed from the final iterate. If the Arnoldi
/// recurrence claims convergence but the true residual disagrees, the method
/// restarts from the current iterate while iterations remain. Running out of
/// iterations yields status Stagnated together with the best iterate seen.
template <Scalar T>
GmresResult<T> gmres(const LinearOperator<T>& apply, const Vector<T>& b, double tol, index_t max_iter) {
  require(tol > 0.0, "gmres tolerance must be positive");
  require(max_iter >= 1, "gmres needs max_iter >= 1");
  const auto n = static_cast<index_t>(b.size());
  const double bnorm = norm2(b);

  GmresResult<T> best{Vector<T>(b.size(), T{}), 0.0, 0, GmresStatus::Converged};
  if (bnorm == 0.0) return best;
  best.achieved_residual = 1.0;

  Vector<T> x(b.size(), T{});
  Vector<T> r = b;
  double rnorm = bnorm;
  index_t used = 0;

  while (used < max_iter) {
    const index_t m = std::min(max_iter - used, n);
    std::vector<Vector<T>> basis;
    basis.reserve(static_cast<std::size_t>(m + 1));
    Matrix<T> h(m + 1, m);
    std::vector<double> cs(static_cast<std::size_t>(m));
    std::vector<T> sn(static_cast<std::size_t>(m));
    Vector<T> g(static_cast<std::size_t>(m + 1), T{});
    g[0] = T{rnorm};

    Vector<T> v0 = r;
    scale<T>(v0, T{1.0 / rnorm});
    basis.push_back(std::move(v0));

    index_t j = 0;
    bool recurrence_done = false;
    for (; j < m; ++j) {
      Vector<T> w = apply(basis[j]);
      for (int pass = 0; pass < 2; ++pass) {
        for (index_t i = 0; i <= j; ++i) {
          const T hij = dot(basis[i], w);
          h(i, j) += hij;
          axpy<T>(-hij, basis[i], w);
        }
      }
      const double wnorm = norm2(w);
      h(j + 1, j) = T{wnorm};

      for (index_t i = 0; i < j; ++i) {
        const T a = h(i, j);
        const T bb = h(i + 1, j);
        h(i, j) = cs[i] * a + sn[i] * bb;
        h(i + 1, j) = -conj(sn[i]) * a + cs[i] * bb;
      }
      detail::givens(h(j, j), h(j + 1, j), cs[j], sn[j]);
      h(j, j) = cs[j] * h(j, j) + sn[j] * h(j + 1, j);
      h(j + 1, j) = T{};
      g[j + 1] = -conj(sn[j]) * g[j];
      g[j] = cs[j] * g[j];

      const bool breakdown = wnorm <= 1e-14 * std::abs(h(j, j)) || wnorm == 0.0;
      if (std::abs(g[j + 1]) <= tol * bnorm || breakdown) {
        ++j;
        recurrence_done = true;
        break;
      }
      scale<T>(w, T{1.0 / wnorm});
      basis.push_back(std::move(w));
    }
    used += j;

    // Back substitution on the triangular Hessenberg factor.
    Vector<T> y(static_cast<std::size_t>(j), T{});
    for (index_t i = j - 1; i >= 0; --i) {
      T s = g[i];
      for (index_t l = i + 1; l < j; ++l) s -= h(i, l) * y[l];
      y[i] = h(i, i) == T{} ? T{} : s / h(i, i);
    }
    for (index_t i = 0; i < j; ++i) axpy<T>(y[i], basis[i], x);

    const Vector<T> ax = apply(x);
    r = b - ax;
    rnorm = norm2(r);
    const double rel = rnorm / bnorm;
    const bool improved = rel < best.achieved_residual;
    if (improved) {
      best.x = x;
      best.achieved_residual = rel;
    }
    best.iterations = used;
    if (rel <= tol) {
      best.status = GmresStatus::Converged;
      return best;
    }
    // A cycle that neither converged nor improved cannot make progress by restarting.
    if (!improved || (recurrence_done && j == 0) || rnorm == 0.0) break;
  }
  best.status = GmresStatus::Stagnated;
  return best;
}

/// Power iteration on A*A from a random start. Returns the largest ||A x||
/// seen over unit vectors x, so the estimate never exceeds ||A||_2 beyond rounding.
template <Scalar T>
double spectral_norm_estimate(const LinearOperator<T>& apply, const LinearOperator<T>& apply_adjoint,
                              index_t n, int iters, RngStream stream) {
  require(iters >= 10, "spectral_norm_estimate needs at least 10 iterations");
  Vector<T> x = gaussian_vector<T>(n, stream);
  double est = 0.0;
  for (int it = 0; it < iters; ++it) {
    const double nx = norm2(x);
    if (nx == 0.0) break;
    scale<T>(x, T{1.0 / nx});
    const Vector<T> y = apply(x);
    const double ny = norm2(y);
    est = std::max(est, ny);
    if (ny == 0.0) break;
    x = apply_adjoint(y);
  }
  return est;
}

template <Scalar T>
double spectral_norm_estimate(const Matrix<T>& a, RngStream stream, int iters = 30) {
  return spectral_norm_estimate<T>([&](const Vector<T>& v) { return matvec(a, v); },
                                   [&](const Vector<T>& v) { return adjoint_matvec(a, v); }, a.cols(), iters,
                                   stream);
}

}  // namespace rkp
