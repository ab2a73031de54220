#pragma once

// Random rank-k perturbations and the certificates that bound their effect.
//
// For a rank-k deficient A and factors P, Q (n x k), write
//   P = P_R + P_N*   (range of A, nullspace of A*)
//   Q = Q_R* + Q_N   (range of A*, nullspace of A)
// and let rho = ||P_R||, eta = sigma_min(P_N*), xi = ||Q_R*||, nu = sigma_min(Q_N).
// The bounds below are functions of these four numbers and the spectrum of A.

#include <cmath>

#include "rkp/matrix.hpp"
#include "rkp/rng.hpp"
#include "rkp/svd.hpp"

namespace rkp {

template <Scalar T>
struct PerturbationPair {
  Matrix<T> P;
  Matrix<T> Q;
  double scale = 1.0;  // the ||A|| value the factors were sized for

  index_t rank() const noexcept { return P.cols(); }
  Matrix<T> product() const { return matmul_adjoint(P, Q); }
};

/// Gaussian factors with unit-norm columns, each factor multiplied by
/// sqrt(norm_A) so that PQ* carries the scale of A.
template <Scalar T>
PerturbationPair<T> build_perturbation(index_t n, index_t k, double norm_A, RngStream stream) {
  require(n >= 1 && k >= 1, "build_perturbation needs n, k >= 1");
  require(norm_A > 0.0 && std::isfinite(norm_A), "build_perturbation needs a positive finite norm_A");
  const double root = std::sqrt(norm_A);
  auto make = [&](RngStream s) {
    Matrix<T> m = gaussian_matrix<T>(n, k, s);
    for (index_t j = 0; j < k; ++j) {
      const double nj = norm2<T>(m.col(j));
      if (nj < 1e-300) throw Error(ErrorKind::DegenerateColumn, "Gaussian column with vanishing norm");
      scale<T>(m.col(j), T{root / nj});
    }
    return m;
  };
  return {make(stream.child(1)), make(stream.child(2)), norm_A};
}

struct SubspaceSplit {
  double rho = 0.0;  // sigma_max(P_R)
  double eta = 0.0;  // sigma_min(P_N*)
  double xi = 0.0;   // sigma_max(Q_R*)
  double nu = 0.0;   // sigma_min(Q_N)
};

struct SplitComponents {
  double in_basis = 0.0;       // sigma_min(U* M): the eta / nu role
  double in_complement = 0.0;  // sigma_max((I - U U*) M): the rho / xi role
};

/// Splits M against an orthonormal basis U of a nullspace. When U has fewer
/// columns than M the projection is rank-deficient and in_basis is zero.
template <Scalar T>
SplitComponents split_against_nullspaces(const Matrix<T>& m, const Matrix<T>& basis) {
  require(m.rows() == basis.rows(), "split_against_nullspaces row mismatch");
  if (orthonormality_defect(basis) > 1e-10)
    throw Error(ErrorKind::BasisNotOrthonormal, "null basis is not orthonormal to 1e-10");
  const Matrix<T> coeff = adjoint_matmul(basis, m);  // j x k
  const Matrix<T> complement = m - matmul(basis, coeff);

  SplitComponents out;
  if (basis.cols() >= m.cols()) {
    const auto s = singular_values(coeff);
    out.in_basis = s[static_cast<std::size_t>(m.cols() - 1)];
  }
  out.in_complement = spectral_norm(complement);
  return out;
}

/// Assembles (rho, eta, xi, nu) from P against N(A*) and Q against N(A).
template <Scalar T>
SubspaceSplit subspace_split(const Matrix<T>& p, const Matrix<T>& q, const Matrix<T>& left_null,
                             const Matrix<T>& right_null) {
  const SplitComponents sp = split_against_nullspaces(p, left_null);
  const SplitComponents sq = split_against_nullspaces(q, right_null);
  return {sp.in_complement, sp.in_basis, sq.in_complement, sq.in_basis};
}

/// Bound on ||A(x - y)|| when ||b - (A + PQ*) y|| <= delta and b = A x.
inline double residual_amplification_bound(double delta, double norm_P, double sigma_min_PNstar) {
  require(delta >= 0.0, "delta must be non-negative");
  if (sigma_min_PNstar <= 0.0)
    throw Error(ErrorKind::ZeroProjection, "P has no full-rank component in N(A*)");
  return delta * (1.0 + norm_P / sigma_min_PNstar);
}

namespace detail {
inline double split_factor(double sigma_nk, const SubspaceSplit& s) {
  if (s.eta <= 0.0 || s.nu <= 0.0)
    throw Error(ErrorKind::ZeroProjection, "perturbation misses a nullspace direction (eta or nu is zero)");
  const double a = s.rho / s.eta;
  const double b = s.xi / s.nu;
  const double c = (sigma_nk + s.rho * s.xi) / (s.eta * s.nu);
  return std::sqrt(1.0 + a * a + b * b + c * c);
}
}  // namespace detail

/// Upper bound on ||(A + PQ*)^-1|| given sigma_{n-k}(A) and the split of P, Q.
inline double inverse_norm_bound(double sigma_nk, const SubspaceSplit& split) {
  require(sigma_nk > 0.0, "sigma_{n-k} must be positive");
  return detail::split_factor(sigma_nk, split) / sigma_nk;
}

/// Upper bound on the 2-norm condition number of A + PQ*.
inline double condition_bound(double sigma1, double sigma_nk, double norm_P, double norm_Q,
                              const SubspaceSplit& split) {
  require(sigma_nk > 0.0, "sigma_{n-k} must be positive");
  require(sigma1 >= sigma_nk, "sigma_1 must dominate sigma_{n-k}");
  return (sigma1 + norm_P * norm_Q) / sigma_nk * detail::split_factor(sigma_nk, split);
}

// Condition estimate once P and Q already lie in the nullspaces (rho = xi = 0).
inline double stabilized_condition_estimate(double sigma1, double sigma_nk, double norm_P, double norm_Q,
                                            double eta, double nu) {
  return condition_bound(sigma1, sigma_nk, norm_P, norm_Q, SubspaceSplit{0.0, eta, 0.0, nu});
}

}  // namespace rkp
