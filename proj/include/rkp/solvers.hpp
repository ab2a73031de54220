#pragma once

// Solvers for consistent rank-deficient systems built on a rank-k
// perturbation A + PQ*. If A is rank-k deficient and b = A x, the solution y
// of (A + PQ*) y = b satisfies Q* y = 0 and A y = b; z = x - y is a null
// vector of A. Everything else in this file is bookkeeping around that fact:
// retries on bad draws, refinement, stabilization and rank detection.

#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "rkp/gmres.hpp"
#include "rkp/lu.hpp"
#include "rkp/matrix.hpp"
#include "rkp/perturbation.hpp"
#include "rkp/qr.hpp"
#include "rkp/rng.hpp"
#include "rkp/svd.hpp"

namespace rkp {

enum class SolveMode { Dense, Implicit };

inline const char* to_string(SolveMode m) { return m == SolveMode::Dense ? "dense" : "gmres"; }

struct SolveOptions {
  SolveMode mode = SolveMode::Dense;
  double tol = 1e-10;  // accepted relative residual ||Ax - b|| / ||b||
  RngStream stream{};
  int max_retries = 3;
  index_t max_iter = 0;  // GMRES iteration cap; 0 means n
  bool compute_cond = false;
};

struct NullspaceOptions {
  SolveMode mode = SolveMode::Dense;
  double tol = 1e-9;          // target for ||AZ|| / ||Z||, relative to ||A||
  double solver_tol = 1e-13;  // GMRES tolerance in implicit mode
  RngStream stream{};
  int max_retries = 3;
  index_t max_iter = 0;
  bool refine = false;
  bool compute_cond = false;
};

struct RankOptions {
  SolveMode mode = SolveMode::Dense;
  double tol_null = 1e-8;         // column residual ||A z|| / (||A|| ||z||) accepted as null
  double singular_growth = 1e12;  // ||A|| ||M^-1 g|| / ||g|| beyond this marks M singular
  double solver_tol = 1e-13;
  RngStream stream{};
  int max_retries = 3;
  index_t max_iter = 0;
};

/// A + PQ*, applied implicitly or factored once by LU.
template <Scalar T>
class PerturbedSystem {
 public:
  struct Solution {
    Vector<T> y;
    double residual = 0.0;  // ||b - (A + PQ*) y|| / ||b||
    index_t iterations = 0;
    bool ok = true;
  };

  /// Dense mode factors immediately and throws SingularPivot on a singular draw.
  /// P and Q may have zero columns, in which case the system is A itself.
  PerturbedSystem(Matrix<T> a, Matrix<T> p, Matrix<T> q, SolveMode mode, index_t max_iter = 0)
      : a_(std::move(a)), p_(std::move(p)), q_(std::move(q)), mode_(mode) {
    require(a_.is_square(), "perturbed system needs a square matrix");
    require(p_.rows() == a_.rows() && q_.rows() == a_.rows() && p_.cols() == q_.cols(),
            "perturbation factors must be n x k");
    max_iter_ = max_iter > 0 ? max_iter : a_.rows();
    if (mode_ == SolveMode::Dense) lu_.emplace(dense());
  }

  const Matrix<T>& A() const noexcept { return a_; }
  const Matrix<T>& P() const noexcept { return p_; }
  const Matrix<T>& Q() const noexcept { return q_; }
  SolveMode mode() const noexcept { return mode_; }
  index_t size() const noexcept { return a_.rows(); }
  double min_pivot() const noexcept { return lu_ ? lu_->min_pivot() : 0.0; }

  Matrix<T> dense() const {
    if (p_.cols() == 0) return a_;
    return a_ + matmul_adjoint(p_, q_);
  }

  Vector<T> apply(const Vector<T>& v) const {
    Vector<T> y = matvec(a_, v);
    if (p_.cols() > 0) {
      const Vector<T> c = adjoint_matvec(q_, v);
      const Vector<T> pc = matvec(p_, c);
      for (std::size_t i = 0; i < y.size(); ++i) y[i] += pc[i];
    }
    return y;
  }

  Solution solve(const Vector<T>& b, double tol) const {
    Solution s;
    const double bn = norm2(b);
    if (bn == 0.0) {
      s.y.assign(b.size(), T{});
      return s;
    }
    if (lu_) {
      s.y = lu_->solve(b);
      s.iterations = 1;
      s.residual = norm2(b - apply(s.y)) / bn;
      s.ok = std::isfinite(s.residual);
    } else {
      GmresResult<T> g = gmres<T>([this](const Vector<T>& v) { return apply(v); }, b, tol, max_iter_);
      s.y = std::move(g.x);
      s.iterations = g.iterations;
      s.residual = g.achieved_residual;
      s.ok = g.converged();
    }
    return s;
  }

 private:
  Matrix<T> a_, p_, q_;
  SolveMode mode_;
  index_t max_iter_ = 0;
  std::optional<LuFactorization<T>> lu_;
};

template <Scalar T>
struct SolveReport {
  Vector<T> x;
  double relative_residual = 0.0;                 // ||A x - b|| / ||b||
  std::optional<double> constraint_residual;      // ||C* x - f|| / max(1, ||f||)
  std::optional<double> orthogonality_defect;     // ||Q* x|| / (||Q|| ||x||)
  std::optional<double> cond_perturbed;           // SVD oracle
  index_t solver_iterations = 0;
  int retries = 0;
};

template <Scalar T>
struct NullspaceResult {
  Matrix<T> Z;
  std::vector<double> column_residuals;  // ||A z_i|| / (||A|| ||z_i||)
  double aggregate_residual = 0.0;       // ||A Z|| / ||Z||
  double aggregate_unrefined = 0.0;      // the same before refinement
  int refinement_passes = 0;
  bool independent = false;              // sigma_min(Z) / sigma_max(Z) > 1e-8
  std::optional<double> cond_perturbed;
  int retries = 0;
};

/// ||A Z||_2 / ||Z||_2.
template <Scalar T>
double aggregate_null_residual(const Matrix<T>& a, const Matrix<T>& z) {
  const double zn = spectral_norm(z);
  return zn == 0.0 ? 0.0 : spectral_norm(matmul(a, z)) / zn;
}

/// Null-vector candidates z_i = x_i - y_i, where (A + PQ*) y_i = A x_i, for
/// the columns x_i of X. Empty when any solve fails.
// GMRES runs that stall short of the requested tolerance are still usable
// below this residual; the caller judges the outcome from A z directly.
inline constexpr double kStagnationAccept = 1e-8;

template <Scalar T>
std::optional<Matrix<T>> null_vector_candidates(const PerturbedSystem<T>& sys, const Matrix<T>& x, double tol) {
  Matrix<T> z(x.rows(), x.cols());
  for (index_t j = 0; j < x.cols(); ++j) {
    const Vector<T> xj = x.column(j);
    const auto s = sys.solve(matvec(sys.A(), xj), tol);
    if (!s.ok && !(s.residual <= kStagnationAccept)) return std::nullopt;
    for (index_t i = 0; i < x.rows(); ++i) z(i, j) = xj[i] - s.y[i];
  }
  return z;
}

namespace detail {

template <Scalar T>
double norm_of(const Matrix<T>& a, RngStream stream) {
  const double est = spectral_norm_estimate(a, stream);
  return est > 0.0 ? est : 1.0;
}

template <Scalar T>
bool is_independent(const Matrix<T>& z) {
  const auto s = singular_values(z);
  return s.front() > 0.0 && s.back() / s.front() > 1e-8;
}

template <Scalar T>
NullspaceResult<T> summarize(const Matrix<T>& a, Matrix<T> z, double norm_a) {
  NullspaceResult<T> r;
  const Matrix<T> az = matmul(a, z);
  r.column_residuals.resize(static_cast<std::size_t>(z.cols()));
  for (index_t j = 0; j < z.cols(); ++j) {
    const double zn = norm2<T>(z.col(j));
    r.column_residuals[j] = zn == 0.0 ? std::numeric_limits<double>::infinity()
                                      : norm2<T>(az.col(j)) / (norm_a * zn);
  }
  const double zn = spectral_norm(z);
  r.aggregate_residual = zn == 0.0 ? std::numeric_limits<double>::infinity() : spectral_norm(az) / zn;
  r.aggregate_unrefined = r.aggregate_residual;
  r.independent = is_independent(z);
  r.Z = std::move(z);
  return r;
}

template <Scalar T>
double orthogonality(const Matrix<T>& q, const Vector<T>& x) {
  const double xn = norm2(x);
  const double qn = spectral_norm(q);
  if (xn == 0.0 || qn == 0.0) return 0.0;
  return norm2(adjoint_matvec(q, x)) / (qn * xn);
}

// Scales P so that ||sP|| ||Q|| equals the estimate of ||A||.
template <Scalar T>
Matrix<T> scaled_to(const Matrix<T>& p, const Matrix<T>& q, double norm_a) {
  const double s = norm_a / (spectral_norm(p) * spectral_norm(q));
  return T{s} * p;
}

}  // namespace detail

/// Solves a consistent system A x = b, A rank-k deficient, through a random
/// rank-k perturbation. The x returned is the solution orthogonal to the
/// random Q, so it varies with the stream. Bad draws (singular pivot, GMRES
/// stagnation, residual above tol) are redrawn from fresh sub-streams.
template <Scalar T>
SolveReport<T> solve_consistent(const Matrix<T>& a, const Vector<T>& b, index_t k, const SolveOptions& opts = {}) {
  require(a.is_square(), "solve_consistent needs a square matrix");
  require(static_cast<index_t>(b.size()) == a.rows(), "right-hand side length mismatch");
  require(k >= 0 && k <= a.rows(), "rank deficiency out of range");
  const index_t n = a.rows();
  const double bn = norm2(b);
  const double norm_a = detail::norm_of(a, opts.stream.child(0));

  std::optional<SolveReport<T>> best;
  bool any_solved = false;
  for (int attempt = 0; attempt <= opts.max_retries; ++attempt) {
    Matrix<T> p(n, 0), q(n, 0);
    if (k > 0) {
      auto pair = build_perturbation<T>(n, k, norm_a, opts.stream.child(100 + static_cast<std::uint64_t>(attempt)));
      p = std::move(pair.P);
      q = std::move(pair.Q);
    }
    try {
      PerturbedSystem<T> sys(a, p, q, opts.mode, opts.max_iter);
      auto s = sys.solve(b, opts.tol);
      if (!s.ok) continue;
      any_solved = true;
      SolveReport<T> rep;
      rep.relative_residual = bn == 0.0 ? 0.0 : norm2(matvec(a, s.y) - b) / bn;
      if (k > 0) rep.orthogonality_defect = detail::orthogonality(q, s.y);
      rep.solver_iterations = s.iterations;
      rep.retries = attempt;
      if (opts.compute_cond) rep.cond_perturbed = condition_number(sys.dense());
      rep.x = std::move(s.y);
      if (!best || rep.relative_residual < best->relative_residual) best = std::move(rep);
      if (best->relative_residual <= opts.tol) return std::move(*best);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::SingularPivot) throw;
    }
    if (k == 0) break;  // nothing to redraw
  }
  if (!any_solved) throw Error(ErrorKind::SingularDraw, "every perturbation draw was numerically singular");
  if (best->relative_residual > 10.0 * opts.tol)
    throw Error(ErrorKind::InconsistentOrWrongK,
                "residual stays above tolerance; b is not in range(A) or k is wrong", best->relative_residual);
  return std::move(*best);
}

/// Minimum-norm solution of a consistent system when bases are known:
/// V spans N(A*) and N spans N(A). Solves (A + s V N*) x = b with s chosen so
/// the correction carries the scale of A; then N* x = 0.
template <Scalar T>
SolveReport<T> solve_known_nullspace(const Matrix<T>& a, const Matrix<T>& v, const Matrix<T>& nb,
                                     const Vector<T>& b, const SolveOptions& opts = {}) {
  require(a.is_square(), "solve_known_nullspace needs a square matrix");
  require(v.rows() == a.rows() && nb.rows() == a.rows() && v.cols() == nb.cols(), "null bases must be n x k");
  require(static_cast<index_t>(b.size()) == a.rows(), "right-hand side length mismatch");
  const double norm_a = detail::norm_of(a, opts.stream.child(0));
  const double vn = spectral_norm(v);
  const double nn = spectral_norm(nb);
  if (vn == 0.0 || nn == 0.0) throw Error(ErrorKind::NotNullBasis, "null basis is zero");
  const double right = frobenius_norm(matmul(a, nb)) / frobenius_norm(nb);
  const double left = frobenius_norm(adjoint_matmul(a, v)) / frobenius_norm(v);
  if (right > 1e-8 * norm_a) throw Error(ErrorKind::NotNullBasis, "A N is not negligible", right / norm_a);
  if (left > 1e-8 * norm_a) throw Error(ErrorKind::NotNullBasis, "A* V is not negligible", left / norm_a);
  const double bn = norm2(b);
  const double inconsistency = norm2(adjoint_matvec(v, b));
  if (inconsistency > 1e-8 * vn * bn)
    throw Error(ErrorKind::InconsistentRhs, "right-hand side has a component in N(A*)", inconsistency / (vn * bn));

  PerturbedSystem<T> sys(a, detail::scaled_to(v, nb, norm_a), nb, opts.mode, opts.max_iter);
  auto s = sys.solve(b, opts.tol);
  if (!s.ok) throw Error(ErrorKind::Stagnation, "GMRES did not converge on A + V N*", s.residual);
  SolveReport<T> rep;
  rep.relative_residual = bn == 0.0 ? 0.0 : norm2(matvec(a, s.y) - b) / bn;
  rep.orthogonality_defect = detail::orthogonality(nb, s.y);
  rep.solver_iterations = s.iterations;
  if (opts.compute_cond) rep.cond_perturbed = condition_number(sys.dense());
  rep.x = std::move(s.y);
  return rep;
}

template <Scalar T>
struct ConstrainedOptions : SolveOptions {
  std::optional<Matrix<T>> V;  // basis of N(A*); a random n x k matrix is used when absent
};

/// Solves A x = b together with k constraints C* x = f that complete the rank,
/// via the square system (A + P C*) x = b + P f.
template <Scalar T>
SolveReport<T> solve_constrained(const Matrix<T>& a, const Matrix<T>& c, const Vector<T>& b, const Vector<T>& f,
                                 const ConstrainedOptions<T>& opts = {}) {
  require(a.is_square(), "solve_constrained needs a square matrix");
  require(c.rows() == a.rows() && c.cols() >= 1, "constraint matrix must be n x k");
  require(static_cast<index_t>(f.size()) == c.cols(), "constraint values must have length k");
  require(static_cast<index_t>(b.size()) == a.rows(), "right-hand side length mismatch");
  const index_t n = a.rows();
  const index_t k = c.cols();
  const double norm_a = detail::norm_of(a, opts.stream.child(0));
  const double bn = norm2(b);
  const double fn = norm2(f);

  std::optional<SolveReport<T>> best;
  const int attempts = opts.V ? 1 : opts.max_retries + 1;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    const Matrix<T> raw =
        opts.V ? *opts.V : gaussian_matrix<T>(n, k, opts.stream.child(100 + static_cast<std::uint64_t>(attempt)));
    require(raw.rows() == n && raw.cols() == k, "V must be n x k");
    const Matrix<T> p = detail::scaled_to(raw, c, norm_a);
    try {
      PerturbedSystem<T> sys(a, p, c, opts.mode, opts.max_iter);
      const Vector<T> rhs = b + matvec(p, f);
      auto s = sys.solve(rhs, opts.tol);
      if (!s.ok) continue;
      SolveReport<T> rep;
      rep.relative_residual = bn == 0.0 ? norm2(matvec(a, s.y)) : norm2(matvec(a, s.y) - b) / bn;
      rep.constraint_residual = norm2(adjoint_matvec(c, s.y) - f) / std::max(1.0, fn);
      rep.solver_iterations = s.iterations;
      rep.retries = attempt;
      if (opts.compute_cond) {
        rep.cond_perturbed = condition_number(sys.dense());
        // Numerically singular: the residuals say nothing about uniqueness.
        if (!(*rep.cond_perturbed * std::numeric_limits<double>::epsilon() < 1e-2)) continue;
      }
      rep.x = std::move(s.y);
      const bool met = rep.relative_residual <= opts.tol && *rep.constraint_residual <= 1e-8;
      const double score = rep.relative_residual + *rep.constraint_residual;
      if (!best || score < best->relative_residual + *best->constraint_residual) best = std::move(rep);
      if (met) return std::move(*best);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::SingularPivot) throw;
    }
  }
  if (!best) throw Error(ErrorKind::ConstraintDeficient, "A + P C* is singular for every draw");
  if (best->relative_residual > 10.0 * opts.tol || *best->constraint_residual > 1e-8)
    throw Error(ErrorKind::ConstraintDeficient, "constraints do not complete the rank of A",
                *best->constraint_residual);
  return std::move(*best);
}

/// Iterative refinement of approximate null vectors: z <- z - y with
/// (A + PQ*) y = A z. Stops when a pass improves ||AZ||/||Z|| by less than 2x,
/// after 5 passes, or when a pass makes things worse (that pass is undone).
template <Scalar T>
std::pair<Matrix<T>, int> refine_nullspace(const PerturbedSystem<T>& sys, Matrix<T> z, double solver_tol = 1e-13) {
  double current = aggregate_null_residual(sys.A(), z);
  int passes = 0;
  for (; passes < 5;) {
    ++passes;
    Matrix<T> next = z;
    bool ok = true;
    for (index_t j = 0; j < z.cols() && ok; ++j) {
      const auto s = sys.solve(matvec(sys.A(), std::span<const T>(z.col(j))), solver_tol);
      ok = s.ok;
      for (index_t i = 0; i < z.rows() && ok; ++i) next(i, j) -= s.y[i];
    }
    if (!ok) break;
    const double updated = aggregate_null_residual(sys.A(), next);
    if (!(updated < current)) break;
    const double factor = updated == 0.0 ? std::numeric_limits<double>::infinity() : current / updated;
    z = std::move(next);
    current = updated;
    if (factor < 2.0) break;
  }
  return {std::move(z), passes};
}

namespace detail {

template <Scalar T>
NullspaceResult<T> nullspace_with_system(const PerturbedSystem<T>& sys, index_t k, double norm_a, RngStream stream,
                                         const NullspaceOptions& opts, bool& solved) {
  const Matrix<T> x = gaussian_matrix<T>(sys.size(), k, stream);
  auto z = null_vector_candidates(sys, x, opts.solver_tol);
  solved = z.has_value();
  if (!solved) return {};
  NullspaceResult<T> r = summarize(sys.A(), std::move(*z), norm_a);
  if (opts.refine) {
    auto [zr, passes] = refine_nullspace(sys, r.Z, opts.solver_tol);
    const double unrefined = r.aggregate_unrefined;
    r = summarize(sys.A(), std::move(zr), norm_a);
    r.aggregate_unrefined = unrefined;
    r.refinement_passes = passes;
  }
  if (opts.compute_cond) r.cond_perturbed = condition_number(sys.dense());
  return r;
}

}  // namespace detail

/// Basis for the nullspace of a rank-k deficient A from k perturbed solves.
template <Scalar T>
NullspaceResult<T> compute_nullspace(const Matrix<T>& a, index_t k, const NullspaceOptions& opts = {}) {
  require(a.is_square(), "compute_nullspace needs a square matrix");
  require(k >= 1 && k <= a.rows(), "nullspace dimension out of range");
  const index_t n = a.rows();
  const double norm_a = detail::norm_of(a, opts.stream.child(0));

  std::optional<NullspaceResult<T>> best;
  for (int attempt = 0; attempt <= opts.max_retries; ++attempt) {
    const RngStream s = opts.stream.child(100 + static_cast<std::uint64_t>(attempt));
    auto pair = build_perturbation<T>(n, k, norm_a, s.child(1));
    try {
      PerturbedSystem<T> sys(a, std::move(pair.P), std::move(pair.Q), opts.mode, opts.max_iter);
      bool solved = false;
      auto r = detail::nullspace_with_system(sys, k, norm_a, s.child(2), opts, solved);
      if (!solved) continue;
      r.retries = attempt;
      const bool good = r.independent && r.aggregate_unrefined <= opts.tol * norm_a;
      if (!best || (r.independent && !best->independent) ||
          (r.independent == best->independent && r.aggregate_residual < best->aggregate_residual))
        best = std::move(r);
      if (good) return std::move(*best);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::SingularPivot) throw;
    }
  }
  if (!best) throw Error(ErrorKind::SingularDraw, "every perturbation draw was numerically singular");
  if (!best->independent)
    throw Error(ErrorKind::DependentNullVectors, "computed null vectors are linearly dependent");
  if (best->aggregate_unrefined > opts.tol * norm_a && best->aggregate_residual > opts.tol * norm_a)
    throw Error(ErrorKind::InconsistentOrWrongK, "null residual above target; k likely exceeds the deficiency",
                best->aggregate_residual / norm_a);
  return std::move(*best);
}

template <Scalar T>
struct StabilizedNullspace {
  Matrix<T> N;        // orthonormal basis of N(A)
  Matrix<T> V;        // orthonormal basis of N(A*)
  double scale = 1.0;  // P = scale * V, Q = N
  double right_residual = 0.0;  // ||A N||
  double left_residual = 0.0;   // ||A* V||
  std::optional<double> cond_perturbed;

  Matrix<T> P() const { return T{scale} * V; }
  const Matrix<T>& Q() const { return N; }
};

/// Two-stage nullspace computation. Random perturbations give approximate
/// bases of N(A) and N(A*); those bases, orthonormalized and scaled by ||A||,
/// then replace P and Q so the second stage works with a perturbation whose
/// range components are nearly zero.
template <Scalar T>
StabilizedNullspace<T> stabilized_nullspace(const Matrix<T>& a, index_t k, const NullspaceOptions& opts = {}) {
  require(a.is_square(), "stabilized_nullspace needs a square matrix");
  const double norm_a = detail::norm_of(a, opts.stream.child(0));
  const Matrix<T> ah = adjoint(a);

  NullspaceOptions inner = opts;
  inner.refine = true;
  inner.compute_cond = false;
  inner.stream = opts.stream.child(1);
  const auto right = compute_nullspace(a, k, inner);
  inner.stream = opts.stream.child(2);
  const auto left = compute_nullspace(ah, k, inner);
  const Matrix<T> n0 = qr_orthonormalize(right.Z);
  const Matrix<T> v0 = qr_orthonormalize(left.Z);

  // Second stage: recompute both bases with the stabilized perturbations.
  NullspaceOptions second = inner;
  bool solved = false;
  PerturbedSystem<T> sys_right(a, T{norm_a} * v0, n0, opts.mode, opts.max_iter);
  auto r2 = detail::nullspace_with_system(sys_right, k, norm_a, opts.stream.child(3), second, solved);
  if (!solved) throw Error(ErrorKind::SingularDraw, "stabilized system failed to solve");
  PerturbedSystem<T> sys_left(ah, T{norm_a} * n0, v0, opts.mode, opts.max_iter);
  auto l2 = detail::nullspace_with_system(sys_left, k, norm_a, opts.stream.child(4), second, solved);
  if (!solved) throw Error(ErrorKind::SingularDraw, "stabilized adjoint system failed to solve");

  StabilizedNullspace<T> out;
  out.N = qr_orthonormalize(r2.Z);
  out.V = qr_orthonormalize(l2.Z);
  out.scale = norm_a;
  out.right_residual = spectral_norm(matmul(a, out.N));
  out.left_residual = spectral_norm(adjoint_matmul(a, out.V));
  if (opts.compute_cond) out.cond_perturbed = condition_number(a + matmul_adjoint(out.P(), out.N));
  return out;
}

/// Solves a consistent system with the stabilized perturbation (scale V) N*.
template <Scalar T>
SolveReport<T> solve_stabilized(const Matrix<T>& a, const StabilizedNullspace<T>& stab, const Vector<T>& b,
                                const SolveOptions& opts = {}) {
  PerturbedSystem<T> sys(a, stab.P(), stab.N, opts.mode, opts.max_iter);
  auto s = sys.solve(b, opts.tol);
  if (!s.ok) throw Error(ErrorKind::Stagnation, "GMRES did not converge on the stabilized system", s.residual);
  SolveReport<T> rep;
  const double bn = norm2(b);
  rep.relative_residual = bn == 0.0 ? 0.0 : norm2(matvec(a, s.y) - b) / bn;
  rep.orthogonality_defect = detail::orthogonality(stab.N, s.y);
  rep.solver_iterations = s.iterations;
  if (opts.compute_cond) rep.cond_perturbed = stab.cond_perturbed ? *stab.cond_perturbed : condition_number(sys.dense());
  rep.x = std::move(s.y);
  return rep;
}

enum class TrialOutcome {
  Singular,  // A + P_k Q_k* numerically singular: k < k_A
  TooLarge,  // solve fine, some z_i not null: k > k_A
  Exact,     // solve fine, all z_i null: k = k_A
};

inline const char* to_string(TrialOutcome o) {
  switch (o) {
    case TrialOutcome::Singular: return "singular";
    case TrialOutcome::TooLarge: return "too-large";
    case TrialOutcome::Exact: return "exact";
  }
  return "?";
}

struct RankTrial {
  index_t k = 0;
  TrialOutcome outcome = TrialOutcome::Singular;
  double growth = 0.0;        // ||A|| ||M^-1 g|| / ||g|| for the random probe g
  double max_residual = 0.0;  // worst column residual of the null candidates
};

struct RankResult {
  index_t k_A = 0;
  int trials = 0;
  std::vector<RankTrial> log;
};

namespace detail {

template <Scalar T>
RankTrial classify_trial(const Matrix<T>& a, index_t k, double norm_a, RngStream stream, const RankOptions& opts) {
  const index_t n = a.rows();
  RankTrial t;
  t.k = k;
  Matrix<T> p(n, 0), q(n, 0);
  if (k > 0) {
    auto pair = build_perturbation<T>(n, k, norm_a, stream.child(1));
    p = std::move(pair.P);
    q = std::move(pair.Q);
  }
  std::optional<PerturbedSystem<T>> sys;
  try {
    sys.emplace(a, std::move(p), std::move(q), opts.mode, opts.max_iter);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::SingularPivot) throw;
    t.growth = std::numeric_limits<double>::infinity();
    return t;
  }

  // A right-hand side outside range(A) exposes singularity of the perturbed matrix.
  const Vector<T> g = gaussian_vector<T>(n, stream.child(2));
  const auto probe = sys->solve(g, opts.solver_tol);
  const bool usable = probe.ok || probe.residual <= kStagnationAccept;
  t.growth = usable ? norm_a * norm2(probe.y) / norm2(g) : std::numeric_limits<double>::infinity();
  if (!usable || !(t.growth <= opts.singular_growth)) return t;

  if (k == 0) {
    t.outcome = TrialOutcome::Exact;
    return t;
  }
  const Matrix<T> x = gaussian_matrix<T>(n, k, stream.child(3));
  auto z = null_vector_candidates(*sys, x, opts.solver_tol);
  if (!z) return t;
  const auto r = summarize(a, std::move(*z), norm_a);
  t.max_residual = *std::max_element(r.column_residuals.begin(), r.column_residuals.end());
  t.outcome = (t.max_residual <= opts.tol_null && r.independent) ? TrialOutcome::Exact : TrialOutcome::TooLarge;
  return t;
}

}  // namespace detail

/// Recovers the rank deficiency k_A <= k_max by bisection on the trial size k.
/// Each trial is classified Singular (k < k_A), TooLarge (k > k_A) or Exact.
/// At most ceil(log2(k_max + 1)) + 2 trials are spent; a search that ends
/// without an Exact classification raises Inconclusive with the trial log.
template <Scalar T>
RankResult detect_rank_deficiency(const Matrix<T>& a, index_t k_max, const RankOptions& opts = {}) {
  require(a.is_square(), "detect_rank_deficiency needs a square matrix");
  require(k_max >= 0 && k_max < a.rows(), "k_max out of range");
  const double norm_a = detail::norm_of(a, opts.stream.child(0));
  const int budget = static_cast<int>(std::ceil(std::log2(static_cast<double>(k_max) + 1.0))) + 2;

  RankResult res;
  std::uint64_t draw = 0;
  auto trial = [&](index_t k) {
    const RankTrial t = detail::classify_trial(a, k, norm_a, opts.stream.child(100 + draw++), opts);
    res.log.push_back(t);
    ++res.trials;
    return t.outcome;
  };

  index_t lo = 0, hi = k_max;
  while (lo <= hi && res.trials < budget) {
    const index_t mid = lo + (hi - lo) / 2;
    const TrialOutcome o = trial(mid);
    if (o == TrialOutcome::Exact) {
      res.k_A = mid;
      return res;
    }
    if (o == TrialOutcome::Singular) lo = mid + 1;
    else hi = mid - 1;
  }
  // The bracket closed without a confirmation: a draw was misclassified.
  // Re-test the boundary candidates with fresh streams while budget remains.
  for (index_t candidate : {lo, hi}) {
    if (candidate < 0 || candidate > k_max) continue;
    for (int r = 0; r < opts.max_retries && res.trials < budget; ++r) {
      const TrialOutcome o = trial(candidate);
      if (o == TrialOutcome::Exact) {
        res.k_A = candidate;
        return res;
      }
      if (o == TrialOutcome::Singular && candidate == lo) break;
    }
  }
  std::string trail;
  for (const auto& t : res.log) trail += " k=" + std::to_string(t.k) + ":" + to_string(t.outcome);
  throw Error(ErrorKind::Inconclusive, "rank trials conflict;" + trail, static_cast<double>(res.trials));
}

}  // namespace rkp
