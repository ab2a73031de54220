#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "rkp/rkp.hpp"

using namespace rkp;

namespace {

template <Scalar T>
Matrix<T> well_conditioned(index_t n, std::uint64_t seed) {
  Matrix<T> a = gaussian_matrix<T>(n, n, RngStream{seed, 0});
  for (index_t i = 0; i < n; ++i) a(i, i) += T{2.0 * std::sqrt(static_cast<double>(n))};
  return a;
}

double max_identity_defect(const Matrix<double>& u) { return orthonormality_defect(u); }

}  // namespace

TEST(Matrix, RejectsNonFiniteEntries) {
  EXPECT_THROW(Matrix<double>(1, 2, {1.0, std::nan("")}), Error);
  try {
    Matrix<double>(1, 1, {INFINITY});
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonFinite);
  }
  EXPECT_THROW(Matrix<double>(2, 2, {1.0, 2.0, 3.0}), Error);
}

TEST(Matrix, AdjointIsAnInvolution) {
  const auto a = gaussian_matrix<complex_t>(5, 3, RngStream{4, 1});
  EXPECT_EQ(adjoint(adjoint(a)), a);
  const auto r = gaussian_matrix<double>(4, 7, RngStream{4, 2});
  EXPECT_EQ(adjoint(adjoint(r)), r);
}

TEST(Matrix, ProductsAgreeWithExplicitAdjoint) {
  const auto a = gaussian_matrix<complex_t>(6, 4, RngStream{9, 1});
  const auto b = gaussian_matrix<complex_t>(6, 3, RngStream{9, 2});
  EXPECT_LT(max_abs(adjoint_matmul(a, b) - matmul(adjoint(a), b)), 1e-14);
  const auto c = gaussian_matrix<complex_t>(5, 4, RngStream{9, 3});
  EXPECT_LT(max_abs(matmul_adjoint(a, c) - matmul(a, adjoint(c))), 1e-14);
  const auto x = gaussian_vector<complex_t>(6, RngStream{9, 4});
  const auto lhs = adjoint_matvec(a, x);
  const auto rhs = matvec(adjoint(a), x);
  for (std::size_t i = 0; i < lhs.size(); ++i) EXPECT_LT(std::abs(lhs[i] - rhs[i]), 1e-14);
}

TEST(Lu, IdentityCase) {
  const auto r = lu_solve(Matrix<double>::identity(3), Vector<double>{1, 2, 3});
  EXPECT_EQ(r.x, (Vector<double>{1, 2, 3}));
  EXPECT_EQ(r.min_pivot, 1.0);
}

TEST(Lu, DiagonalCase) {
  const auto r = lu_solve(Matrix<double>{{2, 0}, {0, 4}}, Vector<double>{2, 4});
  EXPECT_DOUBLE_EQ(r.x[0], 1.0);
  EXPECT_DOUBLE_EQ(r.x[1], 1.0);
}

TEST(Lu, RecoversOnesVector) {
  const Matrix<double> a{{4, 1, 2}, {1, 5, 1}, {2, 1, 6}};
  const auto r = lu_solve(a, matvec(a, Vector<double>{1, 1, 1}));
  for (double v : r.x) EXPECT_NEAR(v, 1.0, 1e-12);
}

TEST(Lu, SingularPivotCarriesDiagnostic) {
  const Matrix<double> a{{1, 2}, {2, 4}};
  try {
    lu_solve(a, Vector<double>{1, 2});
    FAIL() << "expected SingularPivot";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SingularPivot);
    EXPECT_LE(e.diagnostic(), 2.0);
  }
}

TEST(Lu, RandomWellConditionedResidual) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const index_t n = 20 + 18 * static_cast<index_t>(s);
    const auto a = well_conditioned<double>(n, s);
    const auto b = gaussian_vector<double>(n, RngStream{s, 7});
    const auto r = lu_solve(a, b);
    EXPECT_LE(norm2(matvec(a, r.x) - b) / norm2(b), 1e-12) << "n=" << n;
  }
  const auto ac = well_conditioned<complex_t>(60, 3);
  const auto bc = gaussian_vector<complex_t>(60, RngStream{3, 7});
  EXPECT_LE(norm2(matvec(ac, lu_solve(ac, bc).x) - bc) / norm2(bc), 1e-12);
}

TEST(Qr, AlreadyOrthonormal) {
  const Matrix<double> x{{1, 0}, {0, 1}, {0, 0}};
  const auto u = qr_orthonormalize(x);
  EXPECT_LT(max_abs(u - x), 1e-15);
}

TEST(Qr, NearlyParallelColumnsNeedReorthogonalization) {
  const Matrix<double> x{{1, 1}, {0, 1e-8}};
  const auto u = qr_orthonormalize(x);
  EXPECT_LE(max_identity_defect(u), 1e-13);
}

TEST(Qr, GaussianAndIdempotent) {
  const auto u = qr_orthonormalize(gaussian_matrix<double>(100, 5, RngStream{1, 1}));
  EXPECT_LE(orthonormality_defect(u), 1e-13);
  EXPECT_LE(max_abs(qr_orthonormalize(u) - u), 1e-14);
  const auto uc = qr_orthonormalize(gaussian_matrix<complex_t>(80, 6, RngStream{1, 2}));
  EXPECT_LE(orthonormality_defect(uc), 1e-13);
}

TEST(Qr, SpanIsPreserved) {
  const auto x = gaussian_matrix<double>(30, 4, RngStream{2, 1});
  const auto u = qr_orthonormalize(x);
  // X - U U* X = 0 when span(U) = span(X).
  EXPECT_LT(max_abs(x - matmul(u, adjoint_matmul(u, x))), 1e-12);
}

TEST(Qr, DependentColumnsCollapse) {
  const Matrix<double> x{{1, 2}, {1, 2}, {0, 0}};
  try {
    qr_orthonormalize(x);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::RankCollapse);
  }
}

TEST(Qr, ComplementCompletesTheBasis) {
  const auto u = qr_orthonormalize(gaussian_matrix<double>(12, 5, RngStream{3, 1}));
  const auto c = orthonormal_complement(u, RngStream{3, 2});
  ASSERT_EQ(c.cols(), 7);
  EXPECT_LE(orthonormality_defect(hcat(u, c)), 1e-13);
}

TEST(Svd, Diagonal) {
  const auto f = svd(Matrix<double>{{3, 0}, {0, 1}});
  EXPECT_DOUBLE_EQ(f.sigma[0], 3.0);
  EXPECT_DOUBLE_EQ(f.sigma[1], 1.0);
  EXPECT_NEAR(std::abs(f.U(0, 0)), 1.0, 1e-15);
  EXPECT_NEAR(std::abs(f.V(1, 1)), 1.0, 1e-15);
}

TEST(Svd, RankOneOuterProduct) {
  Vector<double> u(6, 0.0), v(6, 0.0);
  u[0] = 2.0;
  v[1] = 1.0;
  v[2] = std::sqrt(8.0);
  Matrix<double> a(6, 6);
  for (index_t j = 0; j < 6; ++j)
    for (index_t i = 0; i < 6; ++i) a(i, j) = u[i] * v[j];
  const auto s = singular_values(a);
  EXPECT_NEAR(s[0], 6.0, 1e-14);
  for (std::size_t i = 1; i < s.size(); ++i) EXPECT_LT(s[i], 1e-14);
}

TEST(Svd, TestMatrixConditionStatistic) {
  const auto tm = build_test_matrix<double>(160, 1, 5);
  const auto s = singular_values(tm.A);
  EXPECT_NEAR(s[0] / s[158] / 159.0, 1.0, 1e-10);
}

TEST(Svd, RoundTripRealAndComplex) {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const index_t m = 3 + static_cast<index_t>(seed % 7) * 4;
    const index_t n = 3 + static_cast<index_t>((seed * 3) % 5) * 5;
    const auto a = gaussian_matrix<double>(m, n, RngStream{seed, 11});
    const auto f = svd(a);
    const double na = f.sigma.front();
    EXPECT_LE(spectral_norm(f.reconstruct() - a), 1e-12 * na);
    EXPECT_LE(orthonormality_defect(f.U), 1e-12);
    EXPECT_LE(orthonormality_defect(f.V), 1e-12);
    EXPECT_TRUE(std::is_sorted(f.sigma.rbegin(), f.sigma.rend()));

    const auto c = gaussian_matrix<complex_t>(n, m, RngStream{seed, 12});
    const auto g = svd(c);
    EXPECT_LE(spectral_norm(g.reconstruct() - c), 1e-12 * g.sigma.front());
    EXPECT_LE(orthonormality_defect(g.U), 1e-12);
    EXPECT_LE(orthonormality_defect(g.V), 1e-12);
  }
}

TEST(Svd, RankDeficientFactorsStayOrthonormal) {
  const auto tm = build_test_matrix<double>(12, 4, 3);
  const auto f = svd(tm.A);
  EXPECT_LE(orthonormality_defect(f.U), 1e-12);
  EXPECT_LE(spectral_norm(f.reconstruct() - tm.A), 1e-12);
}

TEST(Svd, MatchesCharacteristicPolynomialOracle) {
  for (int n = 1; n <= 3; ++n) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto a = gaussian_matrix<double>(n, n, RngStream{seed, 100 + static_cast<std::uint64_t>(n)});
      std::vector<double> rowmajor;
      for (index_t i = 0; i < n; ++i)
        for (index_t j = 0; j < n; ++j) rowmajor.push_back(a(i, j));
      const auto ref = oracle::small_singular_values(rowmajor, n);
      const auto s = singular_values(a);
      for (int i = 0; i < n; ++i) EXPECT_NEAR(s[i], ref[i], 1e-10 * ref[0]) << "n=" << n << " seed=" << seed;
    }
  }
}

TEST(Svd, ConditionNumberAndPseudoinverse) {
  EXPECT_DOUBLE_EQ(condition_number(Matrix<double>{{4, 0}, {0, 2}}), 2.0);
  EXPECT_TRUE(std::isinf(condition_number(Matrix<double>{{1, 0}, {0, 0}})));
  const auto x = pseudoinverse_solve(Matrix<double>{{1, 0}, {0, 0}}, Vector<double>{2, 5});
  EXPECT_DOUBLE_EQ(x[0], 2.0);
  EXPECT_DOUBLE_EQ(x[1], 0.0);
}

TEST(Svd, SpectralNormOfTallAndWide) {
  const auto a = gaussian_matrix<double>(40, 3, RngStream{6, 1});
  EXPECT_NEAR(spectral_norm(a), singular_values(a).front(), 1e-12 * singular_values(a).front());
  const auto w = adjoint(a);
  EXPECT_NEAR(spectral_norm(w), singular_values(a).front(), 1e-12 * singular_values(a).front());
}

TEST(Svd, RejectsNonFinite) {
  Matrix<double> a(2, 2);
  a.data()[0] = std::nan("");
  EXPECT_THROW(svd(a), Error);
}

TEST(Gmres, IdentityConvergesInOneStep) {
  const Vector<double> b{1, -2, 3, 4};
  const auto r = gmres<double>([](const Vector<double>& v) { return v; }, b, 1e-12, 10);
  EXPECT_TRUE(r.converged());
  EXPECT_EQ(r.iterations, 1);
  for (std::size_t i = 0; i < b.size(); ++i) EXPECT_NEAR(r.x[i], b[i], 1e-15);
}

TEST(Gmres, DiagonalSystem) {
  auto apply = [](const Vector<double>& v) {
    Vector<double> y(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) y[i] = static_cast<double>(i + 1) * v[i];
    return y;
  };
  const auto r = gmres<double>(apply, Vector<double>(10, 1.0), 1e-13, 10);
  EXPECT_TRUE(r.converged());
  EXPECT_LE(r.iterations, 10);
  EXPECT_LE(r.achieved_residual, 1e-12);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_NEAR(r.x[i], 1.0 / static_cast<double>(i + 1), 1e-12);
}

TEST(Gmres, RightHandSideOutsideRangeStagnates) {
  auto apply = [](const Vector<double>& v) { return Vector<double>{v[0], 0.0}; };
  const auto r = gmres<double>(apply, Vector<double>{0.0, 1.0}, 1e-10, 5);
  EXPECT_EQ(r.status, GmresStatus::Stagnated);
  EXPECT_NEAR(r.achieved_residual, 1.0, 1e-12);
}

TEST(Gmres, AgreesWithLu) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto a = well_conditioned<complex_t>(50, seed);
    const auto b = gaussian_vector<complex_t>(50, RngStream{seed, 3});
    const double tol = 1e-12;
    const auto r = gmres<complex_t>([&](const Vector<complex_t>& v) { return matvec(a, v); }, b, tol, 50);
    ASSERT_TRUE(r.converged());
    const auto x = lu_solve(a, b).x;
    EXPECT_LE(norm2(r.x - x) / norm2(x), 10 * tol);
    EXPECT_LE(norm2(matvec(a, r.x) - b) / norm2(b), tol);
  }
}

TEST(NormEstimate, DiagonalZeroAndTestMatrix) {
  const auto d = Matrix<double>{{5, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  const double e = spectral_norm_estimate(d, RngStream{1, 1});
  EXPECT_GE(e, 2.5);
  EXPECT_LE(e, 5.0001);
  EXPECT_EQ(spectral_norm_estimate(Matrix<double>(4, 4), RngStream{1, 1}), 0.0);
  const auto tm = build_test_matrix<double>(160, 3, 2);
  EXPECT_NEAR(spectral_norm_estimate(tm.A, RngStream{2, 9}), 1.0, 1e-6);
}

TEST(NormEstimate, NeverExceedsTheNorm) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto a = gaussian_matrix<double>(30, 30, RngStream{seed, 5});
    const double s = singular_values(a).front();
    const double e = spectral_norm_estimate(a, RngStream{seed, 6});
    EXPECT_LE(e, s * (1 + 1e-12));
    EXPECT_GE(e, 0.5 * s);
  }
}

TEST(MatrixMarket, RoundTripIsExact) {
  const auto a = gaussian_matrix<double>(7, 3, RngStream{8, 1});
  std::stringstream ss;
  write_matrix_market(ss, a);
  EXPECT_EQ(ss.str().rfind("%%MatrixMarket matrix array real general\n", 0), 0u);
  EXPECT_EQ(read_matrix_market<double>(ss), a);

  const auto c = gaussian_matrix<complex_t>(4, 4, RngStream{8, 2});
  std::stringstream sc;
  write_matrix_market(sc, c);
  EXPECT_EQ(read_matrix_market<complex_t>(sc), c);
}

TEST(MatrixMarket, CoordinateSymmetric) {
  std::stringstream ss(
      "%%MatrixMarket matrix coordinate real symmetric\n% comment\n3 3 3\n1 1 2.0\n2 1 -1\n3 3 4e0\n");
  const auto a = read_matrix_market<double>(ss);
  EXPECT_EQ(a, (Matrix<double>{{2, -1, 0}, {-1, 0, 0}, {0, 0, 4}}));
}

TEST(MatrixMarket, CoordinateHermitianComplex) {
  std::stringstream ss("%%MatrixMarket matrix coordinate complex hermitian\n2 2 2\n1 1 1 0\n2 1 0 1\n");
  const auto a = read_matrix_market<complex_t>(ss);
  EXPECT_EQ(a(1, 0), complex_t(0, 1));
  EXPECT_EQ(a(0, 1), complex_t(0, -1));
}

TEST(MatrixMarket, RealFileIntoComplexMatrix) {
  std::stringstream ss("%%MatrixMarket matrix array integer general\n2 1\n3\n-4\n");
  const auto a = read_matrix_market<complex_t>(ss);
  EXPECT_EQ(a(1, 0), complex_t(-4, 0));
}

TEST(MatrixMarket, MalformedInputIsAParseError) {
  for (const char* text : {"", "%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n",
                           "%%MatrixMarket tensor array real general\n1 1\n1\n",
                           "%%MatrixMarket matrix array real general\n1 1\nabc\n",
                           "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n"}) {
    std::stringstream ss(text);
    try {
      read_matrix_market<double>(ss);
      ADD_FAILURE() << "accepted: " << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::Parse) << text;
    }
  }
}

TEST(MatrixMarket, ComplexFileIntoRealMatrixIsRejected) {
  std::stringstream ss("%%MatrixMarket matrix array complex general\n1 1\n1 2\n");
  EXPECT_THROW(read_matrix_market<double>(ss), Error);
}
