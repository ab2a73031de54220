#include <gtest/gtest.h>

#include <cmath>

#include "rkp/rkp.hpp"

using namespace rkp;

TEST(TestGen, ConditionStatisticIsAnalytic) {
  // Every Table 1 / Table 2 configuration with n <= 640.
  for (const auto& [n, k] : published_rows(640)) {
    const auto tm = build_test_matrix<double>(n, k, 1);
    EXPECT_NEAR(tm.cond_statistic() / static_cast<double>(n - k), 1.0, 1e-10) << n << "," << k;
  }
  EXPECT_DOUBLE_EQ(build_test_matrix<double>(160, 1, 9).cond_statistic(), 159.0);
}

TEST(TestGen, SmallSpectrum) {
  const auto tm = build_test_matrix<double>(4, 2, 3);
  const auto s = singular_values(tm.A);
  EXPECT_NEAR(s[0], 1.0, 1e-14);
  EXPECT_NEAR(s[1], 0.5, 1e-14);
  EXPECT_LT(s[2], 1e-14);
  EXPECT_LT(s[3], 1e-14);
}

TEST(TestGen, RankAndReconstruction) {
  for (auto [n, k] : {std::pair<index_t, index_t>{30, 1}, {60, 7}, {90, 45}}) {
    const auto tm = build_test_matrix<double>(n, k, 5);
    const auto s = singular_values(tm.A);
    for (index_t i = 0; i < n - k; ++i) EXPECT_NEAR(s[i] * static_cast<double>(i + 1), 1.0, 1e-12);
    for (index_t i = n - k; i < n; ++i) EXPECT_LT(s[i], 1e-12);
    EXPECT_LE(orthonormality_defect(tm.left_basis), 1e-13);
    EXPECT_LE(orthonormality_defect(tm.right_basis), 1e-13);

    // A = sum u_i sigma_i v_i*, summed term by term.
    Matrix<double> sum(n, n);
    for (index_t i = 0; i < n - k; ++i)
      for (index_t c = 0; c < n; ++c)
        for (index_t r = 0; r < n; ++r) sum(r, c) += tm.left_basis(r, i) * tm.sigma[i] * tm.right_basis(c, i);
    EXPECT_LE(max_abs(sum - tm.A), 1e-13 * static_cast<double>(n));
  }
}

TEST(TestGen, NullBasesAreExactComplements) {
  const auto tm = build_test_matrix<double>(4, 2, 7);
  const auto nb = ground_truth_null_bases(tm);
  EXPECT_LE(max_abs(matmul(tm.A, nb.N)), 1e-12);
  EXPECT_LE(max_abs(adjoint_matmul(tm.A, nb.V)), 1e-12);
  EXPECT_LE(orthonormality_defect(nb.N), 1e-13);
  EXPECT_LE(orthonormality_defect(hcat(tm.right_basis, nb.N)), 1e-12);
  EXPECT_LE(orthonormality_defect(hcat(tm.left_basis, nb.V)), 1e-12);
}

TEST(TestGen, StabilizedPerturbationRestoresTheStatistic) {
  const auto tm = build_test_matrix<double>(160, 3, 4);
  const auto nb = ground_truth_null_bases(tm);
  const double na = spectral_norm(tm.A);
  const double c = condition_number(tm.A + na * matmul_adjoint(nb.V, nb.N));
  EXPECT_NEAR(c / 157.0, 1.0, 0.01);
}

TEST(TestGen, ComplexVariant) {
  const auto tm = build_test_matrix<complex_t>(20, 3, 2);
  const auto s = singular_values(tm.A);
  EXPECT_NEAR(s[0] / s[16], 17.0, 1e-10);
  EXPECT_LT(s[17], 1e-13);
  const auto nb = ground_truth_null_bases(tm);
  EXPECT_LE(max_abs(matmul(tm.A, nb.N)), 1e-12);
}

TEST(TestGen, DeterministicAndValidated) {
  EXPECT_EQ(build_test_matrix<double>(12, 2, 3).A, build_test_matrix<double>(12, 2, 3).A);
  EXPECT_NE(build_test_matrix<double>(12, 2, 3).A, build_test_matrix<double>(12, 2, 4).A);
  EXPECT_THROW(build_test_matrix<double>(5, 0, 1), Error);
  EXPECT_THROW(build_test_matrix<double>(5, 5, 1), Error);
}
