#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "rkp/rkp.hpp"

using namespace rkp;
using namespace rkp::neumann;

namespace {

constexpr double kPi = std::numbers::pi;

double left_null_ratio(const NeumannSystem& s) {
  Matrix<double> ik = s.K;
  for (index_t i = 0; i < ik.rows(); ++i) ik(i, i) += 1.0;
  Vector<double> wt(s.weights.size(), 0.0);
  for (index_t j = 0; j < ik.cols(); ++j)
    for (index_t i = 0; i < ik.rows(); ++i) wt[j] += s.weights[i] * ik(i, j);
  return norm2(wt) / (norm2(s.weights) * spectral_norm(ik));
}

double potential_error_stddev(const CurveKind& kind, index_t n, int m) {
  const auto c = discretize_curve(kind, n);
  const auto h = harmonic_test_case(c, m);
  const auto sol = solve_neumann(build_neumann_system(c, true), h.f);
  const auto pts = interior_probe_points(kind);
  const auto u = evaluate_single_layer(c, sol.sigma, pts);
  double mean = 0.0;
  std::vector<double> e;
  for (std::size_t i = 0; i < pts.size(); ++i) e.push_back(u[i] - h.u(pts[i]));
  for (double v : e) mean += v / static_cast<double>(e.size());
  double var = 0.0;
  for (double v : e) var += (v - mean) * (v - mean) / static_cast<double>(e.size());
  return std::sqrt(var);
}

}  // namespace

TEST(Curve, UnitCircle) {
  const auto c = discretize_curve(Ellipse{1, 1}, 64);
  for (index_t j = 0; j < 64; ++j) {
    EXPECT_NEAR(c.curvatures[j], 1.0, 1e-14);
    EXPECT_NEAR(c.weights[j], 2 * kPi / 64, 1e-15);
    EXPECT_NEAR(c.normals[j][0], c.nodes[j][0], 1e-15);
    EXPECT_NEAR(c.normals[j][1], c.nodes[j][1], 1e-15);
  }
}

TEST(Curve, EllipsePerimeterMatchesSeries) {
  const double ref = oracle::ellipse_perimeter(2, 1);
  EXPECT_NEAR(ref, 9.688448220547675, 1e-12);
  for (index_t n : {64, 128, 256}) EXPECT_NEAR(discretize_curve(Ellipse{2, 1}, n).length(), ref, 1e-10);
}

TEST(Curve, NormalsAreUnit) {
  for (const CurveKind& k : {CurveKind{Ellipse{3, 0.5}}, CurveKind{Star{1.0, 0.3, 5}}}) {
    const auto c = discretize_curve(k, 128);
    for (const auto& nv : c.normals) EXPECT_NEAR(std::hypot(nv[0], nv[1]), 1.0, 1e-14);
  }
}

TEST(Curve, InvalidInputs) {
  EXPECT_THROW(discretize_curve(Ellipse{1, 1}, 15), Error);
  EXPECT_THROW(discretize_curve(Ellipse{1, 1}, 8), Error);
  for (const CurveKind& k : {CurveKind{Ellipse{-1, 1}}, CurveKind{Star{1.0, 1.2, 5}}}) {
    try {
      discretize_curve(k, 64);
      ADD_FAILURE();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::InvalidCurve);
    }
  }
}

TEST(System, UnitCircleKernelIsConstant) {
  // Inward-normal convention: K_ij = -1/N for every pair, diagonal included.
  const auto s = build_neumann_system(discretize_curve(Ellipse{1, 1}, 32), false);
  for (index_t j = 0; j < 32; ++j)
    for (index_t i = 0; i < 32; ++i) EXPECT_NEAR(s.K(i, j), -1.0 / 32.0, 1e-15);
  // (I + K) annihilates constants and is the identity on their complement.
  const auto sv = singular_values(s.matrix);
  EXPECT_LT(sv.back(), 1e-14);
  for (std::size_t i = 0; i + 1 < sv.size(); ++i) EXPECT_NEAR(sv[i], 1.0, 1e-13);
}

TEST(System, AdjointNullInvariant) {
  for (const CurveKind& k : {CurveKind{Ellipse{2, 1}}, CurveKind{Ellipse{1, 1}}, CurveKind{Star{1.0, 0.2, 3}}}) {
    for (index_t n : {64, 128, 256}) {
      const auto s = build_neumann_system(discretize_curve(k, n), false);
      EXPECT_LE(left_null_ratio(s), 1e-9) << "n=" << n;
    }
  }
  EXPECT_LE(left_null_ratio(build_neumann_system(discretize_curve(Ellipse{2, 1}, 256), false)), 1e-10);
}

TEST(System, RegularizationRemovesTheSingularValue) {
  const auto c = discretize_curve(Ellipse{2, 1}, 128);
  const auto plain = singular_values(build_neumann_system(c, false).matrix);
  int tiny = 0;
  for (double v : plain) tiny += v < 1e-9;
  EXPECT_EQ(tiny, 1);
  EXPECT_GE(singular_values(build_neumann_system(c, true).matrix).back(), 1e-3);

  std::vector<double> r = gaussian_vector<double>(128, RngStream{3, 0});
  for (double& v : r) v = 1.0 + 0.25 * v;
  const auto reg = build_neumann_system(c, true, r);
  EXPECT_GE(singular_values(reg.matrix).back(), 1e-3);
  const auto h = harmonic_test_case(c, 2);
  EXPECT_LE(std::abs(solve_neumann(reg, h.f).density_integral), 1e-10);
}

TEST(Solve, ZeroDataGivesZeroDensity) {
  const auto c = discretize_curve(Ellipse{2, 1}, 64);
  const auto sol = solve_neumann(build_neumann_system(c, true), Vector<double>(64, 0.0));
  for (double v : sol.sigma) EXPECT_EQ(v, 0.0);
}

TEST(Solve, RequiresRegularization) {
  const auto c = discretize_curve(Ellipse{2, 1}, 64);
  EXPECT_THROW(solve_neumann(build_neumann_system(c, false), Vector<double>(64, 0.0)), Error);
}

TEST(Solve, UnitCircleHarmonicData) {
  const auto c = discretize_curve(Ellipse{1, 1}, 64);
  const auto h = harmonic_test_case(c, 2);
  for (index_t j = 0; j < 64; ++j) {
    const double theta = 2 * kPi * static_cast<double>(j) / 64;
    EXPECT_NEAR(h.f[j], 2 * std::cos(2 * theta), 1e-13);
  }
  const auto sol = solve_neumann(build_neumann_system(c, true), h.f);
  EXPECT_LE(std::abs(sol.density_integral), 1e-12);
}

TEST(Solve, IncompatibleDataIsFlagged) {
  const auto c = discretize_curve(Ellipse{2, 1}, 128);
  const auto sol = solve_neumann(build_neumann_system(c, true), Vector<double>(128, 1.0));
  EXPECT_NEAR(sol.compat_defect, oracle::ellipse_perimeter(2, 1), 1e-9);
}

TEST(Harmonic, CompatibleByConstruction) {
  const auto circle = discretize_curve(Ellipse{1, 1}, 64);
  auto h = harmonic_test_case(circle, 1);
  double s = 0.0;
  for (index_t j = 0; j < 64; ++j) {
    EXPECT_NEAR(h.f[j], std::cos(2 * kPi * static_cast<double>(j) / 64), 1e-14);
    s += circle.weights[j] * h.f[j];
  }
  EXPECT_LE(std::abs(s), 1e-12);
  EXPECT_DOUBLE_EQ(h.u({0.3, 0.4}), 0.3);

  const auto e = discretize_curve(Ellipse{2, 1}, 256);
  h = harmonic_test_case(e, 2);
  s = 0.0;
  for (index_t j = 0; j < 256; ++j) s += e.weights[j] * h.f[j];
  EXPECT_LE(std::abs(s), 1e-10);
}

TEST(SingleLayer, TrivialCases) {
  const auto c = discretize_curve(Ellipse{1, 1}, 64);
  EXPECT_EQ(evaluate_single_layer(c, Vector<double>(64, 0.0), {{0.1, 0.2}})[0], 0.0);
  EXPECT_NEAR(evaluate_single_layer(c, Vector<double>(64, 1.0), {{0.0, 0.0}})[0], 0.0, 1e-15);
}

TEST(SingleLayer, GuardDistance) {
  const auto c = discretize_curve(Ellipse{1, 1}, 64);
  try {
    evaluate_single_layer(c, Vector<double>(64, 1.0), {{0.99, 0.0}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::PointTooClose);
  }
  EXPECT_NO_THROW(evaluate_single_layer(c, Vector<double>(64, 1.0), {{0.85, 0.0}}));
}

TEST(Pipeline, ManufacturedSolutionConverges) {
  const CurveKind e = Ellipse{2, 1};
  const double e64 = potential_error_stddev(e, 64, 2);
  const double e128 = potential_error_stddev(e, 128, 2);
  const double e256 = potential_error_stddev(e, 256, 2);
  EXPECT_LE(e256, 1e-8);
  EXPECT_GE(e64 / std::max(e128, 1e-300), 10.0) << e64 << " " << e128;
  EXPECT_LE(potential_error_stddev(Star{1.0, 0.2, 3}, 256, 3), 1e-8);
}

TEST(Pipeline, RandomPerturbationSolveMatchesRegularizedSolve) {
  // The unregularized system has a one-dimensional nullspace; the generic
  // consistent-system solver must give the same potential up to a constant.
  const CurveKind kind = Ellipse{2, 1};
  const auto c = discretize_curve(kind, 128);
  const auto h = harmonic_test_case(c, 2);
  const auto reg = solve_neumann(build_neumann_system(c, true), h.f);
  Vector<double> rhs(h.f.size());
  for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = -2.0 * h.f[i];
  SolveOptions opts;
  opts.tol = 1e-12;
  const auto rk = solve_consistent(build_neumann_system(c, false).matrix, rhs, 1, opts);

  const auto pts = interior_probe_points(kind);
  const auto u1 = evaluate_single_layer(c, reg.sigma, pts);
  const auto u2 = evaluate_single_layer(c, rk.x, pts);
  const double shift = u1[0] - u2[0];
  for (std::size_t i = 0; i < pts.size(); ++i) EXPECT_NEAR(u1[i] - u2[i], shift, 1e-8);
}
