#pragma once

// Interior Laplace Neumann problem on a smooth closed curve via a single
// layer potential, discretized by the periodic trapezoid (Nystrom) rule.
//
// Sign convention: the operator K below is built with the normal derivative
// taken along the inward normal, which is the form in which (I + K) has the
// constant as a left null vector for the interior problem. With outward flux
// f = du/dn, the density solves (I + K) sigma = -2 f. The rank-1 deficiency
// is removed by adding r(x) <1, sigma>, with r = 1 by default.

#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <variant>

#include "rkp/lu.hpp"
#include "rkp/matrix.hpp"

namespace rkp::neumann {

using Point = std::array<double, 2>;

struct Ellipse {
  double a = 1.0;
  double b = 1.0;
};

/// r(t) = r0 + amp cos(freq t) in polar form.
struct Star {
  double r0 = 1.0;
  double amp = 0.3;
  int freq = 5;
};

using CurveKind = std::variant<Ellipse, Star>;

struct CurveQuadrature {
  std::vector<Point> nodes;
  std::vector<Point> normals;  // outward, unit length
  std::vector<double> weights;  // |x'(t_j)| 2 pi / N
  std::vector<double> curvatures;
  index_t N = 0;

  double length() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
  }
};

namespace detail {

struct CurveDerivatives {
  Point x, dx, ddx;
};

inline CurveDerivatives evaluate(const Ellipse& e, double t) {
  const double c = std::cos(t), s = std::sin(t);
  return {{e.a * c, e.b * s}, {-e.a * s, e.b * c}, {-e.a * c, -e.b * s}};
}

inline CurveDerivatives evaluate(const Star& st, double t) {
  const double c = std::cos(t), s = std::sin(t);
  const double r = st.r0 + st.amp * std::cos(st.freq * t);
  const double dr = -st.amp * st.freq * std::sin(st.freq * t);
  const double ddr = -st.amp * st.freq * st.freq * std::cos(st.freq * t);
  return {{r * c, r * s},
          {dr * c - r * s, dr * s + r * c},
          {ddr * c - 2.0 * dr * s - r * c, ddr * s + 2.0 * dr * c - r * s}};
}

inline double dist(const Point& p, const Point& q) { return std::hypot(p[0] - q[0], p[1] - q[1]); }

}  // namespace detail

/// Samples a counterclockwise parametrized curve at t_j = 2 pi j / N.
inline CurveQuadrature discretize_curve(const CurveKind& kind, index_t n) {
  require(n >= 16 && n % 2 == 0, "node count must be even and at least 16");
  if (const auto* e = std::get_if<Ellipse>(&kind)) {
    if (!(e->a > 0.0 && e->b > 0.0)) throw Error(ErrorKind::InvalidCurve, "ellipse semi-axes must be positive");
  } else {
    const auto& s = std::get<Star>(kind);
    if (!(s.r0 > 0.0) || !(std::abs(s.amp) < s.r0) || s.freq < 1)
      throw Error(ErrorKind::InvalidCurve, "star curve needs r0 > |amp| and freq >= 1");
  }

  CurveQuadrature q;
  q.N = n;
  const double h = 2.0 * std::numbers::pi / static_cast<double>(n);
  for (index_t j = 0; j < n; ++j) {
    const double t = h * static_cast<double>(j);
    const auto d = std::visit([t](const auto& c) { return detail::evaluate(c, t); }, kind);
    const double speed = std::hypot(d.dx[0], d.dx[1]);
    q.nodes.push_back(d.x);
    q.normals.push_back({d.dx[1] / speed, -d.dx[0] / speed});
    q.weights.push_back(speed * h);
    q.curvatures.push_back((d.dx[0] * d.ddx[1] - d.dx[1] * d.ddx[0]) / (speed * speed * speed));
  }

  // Non-neighbouring nodes closer than a quarter panel mean the curve folds onto itself.
  for (index_t i = 0; i < n; ++i) {
    for (index_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;
      const double floor = 0.25 * std::min(q.weights[i], q.weights[j]);
      if (detail::dist(q.nodes[i], q.nodes[j]) < floor)
        throw Error(ErrorKind::InvalidCurve, "curve self-intersects or nearly touches itself");
    }
  }
  return q;
}

struct NeumannSystem {
  Matrix<double> K;       // inward-normal double-layer-adjoint operator with quadrature weights
  Matrix<double> matrix;  // I + K, plus r w^T when regularized
  std::vector<double> weights;
  bool regularized = false;
};

/// K_ij = -(1/pi) n_i.(x_i - x_j) / |x_i - x_j|^2 w_j, with diagonal limit
/// -(kappa_i / (2 pi)) w_i. Regularization adds r_i w_j (default r = 1).
inline NeumannSystem build_neumann_system(const CurveQuadrature& c, bool regularize,
                                          std::optional<std::vector<double>> r = std::nullopt) {
  const index_t n = c.N;
  NeumannSystem s;
  s.K = Matrix<double>(n, n);
  s.weights = c.weights;
  s.regularized = regularize;
  for (index_t j = 0; j < n; ++j) {
    for (index_t i = 0; i < n; ++i) {
      double kernel;
      if (i == j) {
        kernel = 0.5 * c.curvatures[i];
      } else {
        const double dx = c.nodes[i][0] - c.nodes[j][0];
        const double dy = c.nodes[i][1] - c.nodes[j][1];
        kernel = (c.normals[i][0] * dx + c.normals[i][1] * dy) / (dx * dx + dy * dy);
      }
      s.K(i, j) = -kernel / std::numbers::pi * c.weights[j];
    }
  }
  s.matrix = s.K;
  for (index_t i = 0; i < n; ++i) s.matrix(i, i) += 1.0;
  if (regularize) {
    const std::vector<double> rr = r ? *r : std::vector<double>(static_cast<std::size_t>(n), 1.0);
    require(static_cast<index_t>(rr.size()) == n, "regularizer must have one value per node");
    for (index_t j = 0; j < n; ++j)
      for (index_t i = 0; i < n; ++i) s.matrix(i, j) += rr[i] * c.weights[j];
  }
  return s;
}

struct NeumannSolution {
  Vector<double> sigma;
  double compat_defect = 0.0;     // |sum_j w_j f_j|, zero for compatible data
  double density_integral = 0.0;  // <1, sigma> = sum_j w_j sigma_j
};

/// Solves the regularized system for outward flux data f.
inline NeumannSolution solve_neumann(const NeumannSystem& sys, const Vector<double>& f) {
  require(sys.regularized, "solve_neumann needs a regularized system");
  require(f.size() == sys.weights.size(), "flux data must have one value per node");
  NeumannSolution out;
  Vector<double> rhs(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    rhs[i] = -2.0 * f[i];
    out.compat_defect += sys.weights[i] * f[i];
  }
  out.compat_defect = std::abs(out.compat_defect);
  out.sigma = lu_solve(sys.matrix, rhs).x;
  for (std::size_t i = 0; i < f.size(); ++i) out.density_integral += sys.weights[i] * out.sigma[i];
  return out;
}

/// u(p) = (1/2 pi) sum_i log|p - x_i| sigma_i w_i. Points must stay at least
/// one panel length (the largest quadrature weight) away from every node.
inline Vector<double> evaluate_single_layer(const CurveQuadrature& c, const Vector<double>& sigma,
                                            const std::vector<Point>& points) {
  require(static_cast<index_t>(sigma.size()) == c.N, "density must have one value per node");
  const double guard = *std::max_element(c.weights.begin(), c.weights.end());
  Vector<double> u;
  u.reserve(points.size());
  for (const Point& p : points) {
    double s = 0.0;
    for (index_t i = 0; i < c.N; ++i) {
      const double d = detail::dist(p, c.nodes[i]);
      if (d <= guard) throw Error(ErrorKind::PointTooClose, "evaluation point within one panel of the boundary", d);
      s += std::log(d) * sigma[i] * c.weights[i];
    }
    u.push_back(s / (2.0 * std::numbers::pi));
  }
  return u;
}

/// Five fixed points well inside the curve, used to compare potentials.
inline std::vector<Point> interior_probe_points(const CurveKind& kind) {
  static constexpr std::array<Point, 5> unit = {{{0.0, 0.0}, {0.3, 0.15}, {-0.5, 0.3}, {0.2, -0.5}, {0.5, 0.0}}};
  double sx = 1.0, sy = 1.0;
  if (const auto* e = std::get_if<Ellipse>(&kind)) {
    sx = e->a;
    sy = e->b;
  } else {
    const auto& s = std::get<Star>(kind);
    sx = sy = s.r0 - std::abs(s.amp);
  }
  std::vector<Point> pts;
  for (const Point& p : unit) pts.push_back({p[0] * sx, p[1] * sy});
  return pts;
}

struct HarmonicCase {
  Vector<double> f;                       // outward normal derivative at the nodes
  std::function<double(const Point&)> u;  // Re((x1 + i x2)^m)
};

inline HarmonicCase harmonic_test_case(const CurveQuadrature& c, int m) {
  require(m >= 1, "harmonic degree must be at least 1");
  HarmonicCase h;
  h.f.reserve(c.nodes.size());
  for (index_t i = 0; i < c.N; ++i) {
    const complex_t z{c.nodes[i][0], c.nodes[i][1]};
    const complex_t dz = static_cast<double>(m) * std::pow(z, m - 1);
    // u = Re(z^m): grad u = (Re(m z^{m-1}), -Im(m z^{m-1})).
    h.f.push_back(dz.real() * c.normals[i][0] - dz.imag() * c.normals[i][1]);
  }
  h.u = [m](const Point& p) { return std::pow(complex_t{p[0], p[1]}, m).real(); };
  return h;
}

}  // namespace rkp::neumann
