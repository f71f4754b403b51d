#pragma once

#include "plqcomp/catalog.hpp"
#include "plqcomp/duality.hpp"
#include "plqcomp/second_order.hpp"

#include <string>
#include <vector>

namespace plqcomp::testing {

inline Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double a : v) out(i++) = a;
  return out;
}

/// phi(x) = |x^2 - 1|: G(x) = x^2 - 1, Y = [-1, 1].
inline CompositeProblem abs_square() {
  SmoothMap g;
  g.n = 1;
  g.m = 1;
  g.value = [](const Vector& x) { return Vector::Constant(1, x(0) * x(0) - 1.0); };
  g.jacobian = [](const Vector& x) { return Matrix::Constant(1, 1, 2.0 * x(0)); };
  g.weighted_hessian = [](const Vector&, const Vector& y) { return Matrix::Constant(1, 1, 2.0 * y(0)); };
  return CompositeProblem(Polyhedron::whole_space(1), g,
                          PlqFunction(Polyhedron::box(vec({-1}), vec({1})), Matrix::Zero(1, 1)));
}

/// X = [-1, 1], G(x) = (x, x^2), Y = {1} x [0, inf): phi(x) = x + iota(x^2 <= 0).
inline CompositeProblem duality_counterexample() {
  SmoothMap g;
  g.n = 1;
  g.m = 2;
  g.value = [](const Vector& x) { return vec({x(0), x(0) * x(0)}); };
  g.jacobian = [](const Vector& x) {
    Matrix j(2, 1);
    j << 1.0, 2.0 * x(0);
    return j;
  };
  Matrix e(1, 2);
  e << 1, 0;
  Matrix d(1, 2);
  d << 0, -1;
  return CompositeProblem(Polyhedron::box(vec({-1}), vec({1})), g,
                          PlqFunction(Polyhedron(e, Vector::Ones(1), d, Vector::Zero(1)), Matrix::Zero(2, 2)));
}

/// g0(x) = -x^2, g1(x) = x = 0, Y = {1} x R.
inline CompositeProblem nonlinear_instance() {
  SmoothMap g;
  g.n = 1;
  g.m = 2;
  g.value = [](const Vector& x) { return vec({-x(0) * x(0), x(0)}); };
  g.jacobian = [](const Vector& x) {
    Matrix j(2, 1);
    j << -2.0 * x(0), 1.0;
    return j;
  };
  g.weighted_hessian = [](const Vector&, const Vector& y) { return Matrix::Constant(1, 1, -2.0 * y(0)); };
  Matrix e(1, 2);
  e << 1, 0;
  return CompositeProblem(Polyhedron::whole_space(1), g,
                          PlqFunction(Polyhedron(e, Vector::Ones(1), Matrix(0, 2), Vector(0)), Matrix::Zero(2, 2)));
}

/// S(x) = {-1} for x < 0, [-1, 2] at 0, {2} for x > 0.
inline PolylineGraph step_graph() {
  PolylineGraph g;
  g.vertices = {Point2(0, -1), Point2(0, 2)};
  g.start_dir = Point2(-1, 0);
  g.end_dir = Point2(1, 0);
  return g;
}

struct TiltCase {
  std::string name;
  Plq1d f;
  double xbar;
  bool stable;
};

/// Twelve 1-D PLQ functions with a minimizer xbar and the known verdict.
inline std::vector<TiltCase> tilt_catalog() {
  return {
      {"max{-x,2x}", {-1.0, 2.0, 0.0}, 0.0, true},
      {"x^2/2", {-kInf, kInf, 1.0}, 0.0, true},
      {"x^2", {-kInf, kInf, 0.5}, 0.0, true},
      {"|x|", {-1.0, 1.0, 0.0}, 0.0, true},
      {"huber", {-1.0, 1.0, 1.0}, 0.0, true},
      {"indicator of {0}", {-kInf, kInf, 0.0}, 0.0, true},
      {"Y=[-1,inf)", {-1.0, kInf, 0.0}, 0.0, true},
      {"max{0,x} at 0", {0.0, 1.0, 0.0}, 0.0, false},
      {"max{0,x} at -1", {0.0, 1.0, 0.0}, -1.0, false},
      {"max{0,x}^2/2", {0.0, kInf, 1.0}, 0.0, false},
      {"indicator of (-inf,0]", {0.0, kInf, 0.0}, 0.0, false},
      {"Y=[0,1], q=1", {0.0, 1.0, 1.0}, 0.0, false},
  };
}

inline std::vector<double> tilt_grid() {
  std::vector<double> ys;
  for (int k = -10; k <= 10; ++k) ys.push_back(2e-3 * k);
  return ys;
}

inline PlqFunction as_plq(const Plq1d& f) {
  return PlqFunction(Polyhedron::box(Vector::Constant(1, f.lower), Vector::Constant(1, f.upper)),
                     Matrix::Constant(1, 1, f.q));
}

/// Random symmetric positive definite matrix with eigenvalues in [0.5, 2.5].
inline Matrix random_pd(Index m, Rng& rng) {
  const Matrix a = rng.normal_matrix(m, m);
  Eigen::HouseholderQR<Matrix> qr(a);
  const Matrix q = qr.householderQ();
  Vector lam(m);
  for (Index i = 0; i < m; ++i) lam(i) = rng.uniform(0.5, 2.5);
  Matrix out = q * lam.asDiagonal() * q.transpose();
  return 0.5 * (out + out.transpose());
}

}  // namespace plqcomp::testing
