#include "plqcomp/composite.hpp"

namespace plqcomp {

Vector SmoothMap::operator()(const Vector& x) const {
  if (x.size() != n) throw std::invalid_argument("SmoothMap: input dimension mismatch");
  Vector out = value(x);
  if (out.size() != m) throw std::runtime_error("SmoothMap: output dimension mismatch");
  return out;
}

Matrix SmoothMap::jacobian_at(const Vector& x) const {
  if (x.size() != n) throw std::invalid_argument("SmoothMap: input dimension mismatch");
  if (!jacobian) return finite_difference_jacobian(*this, x);
  Matrix jac = jacobian(x);
  if (jac.rows() != m || jac.cols() != n) throw std::runtime_error("SmoothMap: Jacobian shape mismatch");
  return jac;
}

SmoothMap SmoothMap::from_affine(Matrix A, Vector b) {
  if (A.rows() != b.size()) throw std::invalid_argument("SmoothMap::from_affine: shape mismatch");
  SmoothMap g;
  g.n = A.cols();
  g.m = A.rows();
  g.value = [A, b](const Vector& x) -> Vector { return b - A * x; };
  g.jacobian = [A](const Vector&) -> Matrix { return -A; };
  g.weighted_hessian = [n = A.cols()](const Vector&, const Vector&) -> Matrix {
    return Matrix::Zero(n, n);
  };
  g.affine = AffineData{std::move(A), std::move(b)};
  return g;
}

Matrix finite_difference_jacobian(const SmoothMap& g, const Vector& x) {
  Matrix jac(g.m, g.n);
  for (Index i = 0; i < g.n; ++i) {
    const double step = 1e-6 * std::max(1.0, std::abs(x(i)));
    Vector plus = x;
    Vector minus = x;
    plus(i) += step;
    minus(i) -= step;
    jac.col(i) = (g(plus) - g(minus)) / (2.0 * step);
  }
  return jac;
}

double jacobian_check(const SmoothMap& g, const std::vector<Vector>& points) {
  double worst = 0.0;
  for (const Vector& x : points) {
    const Matrix fd = finite_difference_jacobian(g, x);
    const Matrix jac = g.jacobian_at(x);
    worst = std::max(worst, (fd - jac).norm() / std::max(1.0, jac.norm()));
  }
  return worst;
}

CompositeProblem::CompositeProblem(Polyhedron x_set, SmoothMap g, PlqFunction h)
    : x_set_(std::move(x_set)), g_(std::move(g)), h_(std::move(h)) {
  if (!g_.value) throw std::invalid_argument("CompositeProblem: G has no value callback");
  if (x_set_.dim() != g_.n) throw std::invalid_argument("CompositeProblem: X and G input dimensions differ");
  if (g_.m != h_.dim()) throw std::invalid_argument("CompositeProblem: G output and Y dimensions differ");
}

ExtendedReal phi(const CompositeProblem& p, const Vector& x) {
  if (x.size() != p.n()) throw std::invalid_argument("phi: dimension mismatch");
  if (!contains(p.X(), x, kXTol)) return ExtendedReal::plus_infinity();
  return evaluate(p.h(), p.G()(x));
}

ChainSubgradient chain_subgradient(const CompositeProblem& p, const Vector& x) {
  if (!phi(p, x).is_finite()) throw std::invalid_argument("chain_subgradient: x outside dom phi");
  const Vector z = p.G()(x);
  const Matrix jac = p.G().jacobian_at(x);
  const Index m = p.m();
  const Index n = p.n();

  ChainSubgradient out;
  const Polyhedron dom_cone = domain_normal_cone(p.h(), z);
  out.qualification_ok =
      cone_image_radius(dom_cone.with_equalities(jac.transpose(), Vector::Zero(n)),
                        Matrix::Identity(m, m)) <= 1e-7;

  // variables (y, mu, eta >= 0) with grad G^T y + A_e^T mu + D_A^T eta = 0
  const ConeDescription nx = normal_cone(p.X(), x, kXTol);
  const Index ne = nx.span_rows.rows();
  const Index na = nx.gen_rows.rows();
  const Index nv = m + ne + na;
  Matrix eq = Matrix::Zero(dom_cone.num_eq() + n, nv);
  eq.topLeftCorner(dom_cone.num_eq(), m) = dom_cone.eq_matrix();
  eq.block(dom_cone.num_eq(), 0, n, m) = jac.transpose();
  if (ne > 0) eq.block(dom_cone.num_eq(), m, n, ne) = nx.span_rows.transpose();
  if (na > 0) eq.block(dom_cone.num_eq(), m + ne, n, na) = nx.gen_rows.transpose();
  Matrix ineq = Matrix::Zero(dom_cone.num_ineq() + na, nv);
  ineq.topLeftCorner(dom_cone.num_ineq(), m) = dom_cone.ineq_matrix();
  ineq.bottomRightCorner(na, na) = -Matrix::Identity(na, na);
  Matrix pick = Matrix::Zero(m, nv);
  pick.leftCols(m) = Matrix::Identity(m, m);
  out.qualification_x_ok =
      cone_image_radius(Polyhedron(eq, Vector::Zero(eq.rows()), ineq, Vector::Zero(ineq.rows())),
                        pick) <= 1e-7;

  const auto sub = subgradients(p.h(), z);
  if (!sub) throw std::invalid_argument("chain_subgradient: G(x) outside dom h");
  out.multiplier = sub->representative;
  out.representative = jac.transpose() * sub->representative;
  if (sub->unique) {
    out.unique = true;
  } else {
    // image of the argmin set under grad G^T: directions d with Q d = 0, <z, d> = 0, d tangent to Y
    const Polyhedron& y = p.h().Y();
    const ConeDescription ny = normal_cone(y, sub->representative, kActiveTol);
    Matrix deq(y.num_eq() + m + 1, m);
    deq << y.eq_matrix(), p.h().Q(), z.transpose();
    const Polyhedron tangent(deq, Vector::Zero(deq.rows()), ny.gen_rows, Vector::Zero(ny.gen_rows.rows()));
    out.unique = cone_image_radius(tangent, jac.transpose()) <= 1e-7;
  }
  return out;
}

StationarityTriple stationarity_residual(const CompositeProblem& p, const Vector& x, const Vector& y,
                                         const Vector& z) {
  if (x.size() != p.n() || y.size() != p.m() || z.size() != p.m())
    throw std::invalid_argument("stationarity_residual: dimension mismatch");
  StationarityTriple t;
  t.x = x;
  t.y = y;
  t.z = z;
  if (!contains(p.X(), x, kXTol)) {
    t.r_G = (p.G()(x) - z).norm();
    t.r_Y = dist_to_cone(normal_cone(p.h().Y(), y, kActiveTol), z - p.h().Q() * y);
    t.r_X = kInf;
    t.residual = kInf;
    return t;
  }
  if (!contains(p.X(), x)) t.x = project(p.X(), x);
  const Vector gx = p.G()(t.x);
  t.r_G = (gx - z).norm();
  t.r_Y = dist_to_cone(normal_cone(p.h().Y(), y, kActiveTol), z - p.h().Q() * y);
  t.r_X = dist_to_cone(normal_cone(p.X(), t.x, kActiveTol), -p.G().jacobian_at(t.x).transpose() * y);
  t.residual = std::sqrt(t.r_G * t.r_G + t.r_Y * t.r_Y + t.r_X * t.r_X);
  return t;
}

namespace {

// Over the argmin face of h at z, relaxed by eps, the y whose -grad G^T y is nearest N_X(x).
std::optional<Vector> closest_multiplier(const CompositeProblem& p, const Vector& x, const Vector& z,
                                         const Vector& y0) {
  const ConeDescription cone = normal_cone(p.X(), x, kActiveTol);
  if (cone.empty) return std::nullopt;
  const Index m = p.m();
  const Index ns = cone.span_rows.rows();
  const Index ng = cone.gen_rows.rows();
  const Index total = m + ns + ng;
  Matrix combo(p.n(), total);
  combo << p.G().jacobian_at(x).transpose(), cone.span_rows.transpose(), cone.gen_rows.transpose();
  const Matrix hess = combo.transpose() * combo;

  const Polyhedron& ys = p.h().Y();
  const Matrix& q = p.h().Q();
  const Vector slope = z - q * y0;
  const double eps = 1e-9 * (1.0 + std::abs(y0.dot(slope)) + z.norm());
  const bool quadratic = !q.isZero(0.0);
  Matrix eq = Matrix::Zero(ys.num_eq() + (quadratic ? m : 0), total);
  Vector eq_rhs(eq.rows());
  eq.topLeftCorner(ys.num_eq(), m) = ys.eq_matrix();
  eq_rhs.head(ys.num_eq()) = ys.eq_rhs();
  if (quadratic) {
    eq.bottomLeftCorner(m, m) = q;
    eq_rhs.tail(m) = q * y0;
  }
  Matrix ineq = Matrix::Zero(ys.num_ineq() + 1 + ng, total);
  Vector ineq_rhs = Vector::Zero(ineq.rows());
  ineq.topLeftCorner(ys.num_ineq(), m) = ys.ineq_matrix();
  ineq_rhs.head(ys.num_ineq()) = ys.ineq_rhs();
  ineq.block(ys.num_ineq(), 0, 1, m) = -slope.transpose();
  ineq_rhs(ys.num_ineq()) = eps - y0.dot(slope);
  ineq.bottomRightCorner(ng, ng) = -Matrix::Identity(ng, ng);

  QpOptions options;
  Vector start = Vector::Zero(total);
  start.head(m) = y0;
  options.initial_point = start;
  const QpSolution sol = solve_qp(QpProblem(hess, Vector::Zero(total), Polyhedron(eq, eq_rhs, ineq, ineq_rhs)),
                                  options);
  if (!sol.optimal()) return std::nullopt;
  return Vector(sol.x.head(m));
}

}  // namespace

Multipliers multiplier_recovery(const CompositeProblem& p, const Vector& x) {
  if (!phi(p, x).is_finite()) throw std::invalid_argument("multiplier_recovery: x outside dom phi");
  Multipliers out;
  out.z = p.G()(x);
  const auto sub = subgradients(p.h(), out.z);
  if (!sub) throw std::invalid_argument("multiplier_recovery: G(x) outside dom h");
  out.y = sub->representative;
  if (const auto y = closest_multiplier(p, x, out.z, out.y)) {
    if (stationarity_residual(p, x, *y, out.z).residual < 0.5 * stationarity_residual(p, x, out.y, out.z).residual)
      out.y = *y;
  }
  return out;
}

}  // namespace plqcomp
