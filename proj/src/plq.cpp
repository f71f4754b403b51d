#include "plqcomp/plq.hpp"

#include <Eigen/Eigenvalues>

namespace plqcomp {

namespace {

Polyhedron flat_cone(const Polyhedron& y_set, const Matrix& q) {
  const Polyhedron rec = recession_cone(y_set);
  return rec.with_equalities(q, Vector::Zero(q.rows()));
}

}  // namespace

PlqFunction::PlqFunction(Polyhedron y_set, Matrix q)
    : y_set_(std::move(y_set)), q_(std::move(q)), flat_recession_(Polyhedron::whole_space(1)) {
  const Index m = y_set_.dim();
  if (q_.rows() != m || q_.cols() != m) throw std::invalid_argument("PlqFunction: Q dimension mismatch");
  if (!q_.allFinite()) throw std::invalid_argument("PlqFunction: Q has NaN or infinite entries");
  if ((q_ - q_.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("PlqFunction: Q is not symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(q_, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-10)
    throw std::invalid_argument("PlqFunction: Q is not positive semidefinite");
  if (!is_nonempty(y_set_)) throw std::invalid_argument("PlqFunction: Y is empty");
  flat_recession_ = flat_cone(y_set_, q_);
  real_valued_ = cone_is_trivial(flat_recession_);
}

bool in_domain(const PlqFunction& h, const Vector& z) {
  if (z.size() != h.dim()) throw std::invalid_argument("in_domain: dimension mismatch");
  if (!z.allFinite()) return false;
  if (h.real_valued()) return true;
  const Index m = h.dim();
  const Polyhedron boxed = h.flat_recession().intersect(
      Polyhedron::box(Vector::Constant(m, -1.0), Vector::Constant(m, 1.0)));
  QpOptions options;
  options.multiplier_tol = 1e-14;
  options.flat_tol = 1e-14;
  options.ray_tol = 1e-14;
  const QpSolution lp = solve_qp(QpProblem(Matrix::Zero(m, m), -z, boxed), options);
  if (!lp.optimal()) throw std::runtime_error("in_domain: recession LP failed");
  return -lp.objective <= 1e-11 * (1.0 + z.norm());
}

namespace {

QpSolution argmin_qp(const PlqFunction& h, const Vector& z) {
  QpOptions options;
  options.multiplier_tol = 1e-14;
  options.ray_tol = 1e-9;
  return solve_qp(QpProblem(h.Q(), -z, h.Y()), options);
}

}  // namespace

ExtendedReal evaluate(const PlqFunction& h, const Vector& z) {
  if (z.size() != h.dim()) throw std::invalid_argument("evaluate: dimension mismatch");
  if (!in_domain(h, z)) return ExtendedReal::plus_infinity();
  const QpSolution sol = argmin_qp(h, z);
  if (sol.status == QpStatus::Unbounded) return ExtendedReal::plus_infinity();
  if (!sol.optimal()) throw std::runtime_error("evaluate: inner QP failed");
  assert(std::isfinite(sol.objective));
  return ExtendedReal::finite(-sol.objective);
}

std::optional<Subgradient> subgradients(const PlqFunction& h, const Vector& z) {
  if (z.size() != h.dim()) throw std::invalid_argument("subgradients: dimension mismatch");
  if (!in_domain(h, z)) return std::nullopt;
  QpSolution sol = argmin_qp(h, z);
  if (sol.status == QpStatus::Unbounded) return std::nullopt;
  if (!sol.optimal()) throw std::runtime_error("subgradients: inner QP failed");
  Subgradient out;
  out.representative = sol.x;
  out.unique = solution_is_unique(QpProblem(h.Q(), -z, h.Y()), sol);
  out.argmin = std::move(sol);
  return out;
}

Polyhedron domain_normal_cone(const PlqFunction& h, const Vector& z) {
  if (z.size() != h.dim()) throw std::invalid_argument("domain_normal_cone: dimension mismatch");
  return h.flat_recession().with_equalities(z.transpose(), Vector::Zero(1));
}

Matrix psd_sqrt(const Matrix& q) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(q);
  const Vector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
}

DualForm dual_form(const PlqFunction& h) {
  const Polyhedron& y = h.Y();
  const Index m = h.dim();
  DualForm form;
  form.A.resize(m, y.num_ineq() + 2 * y.num_eq());
  form.b.resize(y.num_ineq() + 2 * y.num_eq());
  form.A << y.ineq_matrix().transpose(), y.eq_matrix().transpose(), -y.eq_matrix().transpose();
  form.b << y.ineq_rhs(), y.eq_rhs(), -y.eq_rhs();
  form.D = h.Q().isZero(0.0) ? Matrix(Matrix::Zero(m, m)) : psd_sqrt(h.Q());
  form.J = Matrix::Identity(m, m);
  return form;
}

ExtendedReal eval_via_dual(const PlqFunction& h, const Vector& z) {
  if (z.size() != h.dim()) throw std::invalid_argument("eval_via_dual: dimension mismatch");
  const DualForm form = dual_form(h);
  const Index m = h.dim();
  const Index nv = form.A.cols();
  const bool quadratic = !form.D.isZero(0.0);
  const Index nw = quadratic ? m : 0;
  const Index n = nv + nw;
  if (n == 0) {
    // Y is the whole space with Q = 0
    return z.isZero(0.0) ? ExtendedReal::finite(0.0) : ExtendedReal::plus_infinity();
  }
  Matrix hess = Matrix::Zero(n, n);
  if (quadratic) hess.bottomRightCorner(nw, nw) = form.J;
  Vector lin = Vector::Zero(n);
  lin.head(nv) = form.b;
  Matrix eq(m, n);
  eq.leftCols(nv) = form.A;
  if (quadratic) eq.rightCols(nw) = form.D;
  Matrix sign = Matrix::Zero(nv, n);
  sign.leftCols(nv) = -Matrix::Identity(nv, nv);
  const QpSolution sol = solve_qp(QpProblem(hess, lin, Polyhedron(eq, z, sign, Vector::Zero(nv))));
  if (sol.status == QpStatus::Infeasible) return ExtendedReal::plus_infinity();
  if (sol.status == QpStatus::Unbounded) return ExtendedReal::minus_infinity();
  if (!sol.optimal()) throw std::runtime_error("eval_via_dual: QP failed");
  return ExtendedReal::finite(sol.objective);
}

PlqFunction moreau_smoothed(const PlqFunction& h, double nu) {
  if (!(nu > 0)) throw std::invalid_argument("moreau_smoothed: nu must be positive");
  return PlqFunction(h.Y(), h.Q() + Matrix::Identity(h.dim(), h.dim()) / nu);
}

}  // namespace plqcomp
