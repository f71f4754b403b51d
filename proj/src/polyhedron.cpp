#include "plqcomp/polyhedron.hpp"

#include "plqcomp/qp.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace plqcomp {

std::string to_string(const ExtendedReal& value) {
  switch (value.kind()) {
    case ExtendedReal::Kind::PlusInfinity: return "+inf";
    case ExtendedReal::Kind::MinusInfinity: return "-inf";
    case ExtendedReal::Kind::Finite: break;
  }
  std::ostringstream out;
  out.precision(17);
  out << value.value();
  return out.str();
}

namespace {

Matrix stack_rows(const Matrix& a, const Matrix& b, Index cols) {
  Matrix out(a.rows() + b.rows(), cols);
  if (a.rows() > 0) out.topRows(a.rows()) = a;
  if (b.rows() > 0) out.bottomRows(b.rows()) = b;
  return out;
}

Vector stack(const Vector& a, const Vector& b) {
  Vector out(a.size() + b.size());
  out << a, b;
  return out;
}

}  // namespace

Polyhedron::Polyhedron(Matrix eq_matrix, Vector eq_rhs, Matrix ineq_matrix, Vector ineq_rhs)
    : dim_(std::max(eq_matrix.cols(), ineq_matrix.cols())),
      eq_matrix_(std::move(eq_matrix)),
      eq_rhs_(std::move(eq_rhs)),
      ineq_matrix_(std::move(ineq_matrix)),
      ineq_rhs_(std::move(ineq_rhs)) {
  if (dim_ < 1) throw std::invalid_argument("Polyhedron: dimension must be at least 1");
  if (eq_matrix_.rows() == 0) eq_matrix_.resize(0, dim_);
  if (ineq_matrix_.rows() == 0) ineq_matrix_.resize(0, dim_);
  if (eq_matrix_.cols() != dim_ || ineq_matrix_.cols() != dim_)
    throw std::invalid_argument("Polyhedron: row dimensions disagree");
  if (eq_rhs_.size() != eq_matrix_.rows() || ineq_rhs_.size() != ineq_matrix_.rows())
    throw std::invalid_argument("Polyhedron: right-hand side length mismatch");
  if (!eq_matrix_.allFinite() || !eq_rhs_.allFinite() || !ineq_matrix_.allFinite() ||
      !ineq_rhs_.allFinite())
    throw std::invalid_argument("Polyhedron: NaN or infinite entry");
}

Polyhedron Polyhedron::whole_space(Index dim) {
  return Polyhedron(Matrix(0, dim), Vector(0), Matrix(0, dim), Vector(0));
}

Polyhedron Polyhedron::box(const Vector& lower, const Vector& upper) {
  if (lower.size() != upper.size() || lower.size() < 1)
    throw std::invalid_argument("Polyhedron::box: bound length mismatch");
  const Index n = lower.size();
  Matrix d = Matrix::Zero(2 * n, n);
  Vector rhs(2 * n);
  Index k = 0;
  for (Index i = 0; i < n; ++i) {
    if (std::isnan(lower(i)) || std::isnan(upper(i)) || lower(i) > upper(i))
      throw std::invalid_argument("Polyhedron::box: invalid bounds");
  }
  // Upper bounds first, then lower bounds, so row i is x_i <= u_i on full boxes.
  for (Index i = 0; i < n; ++i) {
    if (std::isfinite(upper(i))) {
      d(k, i) = 1.0;
      rhs(k++) = upper(i);
    }
  }
  for (Index i = 0; i < n; ++i) {
    if (std::isfinite(lower(i))) {
      d(k, i) = -1.0;
      rhs(k++) = -lower(i);
    }
  }
  return Polyhedron(Matrix(0, n), Vector(0), d.topRows(k), rhs.head(k));
}

Polyhedron Polyhedron::orthant(Index dim) {
  return Polyhedron(Matrix(0, dim), Vector(0), -Matrix::Identity(dim, dim), Vector::Zero(dim));
}

Polyhedron Polyhedron::simplex(Index dim, double total) {
  return Polyhedron(Matrix::Ones(1, dim), Vector::Constant(1, total), -Matrix::Identity(dim, dim),
                    Vector::Zero(dim));
}

Polyhedron Polyhedron::halfspace(const Vector& normal, double rhs) {
  return Polyhedron(Matrix(0, normal.size()), Vector(0), normal.transpose(),
                    Vector::Constant(1, rhs));
}

Polyhedron Polyhedron::point(const Vector& p) {
  return Polyhedron(Matrix::Identity(p.size(), p.size()), p, Matrix(0, p.size()), Vector(0));
}

Polyhedron Polyhedron::product(const Polyhedron& a, const Polyhedron& b) {
  const Index n = a.dim() + b.dim();
  Matrix eq = Matrix::Zero(a.num_eq() + b.num_eq(), n);
  eq.topLeftCorner(a.num_eq(), a.dim()) = a.eq_matrix();
  eq.bottomRightCorner(b.num_eq(), b.dim()) = b.eq_matrix();
  Matrix in = Matrix::Zero(a.num_ineq() + b.num_ineq(), n);
  in.topLeftCorner(a.num_ineq(), a.dim()) = a.ineq_matrix();
  in.bottomRightCorner(b.num_ineq(), b.dim()) = b.ineq_matrix();
  return Polyhedron(eq, stack(a.eq_rhs(), b.eq_rhs()), in, stack(a.ineq_rhs(), b.ineq_rhs()));
}

Polyhedron Polyhedron::with_equalities(const Matrix& rows, const Vector& rhs) const {
  return Polyhedron(stack_rows(eq_matrix_, rows, dim_), stack(eq_rhs_, rhs), ineq_matrix_,
                    ineq_rhs_);
}

Polyhedron Polyhedron::with_inequalities(const Matrix& rows, const Vector& rhs) const {
  return Polyhedron(eq_matrix_, eq_rhs_, stack_rows(ineq_matrix_, rows, dim_),
                    stack(ineq_rhs_, rhs));
}

Polyhedron Polyhedron::intersect(const Polyhedron& other) const {
  if (other.dim() != dim_) throw std::invalid_argument("Polyhedron::intersect: dimension mismatch");
  return with_equalities(other.eq_matrix(), other.eq_rhs())
      .with_inequalities(other.ineq_matrix(), other.ineq_rhs());
}

double max_violation(const Polyhedron& set, const Vector& x) {
  if (x.size() != set.dim()) throw std::invalid_argument("max_violation: dimension mismatch");
  double worst = 0.0;
  if (set.num_eq() > 0)
    worst = std::max(worst, (set.eq_matrix() * x - set.eq_rhs()).cwiseAbs().maxCoeff());
  if (set.num_ineq() > 0)
    worst = std::max(worst, (set.ineq_matrix() * x - set.ineq_rhs()).maxCoeff());
  return worst;
}

bool contains(const Polyhedron& set, const Vector& x, double tol) {
  if (x.size() != set.dim()) throw std::invalid_argument("contains: dimension mismatch");
  if (tol < 0) throw std::invalid_argument("contains: negative tolerance");
  if (!x.allFinite()) return false;
  return max_violation(set, x) <= tol;
}

ConeDescription ConeDescription::empty_cone(const Vector& base_point) {
  ConeDescription cone;
  cone.span_rows.resize(0, base_point.size());
  cone.gen_rows.resize(0, base_point.size());
  cone.base_point = base_point;
  cone.empty = true;
  return cone;
}

ConeDescription normal_cone(const Polyhedron& set, const Vector& xbar, double tol) {
  if (!contains(set, xbar, tol)) return ConeDescription::empty_cone(xbar);
  ConeDescription cone;
  cone.base_point = xbar;
  cone.span_rows = set.eq_matrix();
  const Vector slack = set.ineq_rhs() - set.ineq_matrix() * xbar;
  for (Index i = 0; i < set.num_ineq(); ++i)
    if (slack(i) <= tol) cone.active.push_back(i);
  cone.gen_rows.resize(static_cast<Index>(cone.active.size()), set.dim());
  for (std::size_t k = 0; k < cone.active.size(); ++k)
    cone.gen_rows.row(static_cast<Index>(k)) = set.ineq_matrix().row(cone.active[k]);
  return cone;
}

double dist_to_cone(const ConeDescription& cone, const Vector& v) {
  if (cone.empty) return kInf;
  if (v.size() != cone.dim()) throw std::invalid_argument("dist_to_cone: dimension mismatch");
  const Index free_count = cone.span_rows.rows();
  const Index gen_count = cone.gen_rows.rows();
  const Index k = free_count + gen_count;
  if (k == 0) return v.norm();
  // columns of M generate the cone; minimize 1/2 |M c - v|^2 with the generator weights >= 0
  Matrix m(v.size(), k);
  if (free_count > 0) m.leftCols(free_count) = cone.span_rows.transpose();
  if (gen_count > 0) m.rightCols(gen_count) = cone.gen_rows.transpose();
  Matrix sign = Matrix::Zero(gen_count, k);
  for (Index i = 0; i < gen_count; ++i) sign(i, free_count + i) = -1.0;
  QpProblem qp(m.transpose() * m, -m.transpose() * v,
               Polyhedron(Matrix(0, k), Vector(0), sign, Vector::Zero(gen_count)));
  const QpSolution sol = solve_qp(qp);
  if (!sol.optimal()) throw std::runtime_error("dist_to_cone: projection QP failed");
  return (m * sol.x - v).norm();
}

double cone_image_radius(const Polyhedron& cone, const Matrix& image) {
  if (image.cols() != cone.dim()) throw std::invalid_argument("cone_image_radius: dimension mismatch");
  const Index n = cone.dim();
  const Polyhedron boxed =
      cone.intersect(Polyhedron::box(Vector::Constant(n, -1.0), Vector::Constant(n, 1.0)));
  double radius = 0.0;
  for (Index j = 0; j < image.rows(); ++j) {
    for (double s : {1.0, -1.0}) {
      QpProblem lp(Matrix::Zero(n, n), -s * image.row(j).transpose(), boxed);
      const QpSolution sol = solve_qp(lp);
      if (!sol.optimal()) throw std::runtime_error("cone_image_radius: LP failed");
      radius = std::max(radius, -sol.objective);
    }
  }
  return radius;
}

bool cone_is_trivial(const Polyhedron& cone) {
  return cone_image_radius(cone, Matrix::Identity(cone.dim(), cone.dim())) <= 1e-7;
}

bool is_nonempty(const Polyhedron& set) {
  QpProblem lp(Matrix::Zero(set.dim(), set.dim()), Vector::Zero(set.dim()), set);
  const QpSolution sol = solve_qp(lp);
  if (sol.status == QpStatus::MaxIterations) throw std::runtime_error("is_nonempty: phase-1 LP did not finish");
  return sol.status != QpStatus::Infeasible;
}

Polyhedron recession_cone(const Polyhedron& set) {
  if (!is_nonempty(set)) throw std::invalid_argument("recession_cone: empty polyhedron");
  return Polyhedron(set.eq_matrix(), Vector::Zero(set.num_eq()), set.ineq_matrix(),
                    Vector::Zero(set.num_ineq()));
}

bool is_bounded(const Polyhedron& set) { return cone_is_trivial(recession_cone(set)); }

std::vector<Vector> vertices(const Polyhedron& set) {
  const Index n = set.dim();
  if (n > 6) throw std::invalid_argument("vertices: dimension above 6");
  if (!is_bounded(set)) throw std::invalid_argument("vertices: unbounded polyhedron");
  const Index rows = set.num_eq() + set.num_ineq();
  Matrix all(rows, n);
  Vector rhs(rows);
  all << set.eq_matrix(), set.ineq_matrix();
  rhs << set.eq_rhs(), set.ineq_rhs();

  std::vector<Vector> found;
  if (rows < n) return found;
  // exhaustive choice of n rows
  std::vector<int> pick(static_cast<std::size_t>(rows), 0);
  std::fill(pick.end() - n, pick.end(), 1);
  do {
    Matrix basis(n, n);
    Vector b(n);
    Index k = 0;
    for (Index r = 0; r < rows; ++r) {
      if (pick[static_cast<std::size_t>(r)]) {
        basis.row(k) = all.row(r);
        b(k++) = rhs(r);
      }
    }
    Eigen::FullPivLU<Matrix> lu(basis);
    if (lu.rank() < n) continue;
    const Vector x = lu.solve(b);
    if (!contains(set, x, 1e-9)) continue;
    const bool duplicate = std::any_of(found.begin(), found.end(),
                                       [&](const Vector& v) { return (v - x).norm() <= 1e-9; });
    if (!duplicate) found.push_back(x);
  } while (std::next_permutation(pick.begin(), pick.end()));
  return found;
}

}  // namespace plqcomp
