#include "plqcomp/catalog.hpp"

#include <cmath>
#include <stdexcept>

namespace plqcomp {

std::uint64_t Rng::next() {
  state_ = state_ * 6364136223846793005ULL + 1442695040888963407ULL;
  return state_;
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  double u1 = 1.0 - uniform();
  double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

Vector Rng::normal_vector(Index n) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = normal();
  return v;
}

Matrix Rng::normal_matrix(Index rows, Index cols) {
  Matrix a(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) a(i, j) = normal();
  return a;
}

const char* to_string(Family family) {
  switch (family) {
    case Family::Goal: return "goal";
    case Family::NlpPenalty: return "nlp";
    case Family::Cvar: return "cvar";
    case Family::LassoTaper: return "lasso";
    case Family::PhaseRetrieval: return "phase_retrieval";
    case Family::SpatialVI: return "spatial_vi";
  }
  return "?";
}

Family family_from_string(const std::string& name) {
  for (Family f : {Family::Goal, Family::NlpPenalty, Family::Cvar, Family::LassoTaper,
                   Family::PhaseRetrieval, Family::SpatialVI})
    if (name == to_string(f)) return f;
  throw std::invalid_argument("unknown family '" + name + "'");
}

void InstanceSpec::validate() const {
  if (n < 1 || m < 1) throw std::invalid_argument("dimensions must be positive");
  if (targets.size() != 0 && targets.size() != m)
    throw std::invalid_argument("targets must have m entries");
  if (penalties.size() != 0) {
    if (penalties.size() != m) throw std::invalid_argument("penalties must have m entries");
    if ((penalties.array() < 0).any()) throw std::invalid_argument("penalties must be nonnegative");
  }
  if (probabilities.size() != 0) {
    if (probabilities.size() != m) throw std::invalid_argument("probabilities must have m entries");
    if ((probabilities.array() < 0).any())
      throw std::invalid_argument("probabilities must be nonnegative");
    if (std::abs(probabilities.sum() - 1.0) > 1e-12)
      throw std::invalid_argument("probabilities must sum to 1");
  }
  if (!(alpha >= 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in [0, 1)");
  if (!(theta > 0.0)) throw std::invalid_argument("theta must be positive");
  if (center && center->size() != n) throw std::invalid_argument("center must have n entries");
  if (!(radius2 >= 0.0)) throw std::invalid_argument("radius2 must be nonnegative");
  if (n_eq < 0 || n_ineq < 0) throw std::invalid_argument("constraint counts must be nonnegative");
  if (family == Family::NlpPenalty && n_eq < 1)
    throw std::invalid_argument("nlp needs the sphere equality (n_eq >= 1)");
  if (!(capacity > 0.0)) throw std::invalid_argument("capacity must be positive");
  if (!std::isfinite(curvature) || curvature < 0.0)
    throw std::invalid_argument("curvature must be finite and nonnegative");
}

double taper_value(double t, double theta) {
  if (t > 1.0) return theta * (2.0 - std::exp(1.0 - t));
  if (t < -1.0) return theta * (std::exp(1.0 + t) - 2.0);
  return theta * t;
}

double taper_derivative(double t, double theta) {
  if (t > 1.0) return theta * std::exp(1.0 - t);
  if (t < -1.0) return theta * std::exp(1.0 + t);
  return theta;
}

static double taper_second(double t, double theta) {
  if (t > 1.0) return -theta * std::exp(1.0 - t);
  if (t < -1.0) return theta * std::exp(1.0 + t);
  return 0.0;
}

static Instance make(const InstanceSpec& spec, Polyhedron x, SmoothMap g, PlqFunction h, Vector x0) {
  return Instance{spec, CompositeProblem(std::move(x), std::move(g), std::move(h)), std::move(x0),
                  std::nullopt, Matrix(), Vector(), Matrix(), Vector()};
}

static Instance build_goal(const InstanceSpec& s, Rng& rng) {
  Matrix slopes = rng.normal_matrix(s.m, s.n);
  Vector offsets = rng.normal_vector(s.m);
  Vector tau = s.targets.size() ? s.targets : Vector::Zero(s.m);
  Vector alpha = s.penalties.size() ? s.penalties : Vector::Ones(s.m);
  double c = s.curvature;
  SmoothMap g;
  if (c == 0.0) {
    g = SmoothMap::from_affine(-slopes, offsets - tau);
  } else {
    g.n = s.n;
    g.m = s.m;
    g.value = [=](const Vector& x) -> Vector {
      return (offsets - tau + slopes * x).array() + 0.5 * c * x.squaredNorm();
    };
    g.jacobian = [=](const Vector& x) -> Matrix {
      Matrix j = slopes;
      j.rowwise() += c * x.transpose();
      return j;
    };
    g.weighted_hessian = [=](const Vector&, const Vector& y) -> Matrix {
      return c * y.sum() * Matrix::Identity(slopes.cols(), slopes.cols());
    };
  }
  Instance inst = make(s, Polyhedron::box(Vector::Constant(s.n, -2.0), Vector::Constant(s.n, 2.0)),
                       std::move(g), PlqFunction(Polyhedron::box(Vector::Zero(s.m), alpha),
                                                 Matrix::Zero(s.m, s.m)),
                       Vector::Zero(s.n));
  inst.slopes = slopes;
  inst.offsets = offsets - tau;
  return inst;
}

static Instance build_nlp(const InstanceSpec& s, Rng& rng) {
  const Index n = s.n;
  Vector center = s.center ? *s.center : Vector(3.0 * rng.normal_vector(n));
  double r2 = s.radius2 > 0.0 ? s.radius2 : static_cast<double>(n);
  Vector planted = Vector::Constant(n, std::sqrt(r2 / n));
  Index extra_eq = s.n_eq - 1;
  Matrix eq_rows = rng.normal_matrix(extra_eq, n);
  Matrix in_rows = rng.normal_matrix(s.n_ineq, n);
  Vector slack(s.n_ineq);
  for (Index k = 0; k < s.n_ineq; ++k) slack(k) = rng.uniform(0.5, 1.5);
  const Index mg = 1 + s.n_eq + s.n_ineq;

  SmoothMap g;
  g.n = n;
  g.m = mg;
  g.value = [=](const Vector& x) -> Vector {
    Vector v(mg);
    v(0) = 0.5 * (x - center).squaredNorm();
    v(1) = x.squaredNorm() - r2;
    v.segment(2, extra_eq) = eq_rows * (x - planted);
    v.tail(s.n_ineq) = in_rows * (x - planted) - slack;
    return v;
  };
  g.jacobian = [=](const Vector& x) -> Matrix {
    Matrix j(mg, n);
    j.row(0) = (x - center).transpose();
    j.row(1) = 2.0 * x.transpose();
    j.middleRows(2, extra_eq) = eq_rows;
    j.bottomRows(s.n_ineq) = in_rows;
    return j;
  };
  g.weighted_hessian = [=](const Vector&, const Vector& y) -> Matrix {
    return (y(0) + 2.0 * y(1)) * Matrix::Identity(n, n);
  };

  Matrix eq = Matrix::Zero(1, mg);
  eq(0, 0) = 1.0;
  Matrix in = Matrix::Zero(s.n_ineq, mg);
  for (Index k = 0; k < s.n_ineq; ++k) in(k, 1 + s.n_eq + k) = -1.0;
  Polyhedron y(eq, Vector::Ones(1), in, Vector::Zero(s.n_ineq));
  Instance inst = make(s, Polyhedron::whole_space(n), std::move(g),
                       PlqFunction(std::move(y), Matrix::Zero(mg, mg)), Vector::Zero(n));
  inst.planted = planted;
  return inst;
}

static Polyhedron cvar_y(const Vector& p, double alpha) {
  const Index m = p.size();
  Matrix in(2 * m, m);
  in << -Matrix::Identity(m, m), (1.0 - alpha) * Matrix::Identity(m, m);
  Vector rhs(2 * m);
  rhs << Vector::Zero(m), p;
  return Polyhedron(Matrix::Ones(1, m), Vector::Ones(1), in, rhs);
}

static Instance build_cvar(const InstanceSpec& s, Rng& rng) {
  Matrix slopes = rng.normal_matrix(s.m, s.n);
  Vector offsets = rng.normal_vector(s.m);
  Vector p = s.probabilities.size() ? s.probabilities : Vector::Constant(s.m, 1.0 / s.m);
  Instance inst =
      make(s, Polyhedron::box(Vector::Constant(s.n, -1.0), Vector::Constant(s.n, 1.0)),
           SmoothMap::from_affine(-slopes, offsets), PlqFunction(cvar_y(p, s.alpha), Matrix::Zero(s.m, s.m)),
           Vector::Zero(s.n));
  inst.slopes = slopes;
  inst.offsets = offsets;
  return inst;
}

static Instance build_lasso(const InstanceSpec& s, Rng& rng) {
  const Index n = s.n;
  Matrix a = rng.normal_matrix(s.m, n) / std::sqrt(static_cast<double>(s.m));
  Vector planted = Vector::Zero(n);
  for (Index j = 0; j < n; j += 2) planted(j) = rng.normal();
  Vector b = a * planted;
  const double theta = s.theta;
  const bool taper = s.taper;

  SmoothMap g;
  g.n = n;
  g.m = n + 1;
  g.value = [=](const Vector& x) -> Vector {
    Vector v(n + 1);
    v(0) = (a * x - b).squaredNorm();
    for (Index j = 0; j < n; ++j) v(j + 1) = taper ? taper_value(x(j), theta) : theta * x(j);
    return v;
  };
  g.jacobian = [=](const Vector& x) -> Matrix {
    Matrix j = Matrix::Zero(n + 1, n);
    j.row(0) = 2.0 * (a.transpose() * (a * x - b)).transpose();
    for (Index k = 0; k < n; ++k) j(k + 1, k) = taper ? taper_derivative(x(k), theta) : theta;
    return j;
  };
  g.weighted_hessian = [=](const Vector& x, const Vector& y) -> Matrix {
    Matrix hess = 2.0 * y(0) * a.transpose() * a;
    if (taper)
      for (Index k = 0; k < n; ++k) hess(k, k) += y(k + 1) * taper_second(x(k), theta);
    return hess;
  };

  Polyhedron y = Polyhedron::product(Polyhedron::point(Vector::Ones(1)),
                                     Polyhedron::box(Vector::Constant(n, -1.0), Vector::Ones(n)));
  Instance inst = make(s, Polyhedron::whole_space(n), std::move(g),
                       PlqFunction(std::move(y), Matrix::Zero(n + 1, n + 1)), Vector::Zero(n));
  inst.planted = planted;
  return inst;
}

static Instance build_phase(const InstanceSpec& s, Rng& rng) {
  const Index n = s.n;
  const Index m = s.m;
  Matrix a = rng.normal_matrix(m, n);
  Vector planted = rng.normal_vector(n);
  Vector b = (a * planted).array().square();
  const double scale = 1.0 / static_cast<double>(m);

  SmoothMap g;
  g.n = n;
  g.m = m;
  g.value = [=](const Vector& x) -> Vector {
    return scale * ((a * x).array().square() - b.array()).matrix();
  };
  g.jacobian = [=](const Vector& x) -> Matrix {
    Vector ax = a * x;
    return 2.0 * scale * (ax.asDiagonal() * a);
  };
  g.weighted_hessian = [=](const Vector&, const Vector& y) -> Matrix {
    return 2.0 * scale * a.transpose() * y.asDiagonal() * a;
  };

  Matrix spectral = scale * a.transpose() * b.asDiagonal() * a;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(spectral);
  Vector x0 = eig.eigenvectors().col(n - 1) * std::sqrt(b.mean());

  Instance inst = make(s, Polyhedron::whole_space(n), std::move(g),
                       PlqFunction(Polyhedron::box(Vector::Constant(m, -1.0), Vector::Ones(m)),
                                   Matrix::Zero(m, m)),
                       x0);
  inst.planted = planted;
  return inst;
}

/// Variables (s, d, w) with w_ij at offset m + n + i n + j.
static Polyhedron spatial_set(Index m, Index n, double capacity) {
  const Index dim = m + n + m * n;
  const Index off = m + n;
  Matrix eq = Matrix::Zero(m + n, dim);
  for (Index i = 0; i < m; ++i) {
    eq(i, i) = -1.0;
    for (Index j = 0; j < n; ++j) eq(i, off + i * n + j) = 1.0;
  }
  for (Index j = 0; j < n; ++j) {
    eq(m + j, m + j) = -1.0;
    for (Index i = 0; i < m; ++i) eq(m + j, off + i * n + j) = 1.0;
  }
  Matrix in = Matrix::Zero(2 * m * n, dim);
  Vector rhs(2 * m * n);
  for (Index k = 0; k < m * n; ++k) {
    in(k, off + k) = -1.0;
    rhs(k) = 0.0;
    in(m * n + k, off + k) = 1.0;
    rhs(m * n + k) = capacity;
  }
  return Polyhedron(eq, Vector::Zero(m + n), in, rhs);
}

static Matrix dominant_block(Index k, Rng& rng) {
  Matrix b = Matrix::Zero(k, k);
  for (Index i = 0; i < k; ++i)
    for (Index j = i + 1; j < k; ++j) b(i, j) = b(j, i) = rng.uniform(-0.2, 0.2);
  for (Index i = 0; i < k; ++i) b(i, i) = rng.uniform(1.0, 2.0) + b.row(i).cwiseAbs().sum();
  return b;
}

static Instance build_spatial(const InstanceSpec& s, Rng& rng) {
  const Index m = s.m;
  const Index n = s.n;
  const Index dim = m + n + m * n;
  Matrix mat = Matrix::Zero(dim, dim);
  mat.block(0, 0, m, m) = dominant_block(m, rng);
  mat.block(m, m, n, n) = dominant_block(n, rng);
  mat.block(m + n, m + n, m * n, m * n) = 0.5 * dominant_block(m * n, rng);
  Vector f0(dim);
  for (Index i = 0; i < m; ++i) f0(i) = rng.uniform(1.0, 2.0);
  for (Index j = 0; j < n; ++j) f0(m + j) = -rng.uniform(8.0, 12.0);
  for (Index k = 0; k < m * n; ++k) f0(m + n + k) = rng.uniform(0.5, 1.5);

  Polyhedron c = spatial_set(m, n, s.capacity);
  SmoothMap g;
  g.n = dim;
  g.m = dim + 1;
  g.value = [=](const Vector& x) -> Vector {
    Vector f = f0 + mat * x;
    Vector v(dim + 1);
    v(0) = f.dot(x);
    v.tail(dim) = -f;
    return v;
  };
  g.jacobian = [=](const Vector& x) -> Matrix {
    Matrix j(dim + 1, dim);
    j.row(0) = (f0 + 2.0 * mat * x).transpose();
    j.bottomRows(dim) = -mat;
    return j;
  };
  g.weighted_hessian = [=](const Vector&, const Vector& y) -> Matrix { return 2.0 * y(0) * mat; };

  Vector x0(dim);
  x0.head(m).setConstant(static_cast<double>(n));
  x0.segment(m, n).setConstant(static_cast<double>(m));
  x0.tail(m * n).setOnes();
  Polyhedron y = Polyhedron::product(Polyhedron::point(Vector::Ones(1)), c);
  Instance inst = make(s, c, std::move(g), PlqFunction(std::move(y), Matrix::Zero(dim + 1, dim + 1)), x0);
  inst.vi_matrix = mat;
  inst.vi_offset = f0;
  return inst;
}

Instance build(const InstanceSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  switch (spec.family) {
    case Family::Goal: return build_goal(spec, rng);
    case Family::NlpPenalty: return build_nlp(spec, rng);
    case Family::Cvar: return build_cvar(spec, rng);
    case Family::LassoTaper: return build_lasso(spec, rng);
    case Family::PhaseRetrieval: return build_phase(spec, rng);
    case Family::SpatialVI: return build_spatial(spec, rng);
  }
  throw std::invalid_argument("unknown family");
}

double cvar_ru_reference(const Instance& instance) {
  const InstanceSpec& s = instance.spec;
  if (s.family != Family::Cvar) throw std::invalid_argument("cvar_ru_reference needs a Cvar instance");
  const Polyhedron& x = instance.problem.X();
  const Index n = s.n;
  const Index m = s.m;
  const Index dim = n + 1 + m;
  Vector p = s.probabilities.size() ? s.probabilities : Vector::Constant(m, 1.0 / m);

  Matrix eq = Matrix::Zero(x.num_eq(), dim);
  eq.leftCols(n) = x.eq_matrix();
  const Index qx = x.num_ineq();
  Matrix in = Matrix::Zero(qx + 2 * m, dim);
  Vector rhs(qx + 2 * m);
  in.topLeftCorner(qx, n) = x.ineq_matrix();
  rhs.head(qx) = x.ineq_rhs();
  for (Index i = 0; i < m; ++i) {
    in.block(qx + i, 0, 1, n) = instance.slopes.row(i);
    in(qx + i, n) = -1.0;
    in(qx + i, n + 1 + i) = -1.0;
    rhs(qx + i) = -instance.offsets(i);
    in(qx + m + i, n + 1 + i) = -1.0;
    rhs(qx + m + i) = 0.0;
  }
  Vector c = Vector::Zero(dim);
  c(n) = 1.0;
  c.tail(m) = p / (1.0 - s.alpha);
  QpSolution sol = solve_qp(QpProblem(Matrix::Zero(dim, dim), c, Polyhedron(eq, x.eq_rhs(), in, rhs)));
  if (!sol.optimal())
    throw std::runtime_error(std::string("Rockafellar-Uryasev LP: ") + to_string(sol.status));
  return sol.objective;
}

static void require_vi(const Instance& instance) {
  if (instance.spec.family != Family::SpatialVI)
    throw std::invalid_argument("SpatialVI instance required");
}

double vi_merit(const Instance& instance, const Vector& x) {
  require_vi(instance);
  const Polyhedron& c = instance.problem.X();
  if (x.size() != c.dim() || !contains(c, x, kXTol)) throw std::invalid_argument("x is not in C");
  Vector f = instance.vi_offset + instance.vi_matrix * x;
  QpSolution sol = solve_qp(QpProblem(Matrix::Zero(c.dim(), c.dim()), f, c));
  if (!sol.optimal()) throw std::runtime_error("merit LP failed");
  return std::max(0.0, f.dot(x) - sol.objective);
}

Vector vi_kkt_solution(const Instance& instance) {
  require_vi(instance);
  QpSolution sol = solve_qp(QpProblem(instance.vi_matrix, instance.vi_offset, instance.problem.X()));
  if (!sol.optimal()) throw std::runtime_error("VI KKT QP failed");
  return sol.x;
}

CompositeProblem with_q(const CompositeProblem& p, const Matrix& q) {
  return CompositeProblem(p.X(), p.G(), PlqFunction(p.h().Y(), q));
}

}  // namespace plqcomp
