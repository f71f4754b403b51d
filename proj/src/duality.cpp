#include "plqcomp/duality.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

namespace plqcomp {

namespace {

constexpr double kDivergence = -1e6;

SmoothMap shifted(const SmoothMap& g, const Vector& shift) {
  SmoothMap out = g;
  out.value = [value = g.value, shift](const Vector& x) -> Vector { return value(x) + shift; };
  if (g.affine) out.affine = AffineData{g.affine->A, g.affine->b + shift};
  return out;
}

// One Gauss-Newton projection sequence onto {x in X | G(x) in dom h}.
std::optional<Vector> restore(const CompositeProblem& q, Vector x) {
  const Polyhedron& y = q.h().Y();
  const Matrix& qm = q.h().Q();
  const Index n = q.n();
  const Index m = q.m();
  const Index na = y.num_eq();
  const Index nb = qm.isZero(0.0) ? 0 : m;
  const Index nc = y.num_ineq();
  const Index total = n + na + nb + nc;
  for (int it = 0; it < 60; ++it) {
    const Vector z = q.G()(x);
    if (in_domain(q.h(), z)) return x;
    const Matrix jac = q.G().jacobian_at(x);
    Matrix hess = Matrix::Zero(total, total);
    hess.topLeftCorner(n, n).setIdentity();
    Matrix eq = Matrix::Zero(m + q.X().num_eq(), total);
    Vector eq_rhs(m + q.X().num_eq());
    eq.topLeftCorner(m, n) = jac;
    if (na > 0) eq.block(0, n, m, na) = -y.eq_matrix().transpose();
    if (nb > 0) eq.block(0, n + na, m, nb) = -qm;
    if (nc > 0) eq.block(0, n + na + nb, m, nc) = -y.ineq_matrix().transpose();
    eq_rhs.head(m) = jac * x - z;
    eq.bottomLeftCorner(q.X().num_eq(), n) = q.X().eq_matrix();
    eq_rhs.tail(q.X().num_eq()) = q.X().eq_rhs();
    Matrix ineq = Matrix::Zero(q.X().num_ineq() + nc, total);
    Vector ineq_rhs = Vector::Zero(q.X().num_ineq() + nc);
    ineq.topLeftCorner(q.X().num_ineq(), n) = q.X().ineq_matrix();
    ineq_rhs.head(q.X().num_ineq()) = q.X().ineq_rhs();
    ineq.bottomRightCorner(nc, nc) = -Matrix::Identity(nc, nc);
    Vector lin = Vector::Zero(total);
    lin.head(n) = -x;
    const QpSolution sol = solve_qp(QpProblem(hess, lin, Polyhedron(eq, eq_rhs, ineq, ineq_rhs)));
    if (!sol.optimal()) return std::nullopt;
    if ((sol.x.head(n) - x).norm() == 0.0) return std::nullopt;
    x = sol.x.head(n);
  }
  return in_domain(q.h(), q.G()(x)) ? std::optional<Vector>(x) : std::nullopt;
}

std::vector<Vector> tensor_grid(const Vector& lower, const Vector& upper, int points) {
  const Index n = lower.size();
  std::vector<Vector> out;
  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  while (true) {
    Vector x(n);
    for (Index i = 0; i < n; ++i)
      x(i) = lower(i) + (upper(i) - lower(i)) * idx[static_cast<std::size_t>(i)] / (points - 1);
    out.push_back(x);
    Index k = 0;
    while (k < n && ++idx[static_cast<std::size_t>(k)] == points) idx[static_cast<std::size_t>(k++)] = 0;
    if (k == n) break;
  }
  return out;
}

// inf over X of h(G(x)) + offset, by grid, restoration and polish.
DualPoint minimize_composite(const CompositeProblem& q, double offset, const GridSpec& grid) {
  grid.validate(q.n());
  DualPoint out;
  const bool bounded = is_bounded(q.X());
  const int levels = bounded ? 1 : grid.expansions + 1;
  const Vector center = 0.5 * (grid.lower + grid.upper);
  const Vector half = 0.5 * (grid.upper - grid.lower);

  std::vector<std::pair<double, Vector>> finite;
  double best = kInf;
  for (int level = 0; level < levels; ++level) {
    const Vector h = half * std::pow(grid.expand_factor, level);
    std::vector<Vector> infinite;
    for (Vector x : tensor_grid(center - h, center + h, grid.points_per_dim)) {
      if (!contains(q.X(), x, 1e-12)) {
        if (q.X().num_eq() == 0) continue;
        x = project(q.X(), x);
      }
      const ExtendedReal v = phi(q, x);
      if (v.is_finite()) finite.emplace_back(v.value(), x);
      else infinite.push_back(std::move(x));
    }
    const std::size_t cap = 400;
    const std::size_t stride = std::max<std::size_t>(1, infinite.size() / cap);
    for (std::size_t i = 0; i < infinite.size(); i += stride) {
      const auto r = restore(q, infinite[i]);
      if (!r) continue;
      const ExtendedReal v = phi(q, *r);
      if (v.is_finite()) finite.emplace_back(v.value(), *r);
    }
    for (const auto& [v, x] : finite) best = std::min(best, v);
    if (best + offset < kDivergence) break;
  }
  if (finite.empty()) {
    out.value = ExtendedReal::plus_infinity();
    return out;
  }
  std::stable_sort(finite.begin(), finite.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  Vector best_x = finite.front().second;
  best = finite.front().first;
  if (best + offset < kDivergence) {
    out.value = ExtendedReal::minus_infinity();
    out.certified_unbounded = true;
    out.attained_x = best_x;
    return out;
  }
  if (grid.polish) {
    ProxParams params;
    params.max_iter = 300;
    params.stop_tol = 1e-12;
    std::vector<Vector> starts;
    for (const auto& [v, x] : finite) {
      if (static_cast<int>(starts.size()) >= grid.polish_starts) break;
      const bool seen = std::any_of(starts.begin(), starts.end(),
                                    [&](const Vector& s) { return (s - x).norm() < 1e-9; });
      if (!seen) starts.push_back(x);
    }
    for (const Vector& s : starts) {
      const SolveTrace t = prox_solve(q, params, s);
      if (std::isfinite(t.phi) && t.phi < best) {
        best = t.phi;
        best_x = t.x;
      }
    }
  }
  if (best + offset < kDivergence) {
    out.value = ExtendedReal::minus_infinity();
    out.certified_unbounded = true;
  } else {
    out.value = ExtendedReal::finite(best + offset);
  }
  out.attained_x = best_x;
  return out;
}

}  // namespace

void GridSpec::validate(Index n) const {
  if (n > 3) throw std::invalid_argument("GridSpec: sampled minimization supports n <= 3");
  if (lower.size() != n || upper.size() != n) throw std::invalid_argument("GridSpec: bound dimension mismatch");
  if (points_per_dim < 2) throw std::invalid_argument("GridSpec: empty grid");
  if (!((upper - lower).minCoeff() > 0)) throw std::invalid_argument("GridSpec: lower must be below upper");
  if (expansions < 0 || !(expand_factor > 1)) throw std::invalid_argument("GridSpec: invalid expansion");
}

ExtendedReal lagrangian(const CompositeProblem& p, const Vector& x, const Vector& y) {
  if (x.size() != p.n() || y.size() != p.m()) throw std::invalid_argument("lagrangian: dimension mismatch");
  if (!contains(p.X(), x, kXTol)) return ExtendedReal::plus_infinity();
  if (!contains(p.h().Y(), y, 1e-9)) return ExtendedReal::minus_infinity();
  return ExtendedReal::finite(p.G()(x).dot(y) - 0.5 * y.dot(p.h().Q() * y));
}

ExtendedReal support_function(const Polyhedron& x_set, const Vector& v) {
  const Index n = x_set.dim();
  const QpSolution sol = solve_qp(QpProblem(Matrix::Zero(n, n), -v, x_set));
  if (sol.status == QpStatus::Unbounded) return ExtendedReal::plus_infinity();
  if (sol.status == QpStatus::Infeasible) return ExtendedReal::minus_infinity();
  if (!sol.optimal()) throw std::runtime_error("support_function: LP failed");
  return ExtendedReal::finite(-sol.objective);
}

ExtendedReal dual_affine(const CompositeProblem& p, const Vector& y) {
  if (!p.G().affine) throw std::invalid_argument("dual_affine: G is not registered as affine");
  if (y.size() != p.m()) throw std::invalid_argument("dual_affine: dimension mismatch");
  if (!contains(p.h().Y(), y, 1e-9)) return ExtendedReal::minus_infinity();
  const AffineData& a = *p.G().affine;
  const ExtendedReal sup = support_function(p.X(), a.A.transpose() * y);
  if (sup.is_plus_infinity()) return ExtendedReal::minus_infinity();
  if (sup.is_minus_infinity()) return ExtendedReal::plus_infinity();
  return ExtendedReal::finite(a.b.dot(y) - 0.5 * y.dot(p.h().Q() * y) - sup.value());
}

DualMaximum dual_affine_max(const CompositeProblem& p) {
  if (!p.G().affine) throw std::invalid_argument("dual_affine_max: G is not registered as affine");
  const AffineData& a = *p.G().affine;
  const Polyhedron& xs = p.X();
  const Polyhedron& ys = p.h().Y();
  const Index m = p.m();
  const Index n = p.n();
  const Index ne = xs.num_eq();
  const Index nq = xs.num_ineq();
  const Index total = m + ne + nq;
  Matrix hess = Matrix::Zero(total, total);
  hess.topLeftCorner(m, m) = p.h().Q();
  Vector lin(total);
  lin << -a.b, xs.eq_rhs(), xs.ineq_rhs();
  Matrix eq = Matrix::Zero(n + ys.num_eq(), total);
  eq.topLeftCorner(n, m) = a.A.transpose();
  if (ne > 0) eq.block(0, m, n, ne) = -xs.eq_matrix().transpose();
  if (nq > 0) eq.block(0, m + ne, n, nq) = -xs.ineq_matrix().transpose();
  eq.bottomLeftCorner(ys.num_eq(), m) = ys.eq_matrix();
  Vector eq_rhs = Vector::Zero(n + ys.num_eq());
  eq_rhs.tail(ys.num_eq()) = ys.eq_rhs();
  Matrix ineq = Matrix::Zero(ys.num_ineq() + nq, total);
  Vector ineq_rhs = Vector::Zero(ys.num_ineq() + nq);
  ineq.topLeftCorner(ys.num_ineq(), m) = ys.ineq_matrix();
  ineq_rhs.head(ys.num_ineq()) = ys.ineq_rhs();
  ineq.bottomRightCorner(nq, nq) = -Matrix::Identity(nq, nq);
  const QpSolution sol = solve_qp(QpProblem(hess, lin, Polyhedron(eq, eq_rhs, ineq, ineq_rhs)));
  DualMaximum out;
  out.status = sol.status;
  if (sol.optimal()) {
    out.value = -sol.objective;
    out.y = sol.x.head(m);
  } else if (sol.status == QpStatus::Unbounded) {
    out.value = kInf;
  }
  return out;
}

DualPoint sampled_infimum(const CompositeProblem& p, const GridSpec& grid) {
  return minimize_composite(p, 0.0, grid);
}

DualPoint dual_sampled(const CompositeProblem& p, const Vector& y, const GridSpec& grid) {
  if (y.size() != p.m()) throw std::invalid_argument("dual_sampled: dimension mismatch");
  DualPoint out;
  out.y = y;
  if (!contains(p.h().Y(), y, 1e-9)) {
    out.value = ExtendedReal::minus_infinity();
    out.upper_estimate = false;
    return out;
  }
  const CompositeProblem inner(p.X(), p.G(), PlqFunction(Polyhedron::point(y), Matrix::Zero(p.m(), p.m())));
  DualPoint r = minimize_composite(inner, -0.5 * y.dot(p.h().Q() * y), grid);
  r.y = y;
  return r;
}

AugValue aug_lagrangian(const CompositeProblem& p, const Vector& x, const Vector& y, double theta) {
  if (!(theta > 0)) throw std::invalid_argument("aug_lagrangian: theta must be positive");
  if (x.size() != p.n() || y.size() != p.m()) throw std::invalid_argument("aug_lagrangian: dimension mismatch");
  const Index m = p.m();
  const Vector g = p.G()(x);
  const QpSolution sol = solve_qp(
      QpProblem(p.h().Q() + Matrix::Identity(m, m) / theta, -g - y / theta, p.h().Y()));
  if (!sol.optimal()) throw std::runtime_error("aug_lagrangian: inner QP failed");
  AugValue out;
  out.w_hat = sol.x;
  out.grad_y = (sol.x - y) / theta;
  if (contains(p.X(), x, kXTol))
    out.value = ExtendedReal::finite(-(sol.objective + y.squaredNorm() / (2.0 * theta)));
  return out;
}

DualPoint aug_dual_sampled(const CompositeProblem& p, const Vector& y, double theta, const GridSpec& grid) {
  if (!(theta > 0)) throw std::invalid_argument("aug_dual_sampled: theta must be positive");
  if (y.size() != p.m()) throw std::invalid_argument("aug_dual_sampled: dimension mismatch");
  const Index m = p.m();
  const CompositeProblem inner(p.X(), shifted(p.G(), y / theta),
                               PlqFunction(p.h().Y(), p.h().Q() + Matrix::Identity(m, m) / theta));
  DualPoint r = minimize_composite(inner, -y.squaredNorm() / (2.0 * theta), grid);
  r.y = y;
  return r;
}

DualPoint perturbed_infimum(const CompositeProblem& p, const Rockafellian& rock, const Vector& u,
                            const GridSpec& grid) {
  if (u.size() != p.m()) throw std::invalid_argument("perturbed_infimum: dimension mismatch");
  if (rock.augmented && !(rock.theta > 0)) throw std::invalid_argument("perturbed_infimum: theta must be positive");
  const CompositeProblem inner(p.X(), shifted(p.G(), u), p.h());
  const double offset = rock.augmented ? 0.5 * rock.theta * u.squaredNorm() : 0.0;
  return minimize_composite(inner, offset, grid);
}

ExactnessReport exactness_check(const CompositeProblem& p, const Rockafellian& rock, const Vector& ybar,
                                const std::vector<Vector>& u_samples, double inf_phi, const GridSpec& grid,
                                double tol) {
  ExactnessReport report;
  report.holds = true;
  double theta_bar = 0.0;
  bool theta_bar_valid = true;
  for (std::size_t k = 0; k < u_samples.size(); ++k) {
    const Vector& u = u_samples[k];
    ExactnessRow row;
    row.u = u;
    row.lhs = perturbed_infimum(p, rock, u, grid).value.to_double();
    row.rhs = inf_phi + ybar.dot(u);
    row.margin = row.lhs - row.rhs;
    row.ok = row.margin >= -tol * (1.0 + std::abs(row.rhs));
    if (!row.ok) {
      report.holds = false;
      report.violated.push_back(k);
    }
    if (u.cwiseAbs().maxCoeff() <= 0.5 && u.squaredNorm() > 0) {
      const double plain = rock.augmented ? row.lhs - 0.5 * rock.theta * u.squaredNorm() : row.lhs;
      if (!std::isfinite(plain) && plain < 0) theta_bar_valid = false;
      else if (std::isfinite(plain))
        theta_bar = std::max(theta_bar, 2.0 * (row.rhs - plain) / u.squaredNorm());
    }
    report.rows.push_back(std::move(row));
  }
  if (theta_bar_valid) report.local_theta_bar = theta_bar;
  return report;
}

std::string exactness_csv(const ExactnessReport& report) {
  std::ostringstream out;
  out << std::setprecision(17) << "u,lhs,rhs,margin\n";
  for (const ExactnessRow& r : report.rows) {
    for (Index i = 0; i < r.u.size(); ++i) out << (i ? ";" : "") << r.u(i);
    out << ',' << r.lhs << ',' << r.rhs << ',' << r.margin << '\n';
  }
  return out.str();
}

void AugParams::validate() const {
  if (!(theta > 0)) throw std::invalid_argument("AugParams: theta must be positive");
  if (lambda_step && !(*lambda_step > 0)) throw std::invalid_argument("AugParams: lambda_step must be positive");
  if (outer_iters < 1 || inner_max_iter < 1) throw std::invalid_argument("AugParams: invalid iteration limits");
}

AlmTrace alm_solve(const CompositeProblem& p, const AugParams& params, const Vector& x0, const Vector& y0) {
  params.validate();
  if (x0.size() != p.n() || y0.size() != p.m()) throw std::invalid_argument("alm_solve: dimension mismatch");
  const double theta = params.theta;
  const double step = params.lambda_step.value_or(theta);
  Vector x = contains(p.X(), x0) ? x0 : project(p.X(), x0);
  Vector y = y0;
  AlmTrace trace;
  double s = 1.0;
  for (int outer = 1; outer <= params.outer_iters; ++outer) {
    AugValue a = aug_lagrangian(p, x, y, theta);
    int inner = 0;
    for (; inner < params.inner_max_iter; ++inner) {
      const Vector grad = p.G().jacobian_at(x).transpose() * a.w_hat;
      if ((x - project(p.X(), x - grad)).norm() <= params.inner_tol) break;
      const double f = a.value.value();
      s = std::min(2.0 * s, 1e6);
      bool moved = false;
      while (s > 1e-14) {
        const Vector xn = project(p.X(), x - s * grad);
        const AugValue an = aug_lagrangian(p, xn, y, theta);
        const Vector d = xn - x;
        if (an.value.value() <= f + grad.dot(d) + d.squaredNorm() / (2.0 * s)) {
          moved = d.norm() > 0;
          x = xn;
          a = an;
          break;
        }
        s /= 2.0;
      }
      if (!moved) break;
    }
    const Vector z = p.G()(x) - (a.w_hat - y) / theta;
    AlmRecord rec;
    rec.outer = outer;
    rec.x = x;
    rec.y = y;
    rec.w_hat = a.w_hat;
    rec.inner_iterations = inner;
    trace.final_triple = stationarity_residual(p, x, a.w_hat, z);
    rec.residual = trace.final_triple.residual;
    trace.records.push_back(rec);
    if (rec.residual <= params.tol) {
      trace.converged = true;
      break;
    }
    y = y + (step / theta) * (a.w_hat - y);
  }
  return trace;
}

}  // namespace plqcomp
