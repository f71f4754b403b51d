#include "plqcomp/qp.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace plqcomp {

QpProblem::QpProblem(Matrix h, Vector c, Polyhedron p)
    : hessian(std::move(h)), linear(std::move(c)), feasible(std::move(p)) {
  const Index n = linear.size();
  if (n < 1 || hessian.rows() != n || hessian.cols() != n || feasible.dim() != n)
    throw std::invalid_argument("QpProblem: dimension mismatch");
  if (!hessian.allFinite() || !linear.allFinite())
    throw std::invalid_argument("QpProblem: NaN or infinite entry");
  if ((hessian - hessian.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("QpProblem: Hessian is not symmetric");
  if (!hessian.isZero(0.0)) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(hessian, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -1e-10 * std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff()))
      throw std::invalid_argument("QpProblem: Hessian is not positive semidefinite");
  }
}

double QpProblem::objective(const Vector& x) const {
  return 0.5 * x.dot(hessian * x) + linear.dot(x);
}

const char* to_string(QpStatus status) {
  switch (status) {
    case QpStatus::Optimal: return "optimal";
    case QpStatus::Infeasible: return "infeasible";
    case QpStatus::Unbounded: return "unbounded";
    case QpStatus::MaxIterations: return "max_iterations";
  }
  return "unknown";
}

namespace {

// Greedy selection of linearly independent rows, in index order.
std::vector<Index> independent_rows(const Matrix& rows, double tol = 1e-10) {
  std::vector<Index> keep;
  Matrix basis(0, rows.cols());
  for (Index i = 0; i < rows.rows(); ++i) {
    Matrix trial(basis.rows() + 1, rows.cols());
    trial << basis, rows.row(i);
    Eigen::ColPivHouseholderQR<Matrix> qr(trial.transpose());
    qr.setThreshold(tol);
    if (qr.rank() == trial.rows()) {
      basis = trial;
      keep.push_back(i);
    }
  }
  return keep;
}

struct CoreProblem {
  const Matrix& h;
  const Vector& c;
  Matrix eq;  // independent equality rows
  Vector eq_rhs;
  const Matrix& ineq;
  const Vector& ineq_rhs;
};

struct CoreResult {
  QpStatus status = QpStatus::MaxIterations;
  Vector x;
  Vector eq_mult;
  Vector ineq_mult;
  Vector ray;
  int iterations = 0;
  bool singular = false;
};

// True when some inequality outside the working set limits movement along step.
bool blocked(const CoreProblem& p, const std::vector<char>& in_working, const Vector& step) {
  const double step_norm = step.norm();
  for (Index i = 0; i < p.ineq.rows(); ++i) {
    if (in_working[static_cast<std::size_t>(i)]) continue;
    if (p.ineq.row(i).dot(step) > 1e-12 * p.ineq.row(i).norm() * step_norm) return true;
  }
  return false;
}

// Primal active-set iterations from a feasible start point.
CoreResult active_set(const CoreProblem& p, Vector x, std::vector<Index> working,
                      const QpOptions& opt, int max_iter) {
  const Index n = x.size();
  const Index ne = p.eq.rows();
  const Index q = p.ineq.rows();
  const double h_scale = std::max(1.0, p.h.cwiseAbs().maxCoeff());
  std::vector<char> in_working(static_cast<std::size_t>(q), 0);
  for (Index i : working) in_working[static_cast<std::size_t>(i)] = 1;

  CoreResult result;
  int zero_steps = 0;
  for (int iter = 0; iter < max_iter; ++iter) {
    result.iterations = iter + 1;
    const Index k = ne + static_cast<Index>(working.size());
    Matrix aw(k, n);
    if (ne > 0) aw.topRows(ne) = p.eq;
    for (std::size_t j = 0; j < working.size(); ++j)
      aw.row(ne + static_cast<Index>(j)) = p.ineq.row(working[j]);

    const Vector g = p.h * x + p.c;
    const double g_scale = 1.0 + g.norm();

    Matrix z;
    if (k == 0) {
      z = Matrix::Identity(n, n);
    } else {
      Eigen::ColPivHouseholderQR<Matrix> qr(aw.transpose());
      const Matrix qfull = qr.householderQ() * Matrix::Identity(n, n);
      z = qfull.rightCols(n - std::min<Index>(qr.rank(), n));
    }

    Vector step = Vector::Zero(n);
    bool is_ray = false;
    bool zero_curvature_left = false;
    if (z.cols() > 0) {
      const Matrix hr = z.transpose() * p.h * z;
      Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (hr + hr.transpose()));
      const Vector& lam = eig.eigenvalues();
      const Matrix& vecs = eig.eigenvectors();
      const Vector a = vecs.transpose() * (z.transpose() * g);
      Vector ray_coef = Vector::Zero(a.size());
      Vector newton_coef = Vector::Zero(a.size());
      bool ray_needed = false;
      for (Index i = 0; i < a.size(); ++i) {
        if (lam(i) <= opt.curvature_tol * h_scale) {
          zero_curvature_left = true;
          if (std::abs(a(i)) > opt.flat_tol * g_scale) ray_needed = true;
          ray_coef(i) = a(i);
        } else {
          newton_coef(i) = a(i) / lam(i);
        }
      }
      if (ray_needed) {
        step = -z * (vecs * ray_coef);
        is_ray = true;
        if (ray_coef.norm() <= opt.ray_tol * g_scale && !blocked(p, in_working, step)) {
          step = -z * (vecs * newton_coef);
          is_ray = false;
        }
      } else {
        step = -z * (vecs * newton_coef);
      }
    }

    if (!is_ray && step.norm() <= opt.step_tol * (1.0 + x.norm())) {
      // stationary on the working face: inspect multipliers
      Vector mult = Vector::Zero(k);
      if (k > 0) mult = aw.transpose().colPivHouseholderQr().solve(-g);
      Index drop = -1;
      const double threshold = -opt.multiplier_tol * g_scale;
      const bool bland = zero_steps >= opt.degenerate_switch;
      double most_negative = threshold;
      Index lowest = std::numeric_limits<Index>::max();
      for (std::size_t j = 0; j < working.size(); ++j) {
        const double m = mult(ne + static_cast<Index>(j));
        if (m >= threshold) continue;
        if (bland) {
          if (working[j] < lowest) {
            lowest = working[j];
            drop = static_cast<Index>(j);
          }
        } else if (m < most_negative ||
                   (m == most_negative && drop >= 0 && working[j] < working[static_cast<std::size_t>(drop)])) {
          most_negative = m;
          drop = static_cast<Index>(j);
        }
      }
      if (drop < 0) {
        result.status = QpStatus::Optimal;
        result.x = x;
        result.eq_mult = mult.head(ne);
        result.ineq_mult = Vector::Zero(q);
        for (std::size_t j = 0; j < working.size(); ++j)
          result.ineq_mult(working[j]) = std::max(0.0, mult(ne + static_cast<Index>(j)));
        result.singular = zero_curvature_left;
        return result;
      }
      in_working[static_cast<std::size_t>(working[static_cast<std::size_t>(drop)])] = 0;
      working.erase(working.begin() + drop);
      continue;
    }

    // ratio test, ties to the lowest index
    double alpha = is_ray ? kInf : 1.0;
    Index block = -1;
    const double step_norm = step.norm();
    for (Index i = 0; i < q; ++i) {
      if (in_working[static_cast<std::size_t>(i)]) continue;
      const double slope = p.ineq.row(i).dot(step);
      if (slope <= 1e-12 * p.ineq.row(i).norm() * step_norm) continue;
      const double ratio = std::max(0.0, (p.ineq_rhs(i) - p.ineq.row(i).dot(x)) / slope);
      if (ratio < alpha) {
        alpha = ratio;
        block = i;
      }
    }
    if (block < 0 && is_ray) {
      result.status = QpStatus::Unbounded;
      result.x = x;
      result.ray = step / step_norm;
      result.eq_mult = Vector::Zero(ne);
      result.ineq_mult = Vector::Zero(q);
      return result;
    }
    x += alpha * step;
    if (block >= 0) {
      working.push_back(block);
      in_working[static_cast<std::size_t>(block)] = 1;
      zero_steps = alpha * step_norm <= opt.step_tol * (1.0 + x.norm()) ? zero_steps + 1 : 0;
    } else {
      zero_steps = 0;
    }
  }
  result.status = QpStatus::MaxIterations;
  result.x = x;
  result.eq_mult = Vector::Zero(ne);
  result.ineq_mult = Vector::Zero(q);
  return result;
}

std::vector<Index> active_independent(const Matrix& eq, const Matrix& ineq, const Vector& rhs,
                                      const Vector& x, double tol) {
  std::vector<Index> working;
  Matrix basis = eq;
  for (Index i = 0; i < ineq.rows(); ++i) {
    if (rhs(i) - ineq.row(i).dot(x) > tol) continue;
    Matrix trial(basis.rows() + 1, ineq.cols());
    trial << basis, ineq.row(i);
    if (trial.rows() > ineq.cols()) break;
    Eigen::ColPivHouseholderQR<Matrix> qr(trial.transpose());
    qr.setThreshold(1e-10);
    if (qr.rank() == trial.rows()) {
      basis = trial;
      working.push_back(i);
    }
  }
  return working;
}

}  // namespace

QpSolution solve_qp(const QpProblem& qp, const QpOptions& options) {
  const Polyhedron& set = qp.feasible;
  const Index n = qp.dim();
  const Index ne = set.num_eq();
  const Index q = set.num_ineq();
  const int max_iter =
      options.max_iterations > 0 ? options.max_iterations : static_cast<int>(100 * (n + ne + q) + 1000);
  const double rhs_scale =
      1.0 + std::max(set.num_eq() > 0 ? set.eq_rhs().cwiseAbs().maxCoeff() : 0.0,
                     set.num_ineq() > 0 ? set.ineq_rhs().cwiseAbs().maxCoeff() : 0.0);
  const double feas_tol = options.feasibility_tol * rhs_scale;

  QpSolution out;
  Vector start = Vector::Zero(n);
  if (options.initial_point) {
    if (options.initial_point->size() != n) throw std::invalid_argument("solve_qp: initial point dimension mismatch");
    start = *options.initial_point;
  }
  int iterations = 0;

  if (max_violation(set, start) > feas_tol) {
    // phase 1: slack one equality per signed slack, one per violated inequality
    std::vector<Index> violated;
    const Vector ineq_slack = set.ineq_matrix() * start - set.ineq_rhs();
    for (Index i = 0; i < q; ++i)
      if (ineq_slack(i) > 0) violated.push_back(i);
    const Index nv = static_cast<Index>(violated.size());
    const Index n1 = n + ne + nv;
    Matrix eq1 = Matrix::Zero(ne, n1);
    Vector x1 = Vector::Zero(n1);
    x1.head(n) = start;
    const Vector eq_res = set.eq_matrix() * start - set.eq_rhs();
    for (Index j = 0; j < ne; ++j) {
      const double sigma = eq_res(j) >= 0 ? 1.0 : -1.0;
      eq1.row(j).head(n) = set.eq_matrix().row(j);
      eq1(j, n + j) = -sigma;
      x1(n + j) = std::abs(eq_res(j));
    }
    Matrix in1 = Matrix::Zero(q + ne + nv, n1);
    Vector rhs1 = Vector::Zero(q + ne + nv);
    in1.topLeftCorner(q, n) = set.ineq_matrix();
    rhs1.head(q) = set.ineq_rhs();
    for (Index k = 0; k < nv; ++k) {
      in1(violated[static_cast<std::size_t>(k)], n + ne + k) = -1.0;
      x1(n + ne + k) = ineq_slack(violated[static_cast<std::size_t>(k)]);
    }
    for (Index k = 0; k < ne + nv; ++k) in1(q + k, n + k) = -1.0;
    Vector c1 = Vector::Zero(n1);
    c1.tail(ne + nv).setOnes();
    const Matrix h1 = Matrix::Zero(n1, n1);
    CoreProblem phase1{h1, c1, eq1, set.eq_rhs(), in1, rhs1};
    const std::vector<Index> w1 = active_independent(eq1, in1, rhs1, x1, 0.0);
    QpOptions phase1_options = options;
    phase1_options.flat_tol = std::max(options.flat_tol, 1e-9);
    phase1_options.ray_tol = std::max(options.ray_tol, 1e-9);
    const CoreResult r1 = active_set(phase1, x1, w1, phase1_options, max_iter);
    iterations += r1.iterations;
    if (r1.status != QpStatus::Optimal) {
      out.status = QpStatus::MaxIterations;
      out.iterations = iterations;
      out.x = r1.x.head(n);
      return out;
    }
    if (c1.dot(r1.x) > feas_tol || max_violation(set, r1.x.head(n)) > 10 * feas_tol) {
      out.status = QpStatus::Infeasible;
      out.iterations = iterations;
      out.x = r1.x.head(n);
      return out;
    }
    start = r1.x.head(n);
  }

  const std::vector<Index> eq_keep = independent_rows(set.eq_matrix());
  Matrix eq(static_cast<Index>(eq_keep.size()), n);
  Vector eq_rhs(static_cast<Index>(eq_keep.size()));
  for (std::size_t j = 0; j < eq_keep.size(); ++j) {
    eq.row(static_cast<Index>(j)) = set.eq_matrix().row(eq_keep[j]);
    eq_rhs(static_cast<Index>(j)) = set.eq_rhs()(eq_keep[j]);
  }
  CoreProblem phase2{qp.hessian, qp.linear, eq, eq_rhs, set.ineq_matrix(), set.ineq_rhs()};
  const std::vector<Index> w2 =
      active_independent(eq, set.ineq_matrix(), set.ineq_rhs(), start, feas_tol);
  const CoreResult r2 = active_set(phase2, start, w2, options, max_iter);
  iterations += r2.iterations;

  out.status = r2.status;
  out.x = r2.x;
  out.iterations = iterations;
  out.singular_hessian = r2.singular;
  out.eq_mult = Vector::Zero(ne);
  for (std::size_t j = 0; j < eq_keep.size(); ++j) out.eq_mult(eq_keep[j]) = r2.eq_mult(static_cast<Index>(j));
  out.ineq_mult = r2.ineq_mult;
  out.ray = r2.ray;
  if (out.status == QpStatus::Optimal) out.objective = qp.objective(out.x);
  else if (out.status == QpStatus::Unbounded) out.objective = -kInf;
  return out;
}

Vector project(const Polyhedron& set, const Vector& x) {
  if (x.size() != set.dim()) throw std::invalid_argument("project: dimension mismatch");
  if (contains(set, x)) return x;
  QpOptions options;
  options.initial_point = x;
  const QpSolution sol =
      solve_qp(QpProblem(Matrix::Identity(x.size(), x.size()), -x, set), options);
  if (sol.status == QpStatus::Infeasible) throw std::invalid_argument("project: empty polyhedron");
  if (!sol.optimal()) throw std::runtime_error("project: projection QP failed");
  return sol.x;
}

QpSolution brute_force_qp(const QpProblem& qp) {
  const Index n = qp.dim();
  if (n > 6) throw std::invalid_argument("brute_force_qp: dimension above 6");
  const Polyhedron& set = qp.feasible;
  const Index ne = set.num_eq();
  const Index q = set.num_ineq();
  if (q > 24) throw std::invalid_argument("brute_force_qp: too many inequality rows");
  Index eq_rank = 0;
  if (ne > 0) {
    Eigen::FullPivLU<Matrix> lu(set.eq_matrix());
    lu.setThreshold(1e-10);
    eq_rank = lu.rank();
  }
  const Index max_size = std::min(q, n - eq_rank);

  QpSolution best;
  best.status = QpStatus::Infeasible;
  int candidates = 0;
  std::vector<Index> subset;
  // iterate all subsets of size <= max_size in lexicographic order by size
  for (Index size = 0; size <= max_size; ++size) {
    std::vector<int> pick(static_cast<std::size_t>(q), 0);
    std::fill(pick.end() - size, pick.end(), 1);
    do {
      subset.clear();
      for (Index i = 0; i < q; ++i)
        if (pick[static_cast<std::size_t>(i)]) subset.push_back(i);
      const Index k = ne + size;
      Matrix aw(k, n);
      Vector bw(k);
      if (ne > 0) {
        aw.topRows(ne) = set.eq_matrix();
        bw.head(ne) = set.eq_rhs();
      }
      for (Index j = 0; j < size; ++j) {
        aw.row(ne + j) = set.ineq_matrix().row(subset[static_cast<std::size_t>(j)]);
        bw(ne + j) = set.ineq_rhs()(subset[static_cast<std::size_t>(j)]);
      }
      if (size > 0) {
        Eigen::FullPivLU<Matrix> lu(aw);
        lu.setThreshold(1e-10);
        if (lu.rank() != eq_rank + size) continue;
      }
      Matrix kkt = Matrix::Zero(n + k, n + k);
      kkt.topLeftCorner(n, n) = qp.hessian;
      kkt.topRightCorner(n, k) = aw.transpose();
      kkt.bottomLeftCorner(k, n) = aw;
      Vector rhs(n + k);
      rhs << -qp.linear, bw;
      Eigen::CompleteOrthogonalDecomposition<Matrix> cod(kkt);
      cod.setThreshold(1e-11);
      const Vector sol = cod.solve(rhs);
      if ((kkt * sol - rhs).norm() > 1e-8 * (1.0 + rhs.norm())) continue;
      const Vector x = sol.head(n);
      if (max_violation(set, x) > 1e-9 * (1.0 + x.cwiseAbs().maxCoeff())) continue;
      ++candidates;
      const double value = qp.objective(x);
      if (best.status != QpStatus::Optimal || value < best.objective) {
        best.status = QpStatus::Optimal;
        best.objective = value;
        best.x = x;
        best.eq_mult = sol.segment(n, ne);
        best.ineq_mult = Vector::Zero(q);
        for (Index j = 0; j < size; ++j)
          best.ineq_mult(subset[static_cast<std::size_t>(j)]) = sol(n + ne + j);
      }
    } while (std::next_permutation(pick.begin(), pick.end()));
  }
  best.iterations = candidates;
  return best;
}

bool solution_is_unique(const QpProblem& qp, const QpSolution& solution) {
  if (!solution.optimal()) return false;
  const Index n = qp.dim();
  const Polyhedron& set = qp.feasible;
  const Vector g = qp.hessian * solution.x + qp.linear;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(qp.hessian);
  const double scale = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
  std::vector<Index> curved;
  for (Index i = 0; i < n; ++i)
    if (eig.eigenvalues()(i) > 1e-10 * scale) curved.push_back(i);
  Matrix eq(static_cast<Index>(curved.size()) + 1 + set.num_eq(), n);
  for (std::size_t j = 0; j < curved.size(); ++j)
    eq.row(static_cast<Index>(j)) = eig.eigenvectors().col(curved[j]).transpose();
  eq.row(static_cast<Index>(curved.size())) = g.transpose();
  eq.bottomRows(set.num_eq()) = set.eq_matrix();
  const ConeDescription active = normal_cone(set, solution.x, kActiveTol);
  const Polyhedron cone(eq, Vector::Zero(eq.rows()), active.gen_rows,
                        Vector::Zero(active.gen_rows.rows()));
  return cone_is_trivial(cone);
}

KktReport kkt_report(const QpProblem& qp, const QpSolution& solution) {
  KktReport report;
  if (!solution.optimal()) {
    report.primal_infeasibility = kInf;
    report.stationarity = kInf;
    report.complementarity = kInf;
    return report;
  }
  const Polyhedron& set = qp.feasible;
  const Vector& x = solution.x;
  report.primal_infeasibility = max_violation(set, x);
  Vector r = qp.hessian * x + qp.linear;
  if (set.num_eq() > 0) r += set.eq_matrix().transpose() * solution.eq_mult;
  if (set.num_ineq() > 0) r += set.ineq_matrix().transpose() * solution.ineq_mult;
  report.stationarity = r.norm();
  if (set.num_ineq() > 0) {
    const Vector slack = set.ineq_matrix() * x - set.ineq_rhs();
    report.complementarity = slack.cwiseProduct(solution.ineq_mult).cwiseAbs().maxCoeff();
    report.min_ineq_mult = solution.ineq_mult.minCoeff();
  }
  return report;
}

}  // namespace plqcomp
