#pragma once

#include "plqcomp/polyhedron.hpp"

#include <optional>

namespace plqcomp {

/// Tolerances for the active-set QP kernel. Defaults are the ones the rest of
/// the library relies on.
struct QpOptions {
  double feasibility_tol = 1e-9;    ///< phase-1 objective / violation threshold
  double multiplier_tol = 1e-10;    ///< negative multiplier threshold (scaled by 1+|g|)
  double step_tol = 1e-12;          ///< zero-step threshold (scaled by 1+|x|)
  double curvature_tol = 1e-10;     ///< zero eigenvalue threshold of the reduced Hessian
  double flat_tol = 1e-12;          ///< zero-curvature reduced gradient treated as flat (scaled by 1+|g|)
  double ray_tol = 1e-12;           ///< unblocked zero-curvature gradient reported as unbounded (scaled by 1+|g|)
  int max_iterations = 0;           ///< 0 selects 100 (n + rows) + 1000
  int degenerate_switch = 3;        ///< consecutive zero steps before Bland's rule
  std::optional<Vector> initial_point;  ///< used as phase-2 start when feasible
};

/// min 1/2 <x, H x> + <c, x> over a polyhedron.
struct QpProblem {
  Matrix hessian;
  Vector linear;
  Polyhedron feasible;

  QpProblem(Matrix h, Vector c, Polyhedron p);
  Index dim() const { return linear.size(); }
  double objective(const Vector& x) const;
};

enum class QpStatus { Optimal, Infeasible, Unbounded, MaxIterations };

const char* to_string(QpStatus status);

struct QpSolution {
  QpStatus status = QpStatus::MaxIterations;
  Vector x;
  double objective = kInf;
  Vector eq_mult;    ///< H x + c + A_e^T eq_mult + D^T ineq_mult = 0
  Vector ineq_mult;  ///< nonnegative at optimality
  Vector ray;        ///< recession direction when Unbounded
  int iterations = 0;
  bool singular_hessian = false;  ///< zero curvature left at the optimum; optimum may be non-unique

  bool optimal() const { return status == QpStatus::Optimal; }
};

/// Primal active-set method with phase-1 LP, lowest-index tie-breaking and
/// Bland's rule after repeated degenerate steps.
QpSolution solve_qp(const QpProblem& qp, const QpOptions& options = {});

/// Euclidean projection onto a nonempty polyhedron.
Vector project(const Polyhedron& set, const Vector& x);

/// Enumerates every active-set candidate; bounded feasible sets with dim <= 6 only.
QpSolution brute_force_qp(const QpProblem& qp);

/// True iff the optimum returned for qp is the only one (LP certificate on the
/// cone of optimal directions).
bool solution_is_unique(const QpProblem& qp, const QpSolution& solution);

/// KKT residuals of a returned solution, for certification in tests.
struct KktReport {
  double primal_infeasibility = 0;
  double stationarity = 0;
  double complementarity = 0;
  double min_ineq_mult = 0;
};
KktReport kkt_report(const QpProblem& qp, const QpSolution& solution);

}  // namespace plqcomp
