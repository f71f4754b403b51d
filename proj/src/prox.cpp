#include "plqcomp/prox.hpp"

#include <iomanip>
#include <sstream>

namespace plqcomp {

void ProxParams::validate() const {
  if (!(tau > 1.0)) throw std::invalid_argument("ProxParams: tau must exceed 1");
  if (!(sigma > 0.0 && sigma < 1.0)) throw std::invalid_argument("ProxParams: sigma must lie in (0,1)");
  if (!(lambda_max > 0.0)) throw std::invalid_argument("ProxParams: lambda_max must be positive");
  if (!(lambda0 > 0.0 && lambda0 <= lambda_max))
    throw std::invalid_argument("ProxParams: lambda0 must lie in (0, lambda_max]");
  if (!(stop_tol > 0.0)) throw std::invalid_argument("ProxParams: stop_tol must be positive");
  if (max_iter < 1 || max_backtracks < 0) throw std::invalid_argument("ProxParams: invalid iteration limits");
  if (residual_tol && !(*residual_tol > 0.0)) throw std::invalid_argument("ProxParams: residual_tol must be positive");
}

const char* to_string(Termination t) {
  switch (t) {
    case Termination::StepConverged: return "step_converged";
    case Termination::ResidualConverged: return "residual_converged";
    case Termination::MaxIterations: return "max_iterations";
    case Termination::BacktrackLimit: return "backtrack_limit";
    case Termination::SubproblemFailure: return "subproblem_failure";
  }
  return "unknown";
}

std::optional<ProxStep> prox_subproblem(const CompositeProblem& p, const Vector& xnu, double lambda,
                                        const std::optional<Vector>& warm_start) {
  if (!(lambda > 0)) throw std::invalid_argument("prox_subproblem: lambda must be positive");
  const DualForm form = dual_form(p.h());
  const Polyhedron& xs = p.X();
  const Index n = p.n();
  const Index m = p.m();
  const Index nv = form.A.cols();
  const bool quadratic = !form.D.isZero(0.0);
  const Index nw = quadratic ? m : 0;
  const Index total = n + nv + nw;

  const Vector gx = p.G()(xnu);
  const Matrix jac = p.G().jacobian_at(xnu);

  Matrix hess = Matrix::Zero(total, total);
  hess.topLeftCorner(n, n) = Matrix::Identity(n, n) / lambda;
  if (quadratic) hess.bottomRightCorner(nw, nw) = form.J;
  Vector lin = Vector::Zero(total);
  lin.head(n) = -xnu / lambda;
  lin.segment(n, nv) = form.b;

  Matrix eq = Matrix::Zero(m + xs.num_eq(), total);
  Vector eq_rhs(m + xs.num_eq());
  eq.topLeftCorner(m, n) = -jac;
  eq.block(0, n, m, nv) = form.A;
  if (quadratic) eq.block(0, n + nv, m, nw) = form.D;
  eq_rhs.head(m) = gx - jac * xnu;
  eq.bottomLeftCorner(xs.num_eq(), n) = xs.eq_matrix();
  eq_rhs.tail(xs.num_eq()) = xs.eq_rhs();

  Matrix ineq = Matrix::Zero(xs.num_ineq() + nv, total);
  Vector ineq_rhs = Vector::Zero(xs.num_ineq() + nv);
  ineq.topLeftCorner(xs.num_ineq(), n) = xs.ineq_matrix();
  ineq_rhs.head(xs.num_ineq()) = xs.ineq_rhs();
  ineq.block(xs.num_ineq(), n, nv, nv) = -Matrix::Identity(nv, nv);

  QpOptions options;
  if (warm_start && warm_start->size() == total) options.initial_point = warm_start;
  const QpSolution sol =
      solve_qp(QpProblem(hess, lin, Polyhedron(eq, eq_rhs, ineq, ineq_rhs)), options);
  if (!sol.optimal()) return std::nullopt;

  ProxStep step;
  step.x = sol.x.head(n);
  step.y = -sol.eq_mult.head(m);
  step.z = gx + jac * (step.x - xnu);
  step.qp_solution = sol.x;
  return step;
}

namespace {

double h_value(const CompositeProblem& p, const Vector& z) { return evaluate(p.h(), z).to_double(); }

StationarityTriple best_triple(const CompositeProblem& p, const Vector& x, const ProxStep* step) {
  StationarityTriple best;
  best.residual = kInf;
  if (step) best = stationarity_residual(p, x, step->y, step->z);
  if (phi(p, x).is_finite()) {
    const Multipliers mult = multiplier_recovery(p, x);
    StationarityTriple recovered = stationarity_residual(p, x, mult.y, mult.z);
    if (recovered.residual < best.residual) best = std::move(recovered);
  }
  if (!step && !std::isfinite(best.residual) && best.x.size() == 0) {
    best.x = x;
    best.y = Vector::Zero(p.m());
    best.z = p.G()(x);
  }
  return best;
}

}  // namespace

SolveTrace prox_solve(const CompositeProblem& p, const ProxParams& params, const Vector& x0) {
  params.validate();
  if (x0.size() != p.n()) throw std::invalid_argument("prox_solve: x0 dimension mismatch");
  Vector x = contains(p.X(), x0) ? x0 : project(p.X(), x0);
  if (!phi(p, x).is_finite()) throw std::invalid_argument("prox_solve: phi(x0) is not finite");

  SolveTrace trace;
  double lambda = params.lambda0;
  double hx = h_value(p, p.G()(x));
  std::optional<ProxStep> last;

  if (params.residual_tol) {
    const StationarityTriple start = best_triple(p, x, nullptr);
    if (start.residual <= *params.residual_tol) {
      trace.termination = Termination::ResidualConverged;
      trace.x = x;
      trace.phi = hx;
      trace.final_triple = start;
      return trace;
    }
  }

  auto finish = [&](Termination reason, const Vector& final_x, const ProxStep* step) {
    trace.termination = reason;
    trace.x = final_x;
    trace.phi = phi(p, final_x).to_double();
    trace.final_triple = best_triple(p, final_x, step);
    return trace;
  };

  std::optional<Vector> warm;
  for (int iter = 1; iter <= params.max_iter; ++iter) {
    int backtracks = 0;
    while (true) {
      std::optional<ProxStep> step = prox_subproblem(p, x, lambda, warm);
      if (!step) return finish(Termination::SubproblemFailure, x, last ? &*last : nullptr);
      const double step_norm = (step->x - x).norm();
      if (step_norm <= params.stop_tol) return finish(Termination::StepConverged, step->x, &*step);
      const double h_bar = h_value(p, p.G()(step->x));
      const double h_model = h_value(p, step->z);
      const double actual = hx - h_bar;
      const double model = hx - h_model;
      if (actual >= params.sigma * model) {
        IterationRecord rec;
        rec.iter = iter;
        rec.x = step->x;
        rec.lambda = lambda;
        rec.phi = h_bar;
        rec.model_decrease = model;
        rec.actual_decrease = actual;
        rec.step_norm = step_norm;
        rec.residual = stationarity_residual(p, step->x, step->y, step->z).residual;
        rec.backtracks = backtracks;
        trace.iterations.push_back(rec);
        trace.total_backtracks += backtracks;
        x = step->x;
        hx = h_bar;
        lambda = std::min(params.tau * lambda, params.lambda_max);
        warm.reset();
        last = std::move(step);
        if (params.residual_tol && rec.residual <= *params.residual_tol)
          return finish(Termination::ResidualConverged, x, &*last);
        break;
      }
      lambda /= params.tau;
      ++backtracks;
      warm = step->qp_solution;
      if (backtracks > params.max_backtracks) {
        trace.total_backtracks += backtracks;
        return finish(Termination::BacktrackLimit, x, last ? &*last : nullptr);
      }
    }
  }
  return finish(Termination::MaxIterations, x, last ? &*last : nullptr);
}

std::string trace_csv(const SolveTrace& trace) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "iter,phi,lambda,step_norm,residual,backtracks\n";
  for (const IterationRecord& r : trace.iterations)
    out << r.iter << ',' << r.phi << ',' << r.lambda << ',' << r.step_norm << ',' << r.residual << ','
        << r.backtracks << '\n';
  return out.str();
}

void ApproxSchedule::validate() const {
  if (nu.empty()) throw std::invalid_argument("ApproxSchedule: empty schedule");
  if (eps.size() != nu.size()) throw std::invalid_argument("ApproxSchedule: nu and eps lengths differ");
  if (kind == ScheduleKind::ExactPenalty && theta.size() != nu.size())
    throw std::invalid_argument("ApproxSchedule: theta length differs");
  if (!theta.empty() && theta.size() != nu.size())
    throw std::invalid_argument("ApproxSchedule: theta length differs");
  for (std::size_t k = 0; k < nu.size(); ++k) {
    if (nu[k] < 1 || !(eps[k] > 0)) throw std::invalid_argument("ApproxSchedule: nu >= 1 and eps > 0 required");
    if (k > 0 && nu[k] <= nu[k - 1]) throw std::invalid_argument("ApproxSchedule: nu must increase");
    if (k > 0 && eps[k] >= eps[k - 1]) throw std::invalid_argument("ApproxSchedule: eps must strictly decrease");
    if (!theta.empty() && (!(theta[k] > 0) || (k > 0 && theta[k] <= theta[k - 1])))
      throw std::invalid_argument("ApproxSchedule: theta must be positive and strictly increasing");
  }
}

std::vector<StageResult> consistent_solve(const ProblemFamily& family, const ApproxSchedule& schedule,
                                          const Vector& x0, const ProxParams& params) {
  schedule.validate();
  std::vector<StageResult> stages;
  Vector x = x0;
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    const CompositeProblem problem = family(k);
    ProxParams stage_params = params;
    stage_params.residual_tol = schedule.eps[k];
    StageResult stage;
    stage.nu = schedule.nu[k];
    stage.eps = schedule.eps[k];
    stage.trace = prox_solve(problem, stage_params, x);
    stage.met = stage.trace.final_triple.residual <= schedule.eps[k];
    const bool failed = stage.trace.termination == Termination::SubproblemFailure;
    x = stage.trace.x;
    stages.push_back(std::move(stage));
    if (failed) break;
  }
  return stages;
}

Polyhedron penalty_family(const Polyhedron& y_set, double theta) {
  if (!(theta >= 0)) throw std::invalid_argument("penalty_family: theta must be nonnegative");
  const Index m = y_set.dim();
  auto mismatch = [] { return std::invalid_argument("penalty_family: Y is not of the form {1} x R^m x [0,inf)^q"); };
  if (y_set.num_eq() != 1) throw mismatch();
  const Vector row = y_set.eq_matrix().row(0).transpose();
  const double scale = row(0);
  if (scale == 0.0 || row.tail(m - 1).cwiseAbs().maxCoeff() > 0.0 ||
      std::abs(y_set.eq_rhs()(0) - scale) > 1e-12 * std::abs(scale))
    throw mismatch();
  std::vector<char> signed_coord(static_cast<std::size_t>(m), 0);
  for (Index i = 0; i < y_set.num_ineq(); ++i) {
    const Vector r = y_set.ineq_matrix().row(i).transpose();
    Index nz = -1;
    for (Index j = 0; j < m; ++j) {
      if (r(j) == 0.0) continue;
      if (nz >= 0) throw mismatch();
      nz = j;
    }
    if (nz < 1 || r(nz) >= 0.0 || y_set.ineq_rhs()(i) != 0.0) throw mismatch();
    signed_coord[static_cast<std::size_t>(nz)] = 1;
  }
  Vector lower(m - 1);
  Vector upper(m - 1);
  for (Index j = 1; j < m; ++j) {
    lower(j - 1) = signed_coord[static_cast<std::size_t>(j)] ? 0.0 : -theta;
    upper(j - 1) = theta;
  }
  if (m == 1) return Polyhedron::point(Vector::Ones(1));
  return Polyhedron::product(Polyhedron::point(Vector::Ones(1)), Polyhedron::box(lower, upper));
}

ProblemFamily moreau_family(const CompositeProblem& base, const ApproxSchedule& schedule) {
  return [base, schedule](std::size_t k) {
    return CompositeProblem(base.X(), base.G(), moreau_smoothed(base.h(), schedule.nu.at(k)));
  };
}

ProblemFamily penalty_problem_family(const CompositeProblem& base, const ApproxSchedule& schedule) {
  return [base, schedule](std::size_t k) {
    return CompositeProblem(base.X(), base.G(),
                            PlqFunction(penalty_family(base.h().Y(), schedule.theta.at(k)), base.h().Q()));
  };
}

}  // namespace plqcomp
