#include "plqcomp/report.hpp"

#include "plqcomp/second_order.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

namespace plqcomp {

nlohmann::json json_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return 0.0;
  if (std::isnan(v)) return "nan";
  return v;
}

nlohmann::json json_vector(const Vector& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(json_number(v(i)));
  return a;
}

namespace {

void append_rows(std::ostringstream& csv, const SolveTrace& trace, int& counter) {
  for (const auto& r : trace.iterations)
    csv << ++counter << ',' << r.phi + 0.0 << ',' << r.lambda << ',' << r.step_norm << ',' << r.residual << ','
        << r.backtracks << '\n';
}

/// The better of the given triple and a fresh multiplier recovery, both measured on the true problem.
StationarityTriple true_triple(const CompositeProblem& p, const StationarityTriple& stage) {
  StationarityTriple best = stationarity_residual(p, stage.x, stage.y, stage.z);
  try {
    const Multipliers mult = multiplier_recovery(p, stage.x);
    const StationarityTriple alt = stationarity_residual(p, stage.x, mult.y, mult.z);
    if (alt.residual < best.residual) best = alt;
  } catch (const std::exception&) {
  }
  return best;
}

ApproxSchedule make_schedule(const SolverSpec& s) {
  ApproxSchedule sch;
  if (s.approx) {
    sch.kind = s.approx->kind == "penalty" ? ScheduleKind::ExactPenalty : ScheduleKind::MoreauSmoothing;
    sch.nu = s.approx->nu;
    sch.eps = s.approx->eps;
    sch.theta = s.approx->theta;
  } else {
    sch.kind = ScheduleKind::MoreauSmoothing;
  }
  if (sch.nu.empty()) {
    for (int k = 0; k < 4; ++k) sch.nu.push_back(static_cast<int>(std::pow(10, k)));
  }
  if (sch.eps.empty())
    for (int nu : sch.nu) sch.eps.push_back(1.0 / nu);
  if (sch.kind == ScheduleKind::ExactPenalty && sch.theta.empty())
    for (int nu : sch.nu) sch.theta.push_back(std::ldexp(1.0, nu));
  return sch;
}

Vector default_y0(const CompositeProblem& p) { return project(p.h().Y(), Vector::Zero(p.m())); }

}  // namespace

SolveOutcome run_solve(const ProblemFile& file, const SolveOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const BuiltProblem built = build_problem(file);
  const CompositeProblem& p = built.problem;
  const std::string method = options.method.value_or(file.solver.method);
  const double tol = options.tol.value_or(file.solver.tol);
  if (!(tol > 0)) throw ProblemFileError("solver: tol must be positive");

  SolveOutcome out;
  nlohmann::json& rep = out.report;
  rep["name"] = file.name;
  rep["method"] = method;
  rep["tol"] = tol;
  std::ostringstream csv;
  csv.precision(17);
  csv << "iter,phi,lambda,step_norm,residual,backtracks\n";
  int rows = 0;
  StationarityTriple triple;
  int iterations = 0;
  std::string termination;

  if (method == "prox") {
    ProxParams params = file.solver.prox;
    if (options.max_iter) params.max_iter = *options.max_iter;
    params.residual_tol = tol;
    try {
      params.validate();
    } catch (const std::invalid_argument& e) {
      throw ProblemFileError(std::string("solver: ") + e.what());
    }
    const SolveTrace trace = prox_solve(p, params, built.x0);
    append_rows(csv, trace, rows);
    triple = trace.final_triple;
    iterations = static_cast<int>(trace.iterations.size());
    termination = to_string(trace.termination);
  } else if (method == "approx") {
    ApproxSchedule sch = make_schedule(file.solver);
    try {
      sch.validate();
    } catch (const std::invalid_argument& e) {
      throw ProblemFileError(std::string("solver: ") + e.what());
    }
    const ProblemFamily family =
        sch.kind == ScheduleKind::ExactPenalty ? penalty_problem_family(p, sch) : moreau_family(p, sch);
    ProxParams params = file.solver.prox;
    if (options.max_iter) params.max_iter = *options.max_iter;
    const std::vector<StageResult> stages = consistent_solve(family, sch, built.x0, params);
    nlohmann::json js = nlohmann::json::array();
    for (const auto& st : stages) {
      append_rows(csv, st.trace, rows);
      iterations += static_cast<int>(st.trace.iterations.size());
      js.push_back({{"nu", st.nu},
                    {"eps", st.eps},
                    {"met", st.met},
                    {"residual", json_number(st.trace.final_triple.residual)},
                    {"termination", to_string(st.trace.termination)}});
    }
    rep["stages"] = js;
    triple = true_triple(p, stages.back().trace.final_triple);
    termination = to_string(stages.back().trace.termination);
  } else if (method == "alm") {
    AugParams params = file.solver.alm;
    if (options.max_iter) params.outer_iters = *options.max_iter;
    params.tol = tol;
    try {
      params.validate();
    } catch (const std::invalid_argument& e) {
      throw ProblemFileError(std::string("solver: ") + e.what());
    }
    const Vector y0 = file.solver.y0 ? *file.solver.y0 : default_y0(p);
    const AlmTrace trace = alm_solve(p, params, built.x0, y0);
    Vector prev = built.x0;
    for (const auto& r : trace.records) {
      const ExtendedReal f = phi(p, r.x);
      csv << ++rows << ',' << f.to_double() << ',' << params.lambda_step.value_or(params.theta) << ','
          << (r.x - prev).norm() << ',' << r.residual << ',' << 0 << '\n';
      prev = r.x;
    }
    triple = trace.final_triple;
    iterations = static_cast<int>(trace.records.size());
    termination = trace.converged ? "converged" : "max_iterations";
  } else {
    throw ProblemFileError("solver: unknown method '" + method + "'");
  }

  const ExtendedReal f = phi(p, triple.x);
  rep["x"] = json_vector(triple.x);
  rep["y"] = json_vector(triple.y);
  rep["z"] = json_vector(triple.z);
  rep["phi"] = json_number(f.to_double());
  rep["residual"] = {{"total", json_number(triple.residual)},
                     {"r_G", json_number(triple.r_G)},
                     {"r_Y", json_number(triple.r_Y)},
                     {"r_X", json_number(triple.r_X)}};
  rep["iterations"] = iterations;
  rep["termination"] = termination;
  out.exit_code = triple.residual <= tol ? kExitOk : kExitNotConverged;
  rep["converged"] = out.exit_code == kExitOk;
  out.trace_csv = csv.str();
  rep["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

namespace {

CheckOutcome check_subgradient(const ProblemFile& file, const BuiltProblem& built) {
  CheckOutcome out;
  const CompositeProblem& p = built.problem;
  const Vector x = file.check.point ? *file.check.point : built.x0;
  if (x.size() != p.n()) throw ProblemFileError("check: point dimension does not match X");
  const ExtendedReal f = phi(p, x);
  out.rows.push_back({"phi finite at point", f.is_finite(), to_string(f)});
  if (!f.is_finite()) {
    out.exit_code = kExitNotConverged;
    return out;
  }
  const Vector z = p.G()(x);
  const ExtendedReal dual = eval_via_dual(p.h(), z);
  const double gap = dual.is_finite() ? std::abs(dual.value() - f.value()) : kInf;
  out.rows.push_back({"h primal = h dual", gap <= 1e-7 * (1 + std::abs(f.value())), "gap " + std::to_string(gap)});

  const auto sub = subgradients(p.h(), z);
  const PlqFunction& h = p.h();
  const QpProblem qp(h.Q(), -z, h.Y());
  if (sub && h.dim() <= 6 && is_bounded(h.Y()) && h.Y().num_ineq() <= 24) {
    const QpSolution oracle = brute_force_qp(qp);
    const double obj_gap = std::abs(oracle.objective - sub->argmin.objective);
    bool ok = oracle.optimal() && obj_gap <= 1e-7;
    std::string detail = "objective gap " + std::to_string(obj_gap);
    if (ok && sub->unique) {
      const double d = (oracle.x - sub->representative).norm();
      ok = d <= 1e-6;
      detail += ", solution gap " + std::to_string(d);
    }
    out.rows.push_back({"argmin vs enumeration oracle", ok, detail});
  } else {
    out.rows.push_back({"argmin vs enumeration oracle", true, "skipped: Y unbounded or too large"});
  }

  const ChainSubgradient chain = chain_subgradient(p, x);
  out.rows.push_back({"qualification", chain.qualification_ok, chain.qualification_ok ? "holds" : "fails"});
  const bool smooth_h = Eigen::SelfAdjointEigenSolver<Matrix>(h.Q()).eigenvalues().minCoeff() > 1e-10;
  if (smooth_h && p.X().num_eq() == 0 && contains(p.X(), x) &&
      normal_cone(p.X(), x).active.empty()) {
    Vector fd(p.n());
    for (Index i = 0; i < p.n(); ++i) {
      const double step = 1e-6 * std::max(1.0, std::abs(x(i)));
      Vector xp = x, xm = x;
      xp(i) += step;
      xm(i) -= step;
      fd(i) = (phi(p, xp).to_double() - phi(p, xm).to_double()) / (2 * step);
    }
    const double rel = (fd - chain.representative).norm() / std::max(1.0, fd.norm());
    out.rows.push_back({"chain rule vs finite differences", rel <= 1e-4, "relative error " + std::to_string(rel)});
  }
  for (const auto& r : out.rows)
    if (!r.pass) out.exit_code = kExitNotConverged;
  return out;
}

CheckOutcome check_duality(const ProblemFile& file, const BuiltProblem& built) {
  CheckOutcome out;
  const CompositeProblem& p = built.problem;
  const bool affine = p.G().affine.has_value();
  if (!affine && p.n() > 3) {
    out.exit_code = kExitUnsupported;
    out.message = "duality sweep needs affine G or n <= 3";
    return out;
  }
  ProxParams params = file.solver.prox;
  params.residual_tol = file.solver.tol;
  const SolveTrace primal = prox_solve(p, params, built.x0);
  const double upper = primal.phi;
  out.rows.push_back({"primal solve", std::isfinite(upper), "phi " + std::to_string(upper)});

  std::vector<Vector> duals = file.check.duals;
  if (duals.empty()) {
    Rng rng(file.seed);
    for (int k = 0; k < 5; ++k) duals.push_back(project(p.h().Y(), rng.normal_vector(p.m())));
  }
  GridSpec grid;
  grid.lower = Vector::Constant(p.n(), -file.check.grid_radius);
  grid.upper = Vector::Constant(p.n(), file.check.grid_radius);
  for (std::size_t k = 0; k < duals.size(); ++k) {
    const Vector& y = duals[k];
    if (y.size() != p.m()) throw ProblemFileError("check: dual vector dimension does not match Y");
    const ExtendedReal psi = affine ? dual_affine(p, y) : dual_sampled(p, y, grid).value;
    const bool ok = psi.to_double() <= upper + 1e-7 * (1 + std::abs(upper));
    out.rows.push_back({"weak duality y#" + std::to_string(k), ok, "psi " + to_string(psi)});
  }
  if (affine) {
    const DualMaximum dm = dual_affine_max(p);
    if (dm.status == QpStatus::Optimal) {
      const bool ok = dm.value <= upper + 1e-7 * (1 + std::abs(upper));
      out.rows.push_back({"weak duality at dual maximum", ok,
                          "sup psi " + std::to_string(dm.value) + ", gap " + std::to_string(upper - dm.value)});
    }
  }
  for (const auto& r : out.rows)
    if (!r.pass) out.exit_code = kExitNotConverged;
  return out;
}

bool is_identity_map(const CompositeProblem& p) {
  if (p.n() != 1 || p.m() != 1 || !p.G().affine) return false;
  const AffineData& a = *p.G().affine;
  return a.A(0, 0) == -1.0 && a.b(0) == 0.0;
}

CheckOutcome check_tilt(const ProblemFile& file, const BuiltProblem& built) {
  CheckOutcome out;
  const CompositeProblem& p = built.problem;
  if (p.n() != 1) {
    out.exit_code = kExitUnsupported;
    out.message = "tilt verdicts are implemented for n = 1 only";
    return out;
  }
  Vector xbar;
  if (file.check.point) {
    xbar = *file.check.point;
  } else {
    ProxParams params = file.solver.prox;
    params.residual_tol = file.solver.tol;
    xbar = prox_solve(p, params, built.x0).x;
  }
  if (xbar.size() != 1) throw ProblemFileError("check: point dimension does not match X");
  const TiltVerdict verdict = tilt_composite(p, xbar);
  if (verdict == TiltVerdict::Unsupported) {
    out.exit_code = kExitUnsupported;
    out.message = "tilt verdict unsupported for this h and G";
    return out;
  }
  out.rows.push_back({"tilt verdict", true, std::string(to_string(verdict)) + " at x = " + std::to_string(xbar(0))});
  if (is_identity_map(p) && p.X().num_eq() == 0 && p.X().num_ineq() == 0) {
    const Plq1d f = to_plq1d(p.h());
    if (f.is_subgradient(xbar(0), 0.0, 1e-9)) {
      std::vector<double> ys;
      for (int k = -10; k <= 10; ++k) ys.push_back(1e-3 * k);
      const bool oracle = tilt_oracle_1d(f, xbar(0), ys);
      const bool analytic = tilt_stable_1d(f, xbar(0));
      out.rows.push_back({"analytic second-order test", analytic == (verdict == TiltVerdict::Stable),
                          analytic ? "stable" : "unstable"});
      out.rows.push_back({"brute-force tilt oracle", oracle == (verdict == TiltVerdict::Stable),
                          oracle ? "stable" : "unstable"});
    }
  }
  for (const auto& r : out.rows)
    if (!r.pass) out.exit_code = kExitNotConverged;
  return out;
}

}  // namespace

CheckOutcome run_check(const ProblemFile& file, const std::string& what) {
  const BuiltProblem built = build_problem(file);
  if (what == "subgradient") return check_subgradient(file, built);
  if (what == "duality") return check_duality(file, built);
  if (what == "tilt") return check_tilt(file, built);
  throw ProblemFileError("check: unknown diagnostic '" + what + "'");
}

std::string format_table(const CheckOutcome& outcome) {
  std::ostringstream os;
  if (outcome.exit_code == kExitUnsupported) {
    os << "unsupported: " << outcome.message << '\n';
    return os.str();
  }
  std::size_t width = 5;
  for (const auto& r : outcome.rows) width = std::max(width, r.name.size());
  for (const auto& r : outcome.rows) {
    os << (r.pass ? "PASS  " : "FAIL  ") << r.name << std::string(width - r.name.size() + 2, ' ') << r.detail
       << '\n';
  }
  return os.str();
}

}  // namespace plqcomp
