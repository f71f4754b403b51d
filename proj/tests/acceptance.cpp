// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include "fixtures.hpp"

#include "plqcomp/prox.hpp"
#include "plqcomp/report.hpp"

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <sys/wait.h>

using namespace plqcomp;
using plqcomp::testing::vec;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

Polyhedron random_y(Rng& rng, Index m) {
  const double pick = rng.uniform();
  if (pick < 0.4) {
    Vector lo = rng.normal_vector(m);
    Vector hi = lo + (rng.normal_vector(m).cwiseAbs().array() + 0.1).matrix();
    return Polyhedron::box(lo, hi);
  }
  if (pick < 0.7 || m == 1) return Polyhedron::simplex(m, rng.uniform(0.5, 2.0));
  const Index k = 1 + static_cast<Index>(rng.uniform() * static_cast<double>(m - 1));
  const Polyhedron first = Polyhedron::simplex(k, 1.0);
  const Vector lo = -Vector::Ones(m - k);
  return Polyhedron::product(first, Polyhedron::box(lo, Vector::Ones(m - k)));
}

Outcome criterion1() {
  Stopwatch clock;
  Rng rng(101);
  double worst_obj = 0, worst_sol = 0;
  int unique_count = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const Index m = 1 + static_cast<Index>(rng.uniform() * 4);
    const Polyhedron y = random_y(rng, m);
    const Matrix q = rng.uniform() < 0.5 ? Matrix(Matrix::Zero(m, m)) : plqcomp::testing::random_pd(m, rng);
    const PlqFunction h(y, q);
    const Vector z = 2.0 * rng.normal_vector(m);
    const auto s = subgradients(h, z);
    if (!s) return {false, fmt("trial %d: subgradients returned nothing", trial)};
    const QpProblem qp(q, -z, y);
    const QpSolution ref = brute_force_qp(qp);
    if (!ref.optimal()) return {false, fmt("trial %d: brute force failed", trial)};
    worst_obj = std::max(worst_obj, std::abs(qp.objective(s->representative) - ref.objective));
    if (s->unique && solution_is_unique(qp, ref)) {
      ++unique_count;
      worst_sol = std::max(worst_sol, (s->representative - ref.x).norm());
    }
  }
  const double t = clock.seconds();
  return {worst_obj <= 1e-7 && worst_sol <= 1e-6 && t < 30,
          fmt("200 instances, objective gap %.2e, solution gap %.2e over %d unique, %.2f s", worst_obj, worst_sol,
              unique_count, t)};
}

PlqFunction nlp_h(Index m_eq, Index q) {
  const Index m = 1 + m_eq + q;
  Matrix e = Matrix::Zero(1, m);
  e(0, 0) = 1;
  Matrix d = Matrix::Zero(q, m);
  for (Index k = 0; k < q; ++k) d(k, 1 + m_eq + k) = -1;
  return PlqFunction(Polyhedron(e, Vector::Ones(1), d, Vector::Zero(q)), Matrix::Zero(m, m));
}

Outcome criterion2() {
  Stopwatch clock;
  Rng rng(202);
  double worst = 0;
  for (int k = 0; k < 100; ++k) {
    PlqFunction h = nlp_h(1, 1);
    Vector z;
    if (k % 2 == 0) {
      const Index m_eq = 1 + k % 3, q = k % 4;
      h = nlp_h(m_eq, q);
      z = rng.normal_vector(1 + m_eq + q);
      z.segment(1, m_eq).setZero();
      z.tail(q) = -z.tail(q).cwiseAbs();
    } else {
      const Index m = 1 + k % 4;
      h = PlqFunction(random_y(rng, m), k % 3 == 0 ? Matrix(Matrix::Zero(m, m)) : plqcomp::testing::random_pd(m, rng));
      z = 2.0 * rng.normal_vector(m);
    }
    const ExtendedReal a = evaluate(h, z), b = eval_via_dual(h, z);
    if (!a.is_finite() || !b.is_finite()) return {false, fmt("in-domain point %d evaluated to infinity", k)};
    worst = std::max(worst, std::abs(a.value() - b.value()));
  }
  int agree = 0;
  for (int k = 0; k < 20; ++k) {
    const Index m_eq = 1 + k % 2, q = 1 + k % 3;
    const PlqFunction h = nlp_h(m_eq, q);
    Vector z = rng.normal_vector(1 + m_eq + q);
    z.segment(1, m_eq).setZero();
    z.tail(q) = -z.tail(q).cwiseAbs();
    if (k % 2 == 0) z(1) += rng.uniform(0.1, 1.0);
    else z(1 + m_eq) = rng.uniform(0.1, 1.0);
    if (evaluate(h, z).is_plus_infinity() && eval_via_dual(h, z).is_plus_infinity() && !in_domain(h, z)) ++agree;
  }
  const double t = clock.seconds();
  return {worst <= 1e-7 && agree == 20 && t < 10,
          fmt("max |primal - dual| %.2e on 100 points, %d/20 infeasible points at +inf, %.2f s", worst, agree, t)};
}

Outcome criterion3() {
  Rng rng(303);
  double worst = 0;
  int points = 0;
  for (Family f : {Family::Goal, Family::NlpPenalty, Family::Cvar, Family::LassoTaper, Family::PhaseRetrieval,
                   Family::SpatialVI}) {
    InstanceSpec spec;
    spec.family = f;
    spec.n = 3;
    spec.m = 4;
    spec.n_ineq = 1;
    spec.curvature = 0.5;
    const Instance inst = build(spec);
    const CompositeProblem p = with_q(inst.problem, plqcomp::testing::random_pd(inst.problem.m(), rng));
    auto hg = [&](const Vector& x) { return evaluate(p.h(), p.G()(x)).value(); };
    for (int k = 0; k < 20; ++k, ++points) {
      const Vector x = inst.x0 + 0.3 * rng.normal_vector(p.n());
      const auto s = subgradients(p.h(), p.G()(x));
      if (!s) return {false, std::string("no subgradient for ") + to_string(f)};
      const Vector g = p.G().jacobian_at(x).transpose() * s->representative;
      Vector fd(p.n());
      const double step = 1e-6;
      for (Index j = 0; j < p.n(); ++j) {
        Vector e = Vector::Zero(p.n());
        e(j) = step;
        fd(j) = (hg(x + e) - hg(x - e)) / (2 * step);
      }
      worst = std::max(worst, (fd - g).norm() / std::max(1.0, g.norm()));
    }
  }
  return {worst <= 1e-4, fmt("%d points over 6 families, max relative error %.2e", points, worst)};
}

int descent_violations(const SolveTrace& trace, double sigma) {
  int bad = 0;
  for (const auto& r : trace.iterations)
    if (r.actual_decrease < sigma * r.model_decrease - 1e-12 || r.model_decrease < -1e-12) ++bad;
  return bad;
}

Outcome criterion4() {
  ProxParams params;
  int violations = 0, accepted = 0;
  const SolveTrace a = prox_solve(plqcomp::testing::abs_square(), params, vec({3}));
  violations += descent_violations(a, params.sigma);
  accepted += static_cast<int>(a.iterations.size());
  const bool ok_a = a.final_triple.residual <= 1e-6 && std::abs(std::abs(a.x(0)) - 1.0) <= 1e-6;

  InstanceSpec spec;
  spec.family = Family::PhaseRetrieval;
  spec.n = 5;
  spec.m = 20;
  spec.seed = 7;
  Stopwatch clock;
  const Instance inst = build(spec);
  ProxParams pr;
  pr.residual_tol = 1e-9;
  const SolveTrace b = prox_solve(inst.problem, pr, inst.x0);
  const double t = clock.seconds();
  const double obj = phi(inst.problem, b.x).value() + 0.0;
  violations += descent_violations(b, pr.sigma);
  accepted += static_cast<int>(b.iterations.size());
  const bool ok_b = obj <= 1e-8 && b.final_triple.residual <= 1e-6 && t < 10;

  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    for (Family f : {Family::Goal, Family::LassoTaper, Family::PhaseRetrieval}) {
      InstanceSpec s;
      s.family = f;
      s.n = 4;
      s.m = 8;
      s.seed = seed;
      s.curvature = 0.3;
      const Instance i = build(s);
      const SolveTrace tr = prox_solve(i.problem, params, i.x0);
      violations += descent_violations(tr, params.sigma);
      accepted += static_cast<int>(tr.iterations.size());
    }
  }
  return {ok_a && ok_b && violations == 0,
          fmt("(a) x = %.9f residual %.1e; (b) phi %.1e residual %.1e in %.2f s; (c) %d violations in %d steps",
              a.x(0), a.final_triple.residual, obj, b.final_triple.residual, t, violations, accepted)};
}

Outcome criterion5() {
  double worst = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    InstanceSpec spec;
    spec.family = Family::Cvar;
    spec.n = 4;
    spec.m = 10;
    spec.seed = seed;
    spec.alpha = 0.8;
    const Instance inst = build(spec);
    ProxParams params;
    params.residual_tol = 1e-10;
    params.stop_tol = 1e-12;
    params.max_iter = 2000;
    const SolveTrace t = prox_solve(inst.problem, params, inst.x0);
    worst = std::max(worst, std::abs(phi(inst.problem, t.x).value() - cvar_ru_reference(inst)));
  }
  return {worst <= 1e-6, fmt("5 instances, max |composite - RU LP| = %.2e", worst)};
}

GridSpec interval_grid(double lo, double hi) {
  GridSpec g;
  g.lower = Vector::Constant(1, lo);
  g.upper = Vector::Constant(1, hi);
  return g;
}

Outcome criterion6() {
  const CompositeProblem c = plqcomp::testing::duality_counterexample();
  const GridSpec grid = interval_grid(-1, 1);
  double worst = 0;
  for (double y2 : {0.0, 0.1, 0.2, 0.3, 0.45, 0.5, 0.75, 1.0, 5.0, 40.0}) {
    const double expected = y2 < 0.5 ? -1.0 + y2 : -1.0 / (4.0 * y2);
    const DualPoint d = dual_sampled(c, vec({1, y2}), grid);
    if (!d.value.is_finite()) return {false, fmt("psi infinite at y2 = %g", y2)};
    worst = std::max(worst, std::abs(d.value.value() - expected));
  }
  double sup = -kInf;
  for (double y2 = 0; y2 <= 100.0 + 1e-9; y2 += 0.25) sup = std::max(sup, dual_sampled(c, vec({1, y2}), grid).value.value());
  const double at_zero = phi(c, vec({0})).value() + 0.0;
  const double inf_phi = sampled_infimum(c, grid).value.value();
  return {worst <= 1e-6 && sup < 0 && at_zero == 0.0 && std::abs(inf_phi) <= 1e-5,
          fmt("max psi error %.2e, sup psi over [0,100] = %.4g, phi(0) = %g, sampled inf phi = %.1e", worst, sup,
              at_zero, inf_phi)};
}

Outcome criterion7() {
  const CompositeProblem p = plqcomp::testing::nonlinear_instance();
  const GridSpec grid = interval_grid(-2, 2);
  std::vector<Vector> us;
  for (int a = -4; a <= 4; ++a)
    for (int b = -4; b <= 4; ++b) us.push_back(vec({a / 4.0, b / 4.0}));
  const ExactnessReport plain = exactness_check(p, {false, 0.0}, vec({1, 0}), us, 0.0, grid);
  const ExactnessReport aug = exactness_check(p, {true, 2.0}, vec({1, 0}), us, 0.0, grid);
  const double psi = aug_dual_sampled(p, vec({1, 0}), 2.0, grid).value.value();
  return {!plain.holds && aug.holds && std::abs(psi) <= 1e-8,
          fmt("plain exact: %s, augmented (theta 2) exact on %zu samples: %s, psi_theta = %.1e",
              plain.holds ? "yes" : "no", us.size(), aug.holds ? "yes" : "no", psi)};
}

Outcome criterion8() {
  const CompositeProblem p = plqcomp::testing::abs_square();
  ApproxSchedule s;
  s.kind = ScheduleKind::MoreauSmoothing;
  s.nu = {1, 10, 100, 1000};
  s.eps = {1.0, 0.1, 0.01, 0.001};
  const auto stages = consistent_solve(moreau_family(p, s), s, vec({3}));
  bool all_met = stages.size() == 4;
  for (const auto& st : stages) all_met = all_met && st.met;
  const Vector x = stages.back().trace.x;
  const Multipliers m = multiplier_recovery(p, x);
  const double true_res = stationarity_residual(p, x, m.y, m.z).residual;

  InstanceSpec spec;
  spec.family = Family::NlpPenalty;
  spec.n = 2;
  spec.center = vec({-3, -3});
  spec.radius2 = 2;
  const Instance inst = build(spec);
  ApproxSchedule pen;
  pen.kind = ScheduleKind::ExactPenalty;
  for (int k = 1; k <= 12; ++k) {
    pen.nu.push_back(k);
    pen.eps.push_back(std::ldexp(1.0, -k));
    pen.theta.push_back(std::ldexp(1.0, k));
  }
  const auto pstages = consistent_solve(penalty_problem_family(inst.problem, pen), pen, inst.x0);
  const double err = (pstages.back().trace.x - vec({-1, -1})).norm();
  return {all_met && true_res <= 1e-3 && err <= 1e-3,
          fmt("Moreau stages met: %s, true residual %.1e; penalty stages %zu, |x - (-1,-1)| = %.1e",
              all_met ? "all" : "not all", true_res, pstages.size(), err)};
}

Outcome criterion9() {
  const IntervalSet all = IntervalSet::all(), none = IntervalSet::empty(), zero = IntervalSet::point(0);
  const IntervalSet nonneg = IntervalSet::interval(0, kInf), nonpos = IntervalSet::interval(-kInf, 0);
  const PolylineGraph g = plqcomp::testing::step_graph();
  struct Row {
    IntervalSet got, want;
  };
  std::vector<Row> rows = {
      {coderivative(g, Point2(0, 0), 0), all},      {coderivative(g, Point2(0, 0), 1), none},
      {coderivative(g, Point2(0, 0), -1), none},    {coderivative(g, Point2(0, -1), 1), nonneg},
      {coderivative(g, Point2(0, -1), -1), zero},   {coderivative(g, Point2(0, -1), 0), all},
      {coderivative(g, Point2(0, 2), -1), nonpos},  {coderivative(g, Point2(0, 2), 1), zero},
      {second_subdiff_1d(Plq1d{-kInf, kInf, 0.5}, 1.0, 2.0, 3.0), IntervalSet::point(6)},
      {second_subdiff_1d(Plq1d{-kInf, kInf, 0.5}, -2.0, -4.0, -1.0), IntervalSet::point(-2)},
      {second_subdiff_1d(Plq1d{-1, 2, 0}, 0, 0, 1), none},
      {second_subdiff_1d(Plq1d{-1, 2, 0}, 0, 0, -1), none},
      {second_subdiff_1d(Plq1d{0, 1, 0}, 0, 0, 1), nonneg},
      {second_subdiff_1d(Plq1d{0, 1, 0}, 0, 0, -1), zero},
      {nys_interval(0, kInf, 1, 0, -2), zero},
      {nys_interval(0, kInf, 0, 0, -1), nonpos},
      {nys_interval(0, kInf, 0, -1, 0), all},
      {nys_interval(0, kInf, 0, 0, 1), zero},
      {nys_interval(0, kInf, 0, -1, 1), none},
  };
  int matched = 0;
  std::string first_miss;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].got == rows[i].want) ++matched;
    else if (first_miss.empty())
      first_miss = fmt(", row %zu gave %s", i, to_string(rows[i].got).c_str());
  }
  return {matched == static_cast<int>(rows.size()), fmt("%d/%zu exact set equalities", matched, rows.size()) + first_miss};
}

Outcome criterion10() {
  Stopwatch clock;
  int agree = 0, total = 0;
  std::string miss;
  for (const auto& c : plqcomp::testing::tilt_catalog()) {
    ++total;
    const bool a = tilt_stable_1d(c.f, c.xbar), b = tilt_oracle_1d(c.f, c.xbar, plqcomp::testing::tilt_grid());
    if (a == b && a == c.stable) ++agree;
    else if (miss.empty()) miss = ", mismatch on " + c.name;
  }
  Rng rng(1010);
  int smooth_agree = 0;
  for (int k = 0; k < 50; ++k) {
    const Matrix b = rng.normal_matrix(3, 3);
    Matrix s = b * b.transpose() - rng.uniform(0.0, 2.0) * Matrix::Identity(3, 3);
    if (k % 10 == 0) s = Vector(vec({1.0, 2.0, 0.0})).asDiagonal();
    const double min_eig = Eigen::SelfAdjointEigenSolver<Matrix>(s).eigenvalues().minCoeff();
    if (tilt_stable_smooth(s) == (min_eig > 1e-10)) ++smooth_agree;
  }
  const double t = clock.seconds();
  return {agree == total && smooth_agree == 50 && t < 30,
          fmt("%d/%d catalog agreements, %d/50 smooth cases, %.2f s", agree, total, smooth_agree, t) + miss};
}

Outcome criterion11() {
  Rng rng(1111);
  double worst = 0;
  int generators = 0, limsup_bad = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Index n = 2 + trial % 3;
    const Index rows = 2 + trial % 4;
    const Index eqs = trial % 5 == 0 ? 1 : 0;
    const Vector xbar = rng.normal_vector(n);
    const Matrix d = rng.normal_matrix(rows, n);
    Vector rhs = d * xbar;
    for (Index i = 0; i < rows; ++i)
      if (rng.uniform() < 0.4) rhs(i) += rng.uniform(0.1, 1.0);
    const Matrix e = rng.normal_matrix(eqs, n);
    const Polyhedron p(e, e * xbar, d, rhs);
    const Vector v = rng.normal_vector(n);
    const ConeDescription cone = normal_cone(p, xbar);
    Matrix active(static_cast<Index>(cone.active.size()), n);
    for (std::size_t k = 0; k < cone.active.size(); ++k) active.row(static_cast<Index>(k)) = d.row(cone.active[k]);
    const Polyhedron tangent(e, Vector::Zero(eqs), active, Vector::Zero(active.rows()));
    worst = std::max(worst, std::abs(dist_to_cone(cone, v) - project(tangent, v).norm()));

    std::vector<Vector> gens;
    for (Index r = 0; r < cone.gen_rows.rows(); ++r) gens.push_back(cone.gen_rows.row(r).transpose());
    for (Index r = 0; r < cone.span_rows.rows(); ++r) {
      gens.push_back(cone.span_rows.row(r).transpose());
      gens.push_back(-cone.span_rows.row(r).transpose());
    }
    for (const Vector& g : gens) {
      ++generators;
      double ratio = -kInf;
      for (int s = 0; s < 30; ++s) {
        const double radius = std::pow(10.0, -1 - s % 6);
        const Vector x = project(p, xbar + radius * rng.normal_vector(n));
        const double dist = (x - xbar).norm();
        if (dist > 1e-12) ratio = std::max(ratio, g.dot(x - xbar) / dist);
      }
      if (ratio > 1e-7 * std::max(1.0, g.norm())) ++limsup_bad;
    }
  }
  return {worst <= 1e-7 && limsup_bad == 0,
          fmt("100 triples, max |dist - oracle| %.2e; %d generators, %d limsup violations", worst, generators,
              limsup_bad)};
}

Outcome criterion12() {
  InstanceSpec spec;
  spec.family = Family::SpatialVI;
  spec.n = 3;
  spec.m = 2;
  spec.seed = 12;
  const Instance inst = build(spec);
  const double kkt_merit = vi_merit(inst, vi_kkt_solution(inst));
  ProxParams params;
  params.residual_tol = 1e-9;
  params.max_iter = 2000;
  const SolveTrace t = prox_solve(inst.problem, params, inst.x0);
  const double solved = vi_merit(inst, project(inst.problem.X(), t.x));
  return {kkt_merit <= 1e-7 && solved <= 1e-5,
          fmt("KKT oracle merit %.1e; prox solve merit %.1e after %zu iterations", kkt_merit, solved,
              t.iterations.size())};
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_cli(const std::string& args, const std::filesystem::path& out) {
  const std::string cmd = std::string("\"") + PLQCOMP_CLI_PATH + "\" " + args + " > \"" + out.string() + "\" 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome criterion13() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "plqcomp_acceptance";
  fs::create_directories(dir);
  const std::string problems = std::string(PLQCOMP_SOURCE_DIR) + "/problems/";
  const std::string file = "\"" + problems + "phase_retrieval.yaml\"";
  const int c1 = run_cli("solve " + file, dir / "run1.json");
  const int c2 = run_cli("solve " + file, dir / "run2.json");
  auto strip = [](const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    j.erase("wall_time_s");
    return j.dump();
  };
  const bool same = c1 == 0 && c2 == 0 && strip(slurp(dir / "run1.json")) == strip(slurp(dir / "run2.json"));

  std::ofstream(dir / "asym.yaml") << "Y:\n  box: {lower: [0, 0], upper: [1, 1]}\nQ: [[1, 0.5], [0, 1]]\n"
                                      "G:\n  affine: {A: [[1, 0], [0, 1]], b: [0, 0]}\n";
  const int asym = run_cli("solve \"" + (dir / "asym.yaml").string() + "\"", dir / "o.txt");
  const int limit = run_cli("solve " + file + " --max-iter 1", dir / "o.txt");
  const int tilt = run_cli("check " + file + " --what tilt", dir / "o.txt");
  return {same && asym == 1 && limit == 2 && tilt == 3,
          fmt("identical reports: %s; exit codes asymmetric Q %d, iteration limit %d, unsupported tilt %d",
              same ? "yes" : "no", asym, limit, tilt)};
}

}  // namespace

int main() {
  const std::vector<std::function<Outcome()>> criteria = {criterion1, criterion2,  criterion3,  criterion4, criterion5,
                                                          criterion6, criterion7,  criterion8,  criterion9, criterion10,
                                                          criterion11, criterion12, criterion13};
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << ": " << o.detail << std::endl;
  }
  std::cout << criteria.size() - failures << "/" << criteria.size() << " criteria passed" << std::endl;
  return failures == 0 ? 0 : 1;
}
