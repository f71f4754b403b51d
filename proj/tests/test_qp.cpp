#include "fixtures.hpp"

#include <gtest/gtest.h>

using namespace plqcomp;
using plqcomp::testing::vec;

TEST(Qp, ProjectionOntoBox) {
  const Vector x = project(Polyhedron::box(vec({0, 0}), vec({1, 1})), vec({2, -3}));
  EXPECT_NEAR(x(0), 1.0, 1e-12);
  EXPECT_NEAR(x(1), 0.0, 1e-12);
}

TEST(Qp, LinearProgramOnSimplex) {
  const QpSolution s = solve_qp(QpProblem(Matrix::Zero(3, 3), vec({3, 1, 2}), Polyhedron::simplex(3)));
  ASSERT_TRUE(s.optimal());
  EXPECT_NEAR(s.objective, 1.0, 1e-12);
  EXPECT_NEAR(s.x(1), 1.0, 1e-12);
  EXPECT_TRUE(solution_is_unique(QpProblem(Matrix::Zero(3, 3), vec({3, 1, 2}), Polyhedron::simplex(3)), s));
}

TEST(Qp, DetectsInfeasibleAndUnbounded) {
  const Polyhedron empty = Polyhedron::halfspace(vec({1}), -1).intersect(Polyhedron::halfspace(vec({-1}), -1));
  EXPECT_EQ(solve_qp(QpProblem(Matrix::Identity(1, 1), vec({0}), empty)).status, QpStatus::Infeasible);
  const QpSolution u = solve_qp(QpProblem(Matrix::Zero(2, 2), vec({-1, 0}), Polyhedron::orthant(2)));
  EXPECT_EQ(u.status, QpStatus::Unbounded);
  EXPECT_GT(u.ray(0), 0.9);
}

TEST(Qp, RejectsIndefiniteHessian) {
  EXPECT_THROW(QpProblem(-Matrix::Identity(2, 2), vec({0, 0}), Polyhedron::whole_space(2)), std::invalid_argument);
}

TEST(Qp, NonUniqueLinearOptimum) {
  const QpProblem qp(Matrix::Zero(2, 2), vec({1, 1}), Polyhedron::simplex(2));
  const QpSolution s = solve_qp(qp);
  ASSERT_TRUE(s.optimal());
  EXPECT_FALSE(solution_is_unique(qp, s));
}

// Nearly antiparallel equality rows used to send the phase-1 LP along a tiny-slope ray.
TEST(Qp, PhaseOneWithNearlyParallelRows) {
  Matrix eq(2, 6);
  eq << -1.9999999999878579, -1.9999999999859284, 0, 0, 1, -1,
        2.0000000000242841, 2.0000000000281433, 1, -1, 0, 0;
  Matrix in = Matrix::Zero(4, 6);
  in.rightCols(4) = -Matrix::Identity(4, 4);
  const Polyhedron p(eq, vec({8.0, -4.0}), in, Vector::Zero(4));
  const QpSolution s = solve_qp(QpProblem(Matrix::Zero(6, 6), Vector::Zero(6), p));
  ASSERT_TRUE(s.optimal());
  EXPECT_LT(max_violation(p, s.x), 1e-8);
}

TEST(Qp, KktReportAtOptimum) {
  Rng rng(5);
  const Matrix b = rng.normal_matrix(3, 3);
  const QpProblem qp(b.transpose() * b, rng.normal_vector(3), Polyhedron::box(-Vector::Ones(3), Vector::Ones(3)));
  const QpSolution s = solve_qp(qp);
  ASSERT_TRUE(s.optimal());
  const KktReport r = kkt_report(qp, s);
  EXPECT_LT(r.primal_infeasibility, 1e-10);
  EXPECT_LT(r.stationarity, 1e-9);
  EXPECT_LT(r.complementarity, 1e-9);
  EXPECT_GE(r.min_ineq_mult, -1e-12);
}

// Property: the active-set solver agrees with active-set enumeration.
TEST(Qp, MatchesEnumerationOracle) {
  Rng rng(2024);
  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const Index n = 1 + static_cast<Index>(rng.uniform() * 4);
    const Index rank = static_cast<Index>(rng.uniform() * (n + 1));
    const Matrix f = rng.normal_matrix(rank, n);
    const Matrix h = f.transpose() * f;
    const Vector c = rng.normal_vector(n);
    Polyhedron p = Polyhedron::box(-Vector::Constant(n, 2.0), Vector::Constant(n, 2.0));
    const Index extra = static_cast<Index>(rng.uniform() * 3);
    if (extra > 0) p = p.with_inequalities(rng.normal_matrix(extra, n), rng.normal_vector(extra).cwiseAbs());
    if (n > 1 && rng.uniform() < 0.3) p = p.with_equalities(rng.normal_matrix(1, n), Vector::Zero(1));
    const QpProblem qp(h, c, p);
    const QpSolution s = solve_qp(qp);
    const QpSolution o = brute_force_qp(qp);
    ASSERT_EQ(s.status, o.status) << "trial " << trial;
    if (!s.optimal()) continue;
    EXPECT_NEAR(s.objective, o.objective, 1e-8 * (1 + std::abs(o.objective))) << "trial " << trial;
    if (solution_is_unique(qp, s)) EXPECT_LT((s.x - o.x).norm(), 1e-6) << "trial " << trial;
    ++checked;
  }
  EXPECT_GT(checked, 250);
}
