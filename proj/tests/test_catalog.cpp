#include "fixtures.hpp"

#include "plqcomp/prox.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace plqcomp;
using plqcomp::testing::vec;

namespace {

InstanceSpec spec_of(Family family, Index n, Index m, std::uint64_t seed) {
  InstanceSpec s;
  s.family = family;
  s.n = n;
  s.m = m;
  s.seed = seed;
  return s;
}

double phi_value(const Instance& inst, const Vector& x) { return phi(inst.problem, x).value(); }

}  // namespace

TEST(Rng, DeterministicPerSeed) {
  Rng a(5), b(5), c(6);
  const Vector va = a.normal_vector(8);
  EXPECT_EQ(va, b.normal_vector(8));
  EXPECT_NE(va, c.normal_vector(8));
  Rng u(1);
  for (int i = 0; i < 1000; ++i) {
    const double t = u.uniform();
    EXPECT_GE(t, 0.0);
    EXPECT_LT(t, 1.0);
  }
}

TEST(Family, NamesRoundTrip) {
  for (Family f : {Family::Goal, Family::NlpPenalty, Family::Cvar, Family::LassoTaper, Family::PhaseRetrieval,
                   Family::SpatialVI})
    EXPECT_EQ(family_from_string(to_string(f)), f);
  EXPECT_THROW(family_from_string("sudoku"), std::invalid_argument);
}

TEST(Goal, PhiIsSumOfHinges) {
  const Instance inst = build(spec_of(Family::Goal, 3, 4, 2));
  Rng rng(9);
  for (int k = 0; k < 20; ++k) {
    const Vector x = 2.0 * (rng.normal_vector(3).array().tanh()).matrix();
    const Vector g = inst.offsets + inst.slopes * x;
    EXPECT_NEAR(phi_value(inst, x), g.cwiseMax(0.0).sum(), 1e-10);
  }
}

TEST(Goal, PenaltiesAndTargets) {
  InstanceSpec s = spec_of(Family::Goal, 2, 2, 4);
  s.penalties = vec({0.5, 3.0});
  s.targets = vec({0.2, -0.1});
  const Instance inst = build(s);
  const Vector x = vec({0.3, -0.7});
  const Vector g = inst.offsets + inst.slopes * x - s.targets;
  EXPECT_NEAR(phi_value(inst, x), 0.5 * std::max(0.0, g(0)) + 3.0 * std::max(0.0, g(1)), 1e-10);
}

TEST(Nlp, PlantedPointIsFeasible) {
  InstanceSpec s = spec_of(Family::NlpPenalty, 3, 1, 5);
  s.center = vec({-2, 1, 0.5});
  s.n_eq = 2;
  s.n_ineq = 1;
  const Instance inst = build(s);
  ASSERT_TRUE(inst.planted.has_value());
  EXPECT_NEAR(inst.planted->squaredNorm(), 3.0, 1e-12);
  EXPECT_NEAR(phi_value(inst, *inst.planted), 0.5 * (*inst.planted - *s.center).squaredNorm(), 1e-10);
  EXPECT_TRUE(phi(inst.problem, 1.1 * *inst.planted).is_plus_infinity());
}

TEST(Cvar, SingleScenarioReference) {
  InstanceSpec s = spec_of(Family::Cvar, 3, 1, 8);
  s.alpha = 0.0;
  const Instance inst = build(s);
  const double expected = inst.offsets(0) - inst.slopes.row(0).lpNorm<1>();
  EXPECT_NEAR(cvar_ru_reference(inst), expected, 1e-9);
}

TEST(Cvar, OptimumMonotoneInAlpha) {
  double previous = -kInf;
  for (double alpha : {0.0, 0.5, 0.9}) {
    InstanceSpec s = spec_of(Family::Cvar, 4, 10, 3);
    s.alpha = alpha;
    const double value = cvar_ru_reference(build(s));
    EXPECT_GE(value, previous - 1e-10);
    previous = value;
  }
}

TEST(Cvar, ProxMatchesReference) {
  const Instance inst = build(spec_of(Family::Cvar, 3, 6, 11));
  ProxParams params;
  params.residual_tol = 1e-9;
  const SolveTrace trace = prox_solve(inst.problem, params, inst.x0);
  EXPECT_NEAR(phi_value(inst, trace.final_triple.x), cvar_ru_reference(inst), 1e-6);
}

TEST(Lasso, TaperIsC1) {
  const double theta = 0.3;
  for (double t : {-1.0, 1.0}) {
    EXPECT_NEAR(taper_value(t - 1e-9, theta), taper_value(t + 1e-9, theta), 1e-8);
    EXPECT_NEAR(taper_derivative(t - 1e-7, theta), taper_derivative(t + 1e-7, theta), 1e-5);
  }
  for (double t : {-3.0, -0.4, 0.0, 0.7, 2.5}) {
    const double h = 1e-6;
    const double fd = (taper_value(t + h, theta) - taper_value(t - h, theta)) / (2 * h);
    EXPECT_NEAR(fd, taper_derivative(t, theta), 1e-6);
    EXPECT_LT(std::abs(taper_value(t, theta)), 2 * theta);
  }
}

TEST(Lasso, PhiAtPlanted) {
  InstanceSpec s = spec_of(Family::LassoTaper, 6, 12, 2);
  s.theta = 0.25;
  const Instance inst = build(s);
  ASSERT_TRUE(inst.planted.has_value());
  double expected = 0;
  for (Index j = 0; j < 6; ++j) expected += std::abs(taper_value((*inst.planted)(j), 0.25));
  EXPECT_NEAR(phi_value(inst, *inst.planted), expected, 1e-10);
}

TEST(PhaseRetrieval, PlantedIsGlobalMinimizer) {
  const Instance inst = build(spec_of(Family::PhaseRetrieval, 5, 20, 7));
  ASSERT_TRUE(inst.planted.has_value());
  EXPECT_NEAR(phi_value(inst, *inst.planted), 0.0, 1e-12);
  EXPECT_NEAR(phi_value(inst, -*inst.planted), 0.0, 1e-12);
  EXPECT_GT(phi_value(inst, inst.x0), 0.0);
}

TEST(SpatialVi, MeritVanishesAtEquilibrium) {
  const Instance inst = build(spec_of(Family::SpatialVI, 3, 2, 4));
  const Vector x = vi_kkt_solution(inst);
  EXPECT_LE(vi_merit(inst, x), 1e-7);
  EXPECT_GT(vi_merit(inst, inst.x0), 1e-3);
  EXPECT_THROW(vi_merit(inst, Vector::Constant(x.size(), -1.0)), std::invalid_argument);
}

TEST(SpatialVi, PhiEqualsMeritOnC) {
  const Instance inst = build(spec_of(Family::SpatialVI, 2, 3, 6));
  const Vector a = vi_kkt_solution(inst);
  for (double t : {0.0, 0.25, 0.5, 1.0}) {
    const Vector x = (1 - t) * a + t * inst.x0;
    EXPECT_NEAR(phi_value(inst, x), vi_merit(inst, x), 1e-8);
  }
}

TEST(InstanceSpec, Validation) {
  InstanceSpec s = spec_of(Family::Cvar, 2, 3, 1);
  s.probabilities = vec({0.5, 0.5, 0.5});
  EXPECT_THROW(build(s), std::invalid_argument);
  s = spec_of(Family::Cvar, 2, 3, 1);
  s.alpha = 1.0;
  EXPECT_THROW(build(s), std::invalid_argument);
  s = spec_of(Family::Goal, 2, 2, 1);
  s.penalties = vec({1.0, -1.0});
  EXPECT_THROW(build(s), std::invalid_argument);
  s = spec_of(Family::NlpPenalty, 2, 1, 1);
  s.n_eq = 0;
  EXPECT_THROW(build(s), std::invalid_argument);
  s = spec_of(Family::NlpPenalty, 2, 1, 1);
  s.center = vec({1.0});
  EXPECT_THROW(build(s), std::invalid_argument);
  s = spec_of(Family::LassoTaper, 2, 2, 1);
  s.theta = 0.0;
  EXPECT_THROW(build(s), std::invalid_argument);
}

TEST(WithQ, KeepsMapAndReplacesQ) {
  const Instance inst = build(spec_of(Family::Goal, 2, 2, 3));
  const CompositeProblem p = with_q(inst.problem, Matrix::Identity(2, 2));
  const Vector x = vec({0.1, 0.2});
  EXPECT_LE(phi(p, x).value(), phi_value(inst, x) + 1e-12);
}
