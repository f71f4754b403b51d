#include "fixtures.hpp"

#include <gtest/gtest.h>

using namespace plqcomp;
using plqcomp::testing::vec;

TEST(Composite, PhiValuesAndDomain) {
  const CompositeProblem p = plqcomp::testing::abs_square();
  EXPECT_DOUBLE_EQ(phi(p, vec({3})).value(), 8.0);
  EXPECT_DOUBLE_EQ(phi(p, vec({0})).value(), 1.0);
  const CompositeProblem c = plqcomp::testing::duality_counterexample();
  EXPECT_FALSE(phi(c, vec({0.5})).is_finite());
  EXPECT_FALSE(phi(c, vec({2})).is_finite());
  EXPECT_DOUBLE_EQ(phi(c, vec({0})).value(), 0.0);
}

TEST(Composite, ChainSubgradientSmoothPiece) {
  const CompositeProblem p = plqcomp::testing::abs_square();
  const ChainSubgradient s = chain_subgradient(p, vec({2}));
  EXPECT_TRUE(s.unique);
  EXPECT_NEAR(s.representative(0), 4.0, 1e-12);
  EXPECT_TRUE(s.qualification_ok);
}

TEST(Composite, ChainSubgradientAtKink) {
  const CompositeProblem p = plqcomp::testing::abs_square();
  const ChainSubgradient s = chain_subgradient(p, vec({1}));
  EXPECT_FALSE(s.unique);
  EXPECT_LE(std::abs(s.representative(0)), 2.0 + 1e-12);
}

TEST(Composite, QualificationFailsAtCounterexampleOrigin) {
  // dom h = R x (-inf, 0]; grad G(0)^T (0, 1) = 0, so the qualification fails at 0.
  const ChainSubgradient s = chain_subgradient(plqcomp::testing::duality_counterexample(), vec({0}));
  EXPECT_FALSE(s.qualification_ok);
}

TEST(Composite, StationarityResidualAtSolution) {
  const CompositeProblem p = plqcomp::testing::abs_square();
  const StationarityTriple t = stationarity_residual(p, vec({1}), vec({0}), vec({0}));
  EXPECT_NEAR(t.residual, 0.0, 1e-12);
  const StationarityTriple bad = stationarity_residual(p, vec({2}), vec({0.5}), vec({3}));
  EXPECT_GT(bad.residual, 1.0);
  EXPECT_NEAR(bad.r_X, 2.0, 1e-12);
}

TEST(Composite, ResidualIsInfiniteOffX) {
  const CompositeProblem c = plqcomp::testing::duality_counterexample();
  const StationarityTriple t = stationarity_residual(c, vec({3}), vec({1, 0}), vec({3, 9}));
  EXPECT_EQ(t.residual, kInf);
}

TEST(Composite, MultiplierRecovery) {
  const CompositeProblem p = plqcomp::testing::abs_square();
  const Multipliers m = multiplier_recovery(p, vec({3}));
  EXPECT_NEAR(m.z(0), 8.0, 1e-12);
  EXPECT_NEAR(m.y(0), 1.0, 1e-12);
}

TEST(Composite, FiniteDifferenceJacobianOfAffineMap) {
  const SmoothMap g = SmoothMap::from_affine((Matrix(2, 2) << 1, 2, 3, 4).finished(), vec({1, 1}));
  EXPECT_TRUE(finite_difference_jacobian(g, vec({0.3, -0.7})).isApprox(g.jacobian_at(vec({0, 0})), 1e-8));
}

// Every catalog family ships a Jacobian consistent with central differences.
TEST(Composite, CatalogJacobiansMatchFiniteDifferences) {
  for (Family f : {Family::Goal, Family::NlpPenalty, Family::Cvar, Family::LassoTaper, Family::PhaseRetrieval,
                   Family::SpatialVI}) {
    InstanceSpec spec;
    spec.family = f;
    spec.n = 3;
    spec.m = 4;
    spec.n_ineq = 1;
    spec.curvature = 0.5;
    const Instance inst = build(spec);
    Rng rng(17);
    std::vector<Vector> pts;
    for (int k = 0; k < 5; ++k) pts.push_back(inst.x0 + 0.5 * rng.normal_vector(inst.problem.n()));
    EXPECT_LT(jacobian_check(inst.problem.G(), pts), 1e-5) << to_string(f);
  }
}
