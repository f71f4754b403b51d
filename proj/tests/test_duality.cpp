#include "fixtures.hpp"

#include <gtest/gtest.h>

using namespace plqcomp;
using plqcomp::testing::vec;

namespace {

GridSpec grid(double r) {
  GridSpec g;
  g.lower = Vector::Constant(1, -r);
  g.upper = Vector::Constant(1, r);
  return g;
}

}  // namespace

TEST(Duality, LagrangianConventions) {
  const CompositeProblem c = plqcomp::testing::duality_counterexample();
  EXPECT_DOUBLE_EQ(lagrangian(c, vec({0.5}), vec({1, 2})).value(), 0.5 + 2 * 0.25);
  EXPECT_EQ(lagrangian(c, vec({0.5}), vec({0.5, 2})), ExtendedReal::minus_infinity());
  EXPECT_EQ(lagrangian(c, vec({3}), vec({0.5, 2})), ExtendedReal::plus_infinity());
}

TEST(Duality, SupportFunction) {
  const Polyhedron box = Polyhedron::box(vec({-1, 0}), vec({1, 2}));
  EXPECT_DOUBLE_EQ(support_function(box, vec({1, 1})).value(), 3.0);
  EXPECT_EQ(support_function(Polyhedron::orthant(1), vec({1})), ExtendedReal::plus_infinity());
}

TEST(Duality, CounterexampleDualFunction) {
  const CompositeProblem c = plqcomp::testing::duality_counterexample();
  for (double y2 : {0.0, 0.25, 0.45, 0.5, 1.0, 3.0}) {
    const double expected = y2 < 0.5 ? -1.0 + y2 : -1.0 / (4.0 * y2);
    EXPECT_NEAR(dual_sampled(c, vec({1, y2}), grid(1)).value.value(), expected, 1e-6) << "y2 " << y2;
  }
  EXPECT_EQ(dual_sampled(c, vec({0.5, 1}), grid(1)).value, ExtendedReal::minus_infinity());
}

TEST(Duality, AffineStrongDuality) {
  InstanceSpec spec;
  spec.family = Family::Cvar;
  spec.n = 3;
  spec.m = 5;
  spec.alpha = 0.6;
  const Instance inst = build(spec);
  const DualMaximum d = dual_affine_max(inst.problem);
  ASSERT_EQ(d.status, QpStatus::Optimal);
  EXPECT_NEAR(d.value, cvar_ru_reference(inst), 1e-7);
  EXPECT_NEAR(dual_affine(inst.problem, d.y).value(), d.value, 1e-7);
}

TEST(Duality, NonlinearPlainDualIsMinusInfinity) {
  const CompositeProblem p = plqcomp::testing::nonlinear_instance();
  const DualPoint d = dual_sampled(p, vec({1, 0.3}), grid(2));
  EXPECT_EQ(d.value, ExtendedReal::minus_infinity());
  EXPECT_TRUE(d.certified_unbounded);
}

TEST(Duality, AugmentedLagrangianValue) {
  const CompositeProblem p = plqcomp::testing::nonlinear_instance();
  // l_theta(x, (1, y1)) = -x^2 + y1 x + theta x^2 / 2
  const AugValue v = aug_lagrangian(p, vec({0.5}), vec({1, 0.2}), 4.0);
  EXPECT_NEAR(v.value.value(), -0.25 + 0.1 + 0.5, 1e-10);
  EXPECT_NEAR(aug_dual_sampled(p, vec({1, 0}), 2.0, grid(2)).value.value(), 0.0, 1e-8);
}

TEST(Duality, ExactnessPlainVersusAugmented) {
  const CompositeProblem p = plqcomp::testing::nonlinear_instance();
  std::vector<Vector> us;
  for (double a = -1; a <= 1.001; a += 0.5)
    for (double b = -1; b <= 1.001; b += 0.5) us.push_back(vec({a, b}));
  const ExactnessReport plain = exactness_check(p, {false, 0.0}, vec({1, 0}), us, 0.0, grid(2));
  EXPECT_FALSE(plain.holds);
  ASSERT_TRUE(plain.local_theta_bar);
  EXPECT_NEAR(*plain.local_theta_bar, 2.0, 1e-6);
  const ExactnessReport aug = exactness_check(p, {true, 2.0}, vec({1, 0}), us, 0.0, grid(2));
  EXPECT_TRUE(aug.holds);
  const std::string csv = exactness_csv(aug);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "u,lhs,rhs,margin");
}

TEST(Duality, AugmentedLagrangianMethod) {
  const CompositeProblem p = plqcomp::testing::nonlinear_instance();
  AugParams params;
  params.theta = 4.0;
  params.lambda_step = 2.0;
  const AlmTrace t = alm_solve(p, params, vec({0.7}), vec({1, 0.5}));
  EXPECT_TRUE(t.converged);
  EXPECT_NEAR(t.final_triple.x(0), 0.0, 1e-6);
  EXPECT_NEAR(t.final_triple.y(1), 0.0, 1e-6);
  EXPECT_LE(t.final_triple.residual, 1e-6);
}

TEST(Duality, GridValidation) {
  GridSpec g;
  g.lower = Vector::Zero(4);
  g.upper = Vector::Ones(4);
  EXPECT_THROW(g.validate(4), std::invalid_argument);
}
