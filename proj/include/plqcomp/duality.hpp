#pragma once

#include "plqcomp/prox.hpp"

#include <optional>
#include <string>
#include <vector>

namespace plqcomp {

/// l(x, y) = iota_X(x) + <G(x), y> - 1/2 <y, Q y> - iota_Y(y), with +inf winning over -inf.
ExtendedReal lagrangian(const CompositeProblem& p, const Vector& x, const Vector& y);

/// sup_{x in X} <v, x>.
ExtendedReal support_function(const Polyhedron& x_set, const Vector& v);

/// psi(y) for G(x) = b - A x; requires affine data on G.
ExtendedReal dual_affine(const CompositeProblem& p, const Vector& y);

struct DualMaximum {
  QpStatus status = QpStatus::MaxIterations;
  double value = -kInf;
  Vector y;
};

/// sup_y psi(y) for affine G, as one QP in (y, mu, eta) through LP duality for the support function.
DualMaximum dual_affine_max(const CompositeProblem& p);

/// Inner global minimization scheme for n <= 3: tensor grid, restoration onto dom, prox polish.
struct GridSpec {
  Vector lower;
  Vector upper;
  int points_per_dim = 41;
  int expansions = 4;        ///< growth levels when X is unbounded
  double expand_factor = 10.0;
  bool polish = true;
  int polish_starts = 3;

  void validate(Index n) const;
};

struct DualPoint {
  Vector y;
  ExtendedReal value = ExtendedReal::plus_infinity();
  std::optional<Vector> attained_x;
  /// The value is a minimum over sampled points, so it over-estimates the true infimum.
  bool upper_estimate = true;
  /// -inf reported because sampled values fell below -1e6.
  bool certified_unbounded = false;
};

/// Estimate of inf over X of h(G(x)) for an arbitrary composite problem.
DualPoint sampled_infimum(const CompositeProblem& p, const GridSpec& grid);

/// psi(y) = inf_x l(x, y).
DualPoint dual_sampled(const CompositeProblem& p, const Vector& y, const GridSpec& grid);

struct AugValue {
  ExtendedReal value = ExtendedReal::plus_infinity();
  Vector w_hat;
  Vector grad_y;  ///< (w_hat - y) / theta
};

/// l_theta(x, y) = iota_X(x) - min_{w in Y} {1/2 <w,Qw> - <G(x),w> + |w - y|^2 / (2 theta)}.
AugValue aug_lagrangian(const CompositeProblem& p, const Vector& x, const Vector& y, double theta);

/// psi_theta(y) = inf_x l_theta(x, y).
DualPoint aug_dual_sampled(const CompositeProblem& p, const Vector& y, double theta, const GridSpec& grid);

/// Plain: f(u,x) = iota_X(x) + h(G(x) + u). Augmented adds theta |u|^2 / 2.
struct Rockafellian {
  bool augmented = false;
  double theta = 0.0;
};

/// inf_x f(u, x) for the chosen Rockafellian.
DualPoint perturbed_infimum(const CompositeProblem& p, const Rockafellian& rock, const Vector& u,
                            const GridSpec& grid);

struct ExactnessRow {
  Vector u;
  double lhs = 0;  ///< inf_x f(u, x)
  double rhs = 0;  ///< inf phi + <ybar, u>
  double margin = 0;
  bool ok = false;
};

struct ExactnessReport {
  std::vector<ExactnessRow> rows;
  bool holds = false;
  /// Smallest thetabar with lhs >= rhs - thetabar |u|^2 / 2 on the sampled u (plain values), or nullopt.
  std::optional<double> local_theta_bar;
  std::vector<std::size_t> violated;
};

ExactnessReport exactness_check(const CompositeProblem& p, const Rockafellian& rock, const Vector& ybar,
                                const std::vector<Vector>& u_samples, double inf_phi, const GridSpec& grid,
                                double tol = 1e-7);

/// Columns u,lhs,rhs,margin with u components joined by ';'.
std::string exactness_csv(const ExactnessReport& report);

struct AugParams {
  double theta = 1.0;
  std::optional<double> lambda_step;  ///< defaults to theta
  int outer_iters = 100;
  double tol = 1e-9;                  ///< Phi residual target
  int inner_max_iter = 5000;
  double inner_tol = 1e-11;           ///< projected gradient norm

  void validate() const;
};

struct AlmRecord {
  int outer = 0;
  Vector x;
  Vector y;
  Vector w_hat;
  double residual = 0;
  int inner_iterations = 0;
};

struct AlmTrace {
  std::vector<AlmRecord> records;
  StationarityTriple final_triple;
  bool converged = false;
};

AlmTrace alm_solve(const CompositeProblem& p, const AugParams& params, const Vector& x0, const Vector& y0);

}  // namespace plqcomp
