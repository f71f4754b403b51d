#pragma once

#include "plqcomp/composite.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace plqcomp {

struct ProxParams {
  double tau = 2.0;
  double sigma = 0.1;
  double lambda_max = 10.0;
  double lambda0 = 1.0;
  double stop_tol = 1e-8;  ///< on |xbar - x|
  int max_iter = 500;
  int max_backtracks = 60;
  /// Also stop once the stationarity residual of an accepted iterate is at most this.
  std::optional<double> residual_tol;

  void validate() const;
};

enum class Termination { StepConverged, ResidualConverged, MaxIterations, BacktrackLimit, SubproblemFailure };

const char* to_string(Termination t);

struct IterationRecord {
  int iter = 0;
  Vector x;  ///< accepted iterate
  double lambda = 0;
  double phi = 0;
  double model_decrease = 0;
  double actual_decrease = 0;
  double step_norm = 0;
  double residual = 0;
  int backtracks = 0;
};

struct SolveTrace {
  std::vector<IterationRecord> iterations;
  StationarityTriple final_triple;
  Termination termination = Termination::MaxIterations;
  Vector x;
  double phi = kInf;
  int total_backtracks = 0;
};

struct ProxStep {
  Vector x;
  Vector y;  ///< multiplier of the linearized constraint, a point of Y
  Vector z;  ///< G(xnu) + grad G(xnu) (x - xnu)
  Vector qp_solution;
};

/// argmin over X of h(G(xnu) + grad G(xnu)(x - xnu)) + |x - xnu|^2 / (2 lambda), solved
/// as one QP through the dual form of h. nullopt when the linearization misses dom h.
std::optional<ProxStep> prox_subproblem(const CompositeProblem& p, const Vector& xnu, double lambda,
                                        const std::optional<Vector>& warm_start = std::nullopt);

SolveTrace prox_solve(const CompositeProblem& p, const ProxParams& params, const Vector& x0);

/// Columns iter,phi,lambda,step_norm,residual,backtracks.
std::string trace_csv(const SolveTrace& trace);

enum class ScheduleKind { MoreauSmoothing, ExactPenalty, Custom };

struct ApproxSchedule {
  ScheduleKind kind = ScheduleKind::Custom;
  std::vector<int> nu;
  std::vector<double> eps;
  std::vector<double> theta;  ///< ExactPenalty only

  void validate() const;
  std::size_t size() const { return nu.size(); }
};

/// Stage index -> approximating problem.
using ProblemFamily = std::function<CompositeProblem(std::size_t)>;

struct StageResult {
  int nu = 0;
  double eps = 0;
  SolveTrace trace;
  bool met = false;  ///< dist(0, Phi_nu) <= eps_nu at the stage output
};

/// Runs prox_solve per stage, warm-started at the previous stage output, until the
/// stage residual reaches eps_nu. Stops early when an inner solve fails.
std::vector<StageResult> consistent_solve(const ProblemFamily& family, const ApproxSchedule& schedule,
                                          const Vector& x0, const ProxParams& params = {});

/// Y replaced by {1} x [-theta, theta]^m x [0, theta]^q for Y = {1} x R^m x [0, inf)^q.
Polyhedron penalty_family(const Polyhedron& y_set, double theta);

/// Stage k uses Q + I / nu_k.
ProblemFamily moreau_family(const CompositeProblem& base, const ApproxSchedule& schedule);

/// Stage k uses penalty_family(Y, theta_k).
ProblemFamily penalty_problem_family(const CompositeProblem& base, const ApproxSchedule& schedule);

}  // namespace plqcomp
