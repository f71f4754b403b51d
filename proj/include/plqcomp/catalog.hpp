#pragma once

#include "plqcomp/composite.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace plqcomp {

/// 64-bit linear congruential generator (Knuth MMIX constants); doubles take the top 53 bits.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  double uniform();  ///< [0, 1)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();   ///< Box-Muller
  Vector normal_vector(Index n);
  Matrix normal_matrix(Index rows, Index cols);

 private:
  std::uint64_t state_;
};

enum class Family { Goal, NlpPenalty, Cvar, LassoTaper, PhaseRetrieval, SpatialVI };

const char* to_string(Family family);
Family family_from_string(const std::string& name);

struct InstanceSpec {
  Family family = Family::Goal;
  Index n = 2;
  Index m = 2;
  std::uint64_t seed = 1;

  // Goal: g_i(x) = <a_i, x> + c_i + curvature |x|^2 / 2 compared with target tau_i
  Vector targets;    ///< tau, default zeros
  Vector penalties;  ///< alpha_i, default ones
  double curvature = 0.0;

  // NlpPenalty: min |x - center|^2 / 2 s.t. |x|^2 = radius2, extra affine equalities and inequalities
  std::optional<Vector> center;
  double radius2 = 0.0;  ///< 0 selects n
  Index n_eq = 1;
  Index n_ineq = 0;

  // Cvar: affine g_i, X = [-1, 1]^n
  Vector probabilities;  ///< default uniform
  double alpha = 0.5;

  // LassoTaper
  double theta = 0.1;
  bool taper = true;

  // SpatialVI: m producers, n regions, shipments capped by capacity
  double capacity = 10.0;

  void validate() const;
};

struct Instance {
  InstanceSpec spec;
  CompositeProblem problem;
  Vector x0;
  std::optional<Vector> planted;
  /// Affine scenario data g(x) = offsets + slopes x (Goal, Cvar).
  Matrix slopes;
  Vector offsets;
  /// SpatialVI: F(x) = f0 + M x over C.
  Matrix vi_matrix;
  Vector vi_offset;
};

Instance build(const InstanceSpec& spec);

/// The smooth taper of the lasso example at t (theta scaled).
double taper_value(double t, double theta);
double taper_derivative(double t, double theta);

/// Rockafellar-Uryasev LP optimum for a Cvar instance.
double cvar_ru_reference(const Instance& instance);

/// sup_{y in C} <F(x), x - y>; throws when x is outside C.
double vi_merit(const Instance& instance, const Vector& x);

/// Equilibrium from the KKT system of the symmetric affine VI (a QP over C).
Vector vi_kkt_solution(const Instance& instance);

/// Same X and G with a different Q.
CompositeProblem with_q(const CompositeProblem& p, const Matrix& q);

}  // namespace plqcomp
