#pragma once

#include "plqcomp/plq.hpp"

#include <functional>
#include <optional>

namespace plqcomp {

/// G(x) = b - A x.
struct AffineData {
  Matrix A;
  Vector b;
};

/// Smooth map G : R^n -> R^m. Callbacks must be pure and reentrant.
struct SmoothMap {
  Index n = 0;
  Index m = 0;
  std::function<Vector(const Vector&)> value;
  /// Optional; central differences are used when empty.
  std::function<Matrix(const Vector&)> jacobian;
  /// Optional (x, y) -> Hessian of <y, G(.)> at x.
  std::function<Matrix(const Vector&, const Vector&)> weighted_hessian;
  std::optional<AffineData> affine;

  Vector operator()(const Vector& x) const;
  Matrix jacobian_at(const Vector& x) const;

  static SmoothMap from_affine(Matrix A, Vector b);
};

/// Central differences with step 1e-6 max(1, |x_i|).
Matrix finite_difference_jacobian(const SmoothMap& g, const Vector& x);

/// Largest relative error between the Jacobian callback and central differences.
double jacobian_check(const SmoothMap& g, const std::vector<Vector>& points);

/// min over X of h(G(x)).
class CompositeProblem {
 public:
  CompositeProblem(Polyhedron x_set, SmoothMap g, PlqFunction h);

  const Polyhedron& X() const { return x_set_; }
  const SmoothMap& G() const { return g_; }
  const PlqFunction& h() const { return h_; }
  Index n() const { return x_set_.dim(); }
  Index m() const { return h_.dim(); }

 private:
  Polyhedron x_set_;
  SmoothMap g_;
  PlqFunction h_;
};

/// Membership tolerance for X used by phi and the residual.
inline constexpr double kXTol = 1e-8;

ExtendedReal phi(const CompositeProblem& p, const Vector& x);

struct ChainSubgradient {
  Vector representative;       ///< grad G(x)^T y
  bool unique = false;         ///< the image set grad G(x)^T argmin is a single point
  Vector multiplier;           ///< y
  bool qualification_ok = false;   ///< {y in N_dom h(G x) | grad G^T y = 0} = {0}
  bool qualification_x_ok = false; ///< {y in N_dom h(G x) | -grad G^T y in N_X(x)} = {0}
};

/// Throws std::invalid_argument when phi(p, x) is not finite.
ChainSubgradient chain_subgradient(const CompositeProblem& p, const Vector& x);

struct StationarityTriple {
  Vector x;
  Vector y;
  Vector z;
  double r_G = 0;
  double r_Y = 0;
  double r_X = 0;
  double residual = 0;
};

/// dist(0, Phi(x, y, z)) with its three block parts; +inf when x is off X or y off Y.
StationarityTriple stationarity_residual(const CompositeProblem& p, const Vector& x, const Vector& y,
                                         const Vector& z);

struct Multipliers {
  Vector y;
  Vector z;
};

/// z = G(x) and y from the (nearly) optimal face of h at z, chosen to minimize the residual.
Multipliers multiplier_recovery(const CompositeProblem& p, const Vector& x);

}  // namespace plqcomp
