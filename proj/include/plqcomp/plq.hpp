#pragma once

#include "plqcomp/qp.hpp"

#include <optional>

namespace plqcomp {

/// h(z) = sup_{y in Y} <y, z> - 1/2 <y, Q y> with Y polyhedral and Q PSD.
class PlqFunction {
 public:
  PlqFunction(Polyhedron y_set, Matrix q);

  const Polyhedron& Y() const { return y_set_; }
  const Matrix& Q() const { return q_; }
  Index dim() const { return y_set_.dim(); }
  /// dom h is the whole space (Y^inf and null Q meet only at 0).
  bool real_valued() const { return real_valued_; }
  /// {d in Y^inf | Q d = 0}, the cone deciding membership in dom h.
  const Polyhedron& flat_recession() const { return flat_recession_; }

 private:
  Polyhedron y_set_;
  Matrix q_;
  Polyhedron flat_recession_;
  bool real_valued_ = false;
};

/// Y = {y | A^T y <= b}, Q = D J^{-1} D^T.
struct DualForm {
  Matrix A;
  Vector b;
  Matrix D;
  Matrix J;
};

struct Subgradient {
  Vector representative;
  bool unique = false;
  QpSolution argmin;
};

ExtendedReal evaluate(const PlqFunction& h, const Vector& z);

/// True iff <d, z> <= 0 on the flat recession cone (LP certificate).
bool in_domain(const PlqFunction& h, const Vector& z);

/// A point of argmin_{y in Y} 1/2 <y, Q y> - <y, z>; nullopt when z is outside dom h.
std::optional<Subgradient> subgradients(const PlqFunction& h, const Vector& z);

/// {y in Y^inf | Q y = 0, <y, z> = 0}.
Polyhedron domain_normal_cone(const PlqFunction& h, const Vector& z);

DualForm dual_form(const PlqFunction& h);

/// inf {<b, v> + 1/2 <w, J w> | A v + D w = z, v >= 0}.
ExtendedReal eval_via_dual(const PlqFunction& h, const Vector& z);

/// Same Y with Q + I / nu.
PlqFunction moreau_smoothed(const PlqFunction& h, double nu);

/// Symmetric PSD square root by eigendecomposition.
Matrix psd_sqrt(const Matrix& q);

}  // namespace plqcomp
