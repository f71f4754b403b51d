#pragma once

#include "plqcomp/types.hpp"

#include <vector>

namespace plqcomp {

/// Active-set tolerance used when reading off normal cones.
inline constexpr double kActiveTol = 1e-8;

/// Polyhedral set {x | A_e x = b_e, D x <= d} in R^dim.
///
/// The (A_e, b_e, D, d) form is the only stored representation; boxes,
/// orthants and simplices are constructor sugar on top of it.
class Polyhedron {
 public:
  Polyhedron(Matrix eq_matrix, Vector eq_rhs, Matrix ineq_matrix, Vector ineq_rhs);

  static Polyhedron whole_space(Index dim);
  /// Box with possibly infinite bounds; infinite sides produce no row.
  static Polyhedron box(const Vector& lower, const Vector& upper);
  static Polyhedron orthant(Index dim);
  /// {y >= 0, sum y = total}.
  static Polyhedron simplex(Index dim, double total = 1.0);
  static Polyhedron halfspace(const Vector& normal, double rhs);
  static Polyhedron point(const Vector& p);
  /// Cartesian product a x b.
  static Polyhedron product(const Polyhedron& a, const Polyhedron& b);

  Index dim() const { return dim_; }
  const Matrix& eq_matrix() const { return eq_matrix_; }
  const Vector& eq_rhs() const { return eq_rhs_; }
  const Matrix& ineq_matrix() const { return ineq_matrix_; }
  const Vector& ineq_rhs() const { return ineq_rhs_; }
  Index num_eq() const { return eq_matrix_.rows(); }
  Index num_ineq() const { return ineq_matrix_.rows(); }

  /// Intersection with extra equality rows.
  Polyhedron with_equalities(const Matrix& rows, const Vector& rhs) const;
  /// Intersection with extra inequality rows.
  Polyhedron with_inequalities(const Matrix& rows, const Vector& rhs) const;
  Polyhedron intersect(const Polyhedron& other) const;

 private:
  Index dim_;
  Matrix eq_matrix_;
  Vector eq_rhs_;
  Matrix ineq_matrix_;
  Vector ineq_rhs_;
};

/// True iff all equalities and inequalities hold within tol.
bool contains(const Polyhedron& set, const Vector& x, double tol = 0.0);

/// Largest constraint violation of x (0 when x is in the set).
double max_violation(const Polyhedron& set, const Vector& x);

/// N_C(xbar) = {A_e^T y + D_A^T z : z >= 0} with A the rows active at xbar.
struct ConeDescription {
  Matrix span_rows;            ///< rows are free directions (equality normals)
  Matrix gen_rows;             ///< rows are nonnegatively weighted generators
  Vector base_point;
  std::vector<Index> active;   ///< indices of active inequality rows
  bool empty = false;          ///< xbar outside the set: N = empty set

  Index dim() const { return base_point.size(); }
  static ConeDescription empty_cone(const Vector& base_point);
};

ConeDescription normal_cone(const Polyhedron& set, const Vector& xbar, double tol = kActiveTol);

/// Euclidean distance from v to the cone; +inf for the empty cone.
double dist_to_cone(const ConeDescription& cone, const Vector& v);

/// {y | A_e y = 0, D y <= 0}. Throws std::invalid_argument when the set is empty.
Polyhedron recession_cone(const Polyhedron& set);

/// Basic feasible points of a bounded polyhedron with dim <= 6, deduplicated within 1e-9.
std::vector<Vector> vertices(const Polyhedron& set);

/// max over d in cone, |d|_inf <= 1, of |(image d)_j| across j.
/// The cone must be given with zero right-hand sides.
double cone_image_radius(const Polyhedron& cone, const Matrix& image);

/// True iff the polyhedral cone is {0} (LP certificate, threshold 1e-7).
bool cone_is_trivial(const Polyhedron& cone);

/// Nonempty test by phase-1 LP.
bool is_nonempty(const Polyhedron& set);

/// Bounded test: recession cone trivial.
bool is_bounded(const Polyhedron& set);

}  // namespace plqcomp
