#pragma once

#include "plqcomp/composite.hpp"

#include <string>
#include <vector>

namespace plqcomp {

/// Closed interval of the extended line; infinite ends are open in effect.
struct Interval {
  double lo = 0;
  double hi = 0;
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Finite union of closed intervals, kept sorted and merged.
class IntervalSet {
 public:
  IntervalSet() = default;
  static IntervalSet empty() { return {}; }
  static IntervalSet all() { return interval(-kInf, kInf); }
  static IntervalSet point(double a) { return interval(a, a); }
  static IntervalSet interval(double lo, double hi);

  const std::vector<Interval>& pieces() const { return pieces_; }
  bool is_empty() const { return pieces_.empty(); }
  bool contains(double u, double tol = 0.0) const;
  double min() const;
  double max() const;

  IntervalSet unite(const IntervalSet& other) const;
  IntervalSet scaled(double factor) const;
  IntervalSet shifted(double offset) const;
  /// Minkowski sum.
  IntervalSet plus(const IntervalSet& other) const;

  friend bool operator==(const IntervalSet& a, const IntervalSet& b) { return a.pieces_ == b.pieces_; }

 private:
  void add(Interval piece);
  std::vector<Interval> pieces_;
};

std::string to_string(const IntervalSet& set);

using Point2 = Eigen::Vector2d;

/// Connected planar polyline: a ray into vertices.front(), segments between
/// consecutive vertices, and a ray out of vertices.back().
struct PolylineGraph {
  std::vector<Point2> vertices;
  Point2 start_dir;  ///< direction of the leading ray, pointing away from vertices.front()
  Point2 end_dir;    ///< direction of the trailing ray, pointing away from vertices.back()

  void validate() const;
  /// Distance from p to the polyline.
  double distance(const Point2& p) const;
};

/// Convex cone {n | <n, r> <= 0 for r in rays} or, when is_line, span{direction}.
struct PlanarCone {
  bool is_line = false;
  Point2 direction = Point2::Zero();
  std::vector<Point2> rays;

  bool contains(const Point2& n, double tol = 1e-12) const;
  /// {a | (a, b) in cone}.
  IntervalSet slice(double b) const;
};

struct ConeUnion {
  std::vector<PlanarCone> cones;  ///< empty list means the empty set
  bool contains(const Point2& n, double tol = 1e-12) const;
};

/// Limiting normal cone to the polyline at p; empty off the graph (tolerance 1e-10).
ConeUnion graph_normal_cone(const PolylineGraph& g, const Point2& p);

/// D*S(p)(v) = {u | (u, -v) in N_gph(p)}.
IntervalSet coderivative(const PolylineGraph& g, const Point2& p, double v);

/// 1-D h(z) = sup_{y in [lower, upper]} y z - q y^2 / 2.
struct Plq1d {
  double lower = -kInf;
  double upper = kInf;
  double q = 0.0;

  double value(double z) const;
  /// Graph of the subgradient mapping.
  PolylineGraph subgradient_graph() const;
  bool is_subgradient(double z, double y, double tol = 1e-12) const;
};

/// Reads the interval and scalar Q off a PlqFunction with m = 1.
Plq1d to_plq1d(const PlqFunction& h);

/// d^2 f(xbar, ybar)(v); throws std::invalid_argument when ybar is not in df(xbar).
IntervalSet second_subdiff_1d(const PlqFunction& f, double xbar, double ybar, double v);
IntervalSet second_subdiff_1d(const Plq1d& f, double xbar, double ybar, double v);

/// Positive definite within 1e-10; throws for asymmetric input.
bool tilt_stable_smooth(const Matrix& hessian);

/// <u, v> > 0 for all v != 0 and u in d^2 f(xbar, 0)(v). Requires 0 in df(xbar).
bool tilt_stable_1d(const PlqFunction& f, double xbar);
bool tilt_stable_1d(const Plq1d& f, double xbar);

struct TiltOracleOptions {
  double delta = 0.5;
  double grid_step = 1e-4;
  double lipschitz_bound = 50.0;
};

/// Brute force on the tilted argmin map M(y) over a dense grid of [xbar - delta, xbar + delta].
bool tilt_oracle_1d(const Plq1d& f, double xbar, const std::vector<double>& y_grid,
                    const TiltOracleOptions& options = {});
bool tilt_oracle_1d(const PlqFunction& f, double xbar, const std::vector<double>& y_grid,
                    const TiltOracleOptions& options = {});

/// d^2 iota_Y(y, w)(v) for an interval Y = [lower, upper].
IntervalSet nys_interval(double lower, double upper, double y, double w, double v);

/// Graph of N_Y for Y = [lower, upper].
PolylineGraph normal_map_graph(double lower, double upper);

enum class TiltVerdict { Stable, Unstable, Unsupported };
const char* to_string(TiltVerdict verdict);

/// Second-order test for h(G(x)) at xbar with n = 1, Y a box and Q diagonal
/// (all zero or all positive). Any other setting is Unsupported.
TiltVerdict tilt_composite(const CompositeProblem& p, const Vector& xbar);

}  // namespace plqcomp
