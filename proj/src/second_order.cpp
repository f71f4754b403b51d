#include "plqcomp/second_order.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <sstream>

namespace plqcomp {

IntervalSet IntervalSet::interval(double lo, double hi) {
  IntervalSet s;
  if (lo <= hi) s.add({lo, hi});
  return s;
}

void IntervalSet::add(Interval piece) {
  if (piece.lo > piece.hi) return;
  pieces_.push_back(piece);
  std::sort(pieces_.begin(), pieces_.end(), [](const Interval& a, const Interval& b) {
    return a.lo < b.lo || (a.lo == b.lo && a.hi < b.hi);
  });
  std::vector<Interval> merged;
  for (const Interval& p : pieces_) {
    if (!merged.empty() && p.lo <= merged.back().hi) merged.back().hi = std::max(merged.back().hi, p.hi);
    else merged.push_back(p);
  }
  pieces_ = std::move(merged);
}

bool IntervalSet::contains(double u, double tol) const {
  return std::any_of(pieces_.begin(), pieces_.end(),
                     [&](const Interval& p) { return u >= p.lo - tol && u <= p.hi + tol; });
}

double IntervalSet::min() const {
  if (pieces_.empty()) throw std::domain_error("IntervalSet::min of the empty set");
  return pieces_.front().lo;
}

double IntervalSet::max() const {
  if (pieces_.empty()) throw std::domain_error("IntervalSet::max of the empty set");
  return pieces_.back().hi;
}

IntervalSet IntervalSet::unite(const IntervalSet& other) const {
  IntervalSet out = *this;
  for (const Interval& p : other.pieces_) out.add(p);
  return out;
}

IntervalSet IntervalSet::scaled(double factor) const {
  IntervalSet out;
  for (const Interval& p : pieces_) {
    if (factor == 0.0) out.add({0.0, 0.0});
    else if (factor > 0) out.add({p.lo * factor, p.hi * factor});
    else out.add({p.hi * factor, p.lo * factor});
  }
  return out;
}

IntervalSet IntervalSet::shifted(double offset) const {
  IntervalSet out;
  for (const Interval& p : pieces_) out.add({p.lo + offset, p.hi + offset});
  return out;
}

IntervalSet IntervalSet::plus(const IntervalSet& other) const {
  IntervalSet out;
  for (const Interval& a : pieces_)
    for (const Interval& b : other.pieces_) out.add({a.lo + b.lo, a.hi + b.hi});
  return out;
}

std::string to_string(const IntervalSet& set) {
  if (set.is_empty()) return "{}";
  std::ostringstream out;
  bool first = true;
  for (const Interval& p : set.pieces()) {
    if (!first) out << " U ";
    first = false;
    if (p.lo == p.hi) out << '{' << p.lo << '}';
    else out << (std::isinf(p.lo) ? "(" : "[") << p.lo << ", " << p.hi << (std::isinf(p.hi) ? ")" : "]");
  }
  return out.str();
}

namespace {

double cross(const Point2& a, const Point2& b) { return a.x() * b.y() - a.y() * b.x(); }

// Distance from p to the ray or segment starting at a with direction d (segment when len finite).
double piece_distance(const Point2& p, const Point2& a, const Point2& d, bool bounded, double* param) {
  const double t_raw = (p - a).dot(d) / d.squaredNorm();
  const double t = std::max(0.0, bounded ? std::min(1.0, t_raw) : t_raw);
  if (param) *param = t;
  return (a + t * d - p).norm();
}

Point2 normal_of(const Point2& r) { return Point2(r.y(), -r.x()); }

}  // namespace

void PolylineGraph::validate() const {
  if (vertices.empty()) throw std::invalid_argument("PolylineGraph: no vertices");
  if (start_dir.norm() == 0.0 || end_dir.norm() == 0.0)
    throw std::invalid_argument("PolylineGraph: zero ray direction");
  for (std::size_t i = 1; i < vertices.size(); ++i)
    if ((vertices[i] - vertices[i - 1]).norm() == 0.0)
      throw std::invalid_argument("PolylineGraph: repeated vertex");
}

double PolylineGraph::distance(const Point2& p) const {
  validate();
  double best = piece_distance(p, vertices.front(), start_dir, false, nullptr);
  best = std::min(best, piece_distance(p, vertices.back(), end_dir, false, nullptr));
  for (std::size_t i = 1; i < vertices.size(); ++i)
    best = std::min(best, piece_distance(p, vertices[i - 1], vertices[i] - vertices[i - 1], true, nullptr));
  return best;
}

bool PlanarCone::contains(const Point2& n, double tol) const {
  if (is_line) return std::abs(cross(n, direction)) <= tol * std::max(1.0, n.norm() * direction.norm());
  return std::all_of(rays.begin(), rays.end(),
                     [&](const Point2& r) { return n.dot(r) <= tol * std::max(1.0, n.norm() * r.norm()); });
}

IntervalSet PlanarCone::slice(double b) const {
  if (is_line) {
    if (direction.y() != 0.0) return IntervalSet::point(b * direction.x() / direction.y());
    if (b != 0.0) return IntervalSet::empty();
    return direction.x() != 0.0 ? IntervalSet::all() : IntervalSet::point(0.0);
  }
  double lo = -kInf;
  double hi = kInf;
  for (const Point2& r : rays) {
    // a r_x + b r_y <= 0
    if (r.x() > 0) hi = std::min(hi, -b * r.y() / r.x());
    else if (r.x() < 0) lo = std::max(lo, -b * r.y() / r.x());
    else if (b * r.y() > 0) return IntervalSet::empty();
  }
  return IntervalSet::interval(lo == 0.0 ? 0.0 : lo, hi == 0.0 ? 0.0 : hi);
}

bool ConeUnion::contains(const Point2& n, double tol) const {
  return std::any_of(cones.begin(), cones.end(), [&](const PlanarCone& c) { return c.contains(n, tol); });
}

ConeUnion graph_normal_cone(const PolylineGraph& g, const Point2& p) {
  g.validate();
  constexpr double kOnGraph = 1e-10;
  ConeUnion out;
  const std::size_t k = g.vertices.size();
  for (std::size_t i = 0; i < k; ++i) {
    if ((g.vertices[i] - p).norm() > kOnGraph) continue;
    const Point2 r1 = i == 0 ? g.start_dir : Point2(g.vertices[i - 1] - g.vertices[i]);
    const Point2 r2 = i + 1 == k ? g.end_dir : Point2(g.vertices[i + 1] - g.vertices[i]);
    PlanarCone regular;
    regular.rays = {r1, r2};
    out.cones.push_back(regular);
    for (const Point2& r : {r1, r2}) {
      PlanarCone line;
      line.is_line = true;
      line.direction = normal_of(r);
      out.cones.push_back(line);
    }
    return out;
  }
  auto add_line = [&](const Point2& d) {
    PlanarCone line;
    line.is_line = true;
    line.direction = normal_of(d);
    out.cones.push_back(line);
  };
  if (piece_distance(p, g.vertices.front(), g.start_dir, false, nullptr) <= kOnGraph) {
    add_line(g.start_dir);
    return out;
  }
  if (piece_distance(p, g.vertices.back(), g.end_dir, false, nullptr) <= kOnGraph) {
    add_line(g.end_dir);
    return out;
  }
  for (std::size_t i = 1; i < k; ++i) {
    const Point2 d = g.vertices[i] - g.vertices[i - 1];
    if (piece_distance(p, g.vertices[i - 1], d, true, nullptr) <= kOnGraph) {
      add_line(d);
      return out;
    }
  }
  return out;
}

IntervalSet coderivative(const PolylineGraph& g, const Point2& p, double v) {
  const ConeUnion cone = graph_normal_cone(g, p);
  IntervalSet out;
  for (const PlanarCone& c : cone.cones) out = out.unite(c.slice(-v));
  return out;
}

double Plq1d::value(double z) const {
  if (q > 0) {
    const double y = std::clamp(z / q, lower, upper);
    return y * z - 0.5 * q * y * y;
  }
  if (z > 0) return std::isinf(upper) ? kInf : upper * z;
  if (z < 0) return std::isinf(lower) ? kInf : lower * z;
  return 0.0;
}

PolylineGraph Plq1d::subgradient_graph() const {
  if (lower > upper) throw std::invalid_argument("Plq1d: empty interval");
  if (q < 0) throw std::invalid_argument("Plq1d: negative q");
  const bool lo_fin = std::isfinite(lower);
  const bool up_fin = std::isfinite(upper);
  PolylineGraph g;
  const Point2 left(-1, 0);
  const Point2 right(1, 0);
  const Point2 diag_back = q > 0 ? Point2(-q, -1) : Point2(0, -1);
  const Point2 diag_fwd = q > 0 ? Point2(q, 1) : Point2(0, 1);
  if (lo_fin && up_fin) {
    g.vertices.push_back(Point2(q * lower, lower));
    if (upper > lower) g.vertices.push_back(Point2(q * upper, upper));
    g.start_dir = left;
    g.end_dir = right;
  } else if (up_fin) {
    g.vertices.push_back(Point2(q * upper, upper));
    g.start_dir = diag_back;
    g.end_dir = right;
  } else if (lo_fin) {
    g.vertices.push_back(Point2(q * lower, lower));
    g.start_dir = left;
    g.end_dir = diag_fwd;
  } else {
    g.vertices.push_back(Point2(0, 0));
    g.start_dir = diag_back;
    g.end_dir = diag_fwd;
  }
  return g;
}

bool Plq1d::is_subgradient(double z, double y, double tol) const {
  if (y < lower - tol || y > upper + tol) return false;
  const double r = z - q * y;
  const double scale = tol * (1.0 + std::abs(z) + std::abs(q * y));
  const bool at_lower = std::abs(y - lower) <= tol;
  const bool at_upper = std::abs(y - upper) <= tol;
  if (at_lower && at_upper) return true;
  if (at_lower) return r <= scale;
  if (at_upper) return r >= -scale;
  return std::abs(r) <= scale;
}

Plq1d to_plq1d(const PlqFunction& h) {
  if (h.dim() != 1) throw std::invalid_argument("to_plq1d: h must act on R");
  Plq1d f;
  f.q = h.Q()(0, 0);
  for (double sign : {1.0, -1.0}) {
    const QpSolution lp = solve_qp(QpProblem(Matrix::Zero(1, 1), Vector::Constant(1, sign), h.Y()));
    double bound = sign > 0 ? -kInf : kInf;
    if (lp.optimal()) bound = lp.x(0);
    else if (lp.status != QpStatus::Unbounded) throw std::runtime_error("to_plq1d: bound LP failed");
    (sign > 0 ? f.lower : f.upper) = bound;
  }
  return f;
}

IntervalSet second_subdiff_1d(const Plq1d& f, double xbar, double ybar, double v) {
  if (!f.is_subgradient(xbar, ybar, 1e-10))
    throw std::invalid_argument("second_subdiff_1d: ybar is not a subgradient at xbar");
  return coderivative(f.subgradient_graph(), Point2(xbar, ybar), v);
}

IntervalSet second_subdiff_1d(const PlqFunction& f, double xbar, double ybar, double v) {
  return second_subdiff_1d(to_plq1d(f), xbar, ybar, v);
}

bool tilt_stable_smooth(const Matrix& hessian) {
  if (hessian.rows() != hessian.cols() || hessian.rows() == 0)
    throw std::invalid_argument("tilt_stable_smooth: matrix must be square");
  if ((hessian - hessian.transpose()).cwiseAbs().maxCoeff() > 1e-10)
    throw std::invalid_argument("tilt_stable_smooth: matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (hessian + hessian.transpose()), Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff() > 1e-10;
}

bool tilt_stable_1d(const Plq1d& f, double xbar) {
  if (!f.is_subgradient(xbar, 0.0, 1e-10)) throw std::invalid_argument("tilt_stable_1d: 0 is not a subgradient");
  for (double v : {1.0, -1.0}) {
    const IntervalSet s = second_subdiff_1d(f, xbar, 0.0, v);
    if (s.is_empty()) continue;
    if (v > 0 ? !(s.min() > 0) : !(s.max() < 0)) return false;
  }
  return true;
}

bool tilt_stable_1d(const PlqFunction& f, double xbar) { return tilt_stable_1d(to_plq1d(f), xbar); }

bool tilt_oracle_1d(const Plq1d& f, double xbar, const std::vector<double>& y_grid,
                    const TiltOracleOptions& options) {
  if (y_grid.empty()) throw std::invalid_argument("tilt_oracle_1d: empty tilt grid");
  const double step = options.grid_step;
  const long count = std::lround(2.0 * options.delta / step);
  std::vector<double> xs(static_cast<std::size_t>(count + 1));
  std::vector<double> fx(xs.size());
  for (long i = 0; i <= count; ++i) {
    xs[static_cast<std::size_t>(i)] = xbar - options.delta + static_cast<double>(i) * step;
    fx[static_cast<std::size_t>(i)] = f.value(xs[static_cast<std::size_t>(i)]);
  }
  std::vector<double> tilts = y_grid;
  std::sort(tilts.begin(), tilts.end());
  bool has_zero = false;
  double prev_y = 0.0;
  double prev_m = 0.0;
  bool have_prev = false;
  for (double y : tilts) {
    double best = kInf;
    for (std::size_t i = 0; i < xs.size(); ++i)
      if (std::isfinite(fx[i])) best = std::min(best, fx[i] - y * xs[i]);
    if (!std::isfinite(best)) return false;
    const double tol = 1e-12 * (1.0 + std::abs(best));
    std::size_t first = xs.size();
    std::size_t last = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (std::isfinite(fx[i]) && fx[i] - y * xs[i] <= best + tol) {
        first = std::min(first, i);
        last = i;
      }
    }
    if (static_cast<double>(last - first) * step > 1.5 * step) return false;
    const double m = 0.5 * (xs[first] + xs[last]);
    if (y == 0.0) {
      has_zero = true;
      if (std::abs(m - xbar) > step) return false;
    }
    if (have_prev && std::abs(m - prev_m) - 2.0 * step > options.lipschitz_bound * (y - prev_y)) return false;
    prev_y = y;
    prev_m = m;
    have_prev = true;
  }
  return has_zero;
}

bool tilt_oracle_1d(const PlqFunction& f, double xbar, const std::vector<double>& y_grid,
                    const TiltOracleOptions& options) {
  return tilt_oracle_1d(to_plq1d(f), xbar, y_grid, options);
}

PolylineGraph normal_map_graph(double lower, double upper) {
  if (lower > upper) throw std::invalid_argument("normal_map_graph: empty interval");
  const bool lo_fin = std::isfinite(lower);
  const bool up_fin = std::isfinite(upper);
  PolylineGraph g;
  if (lo_fin && up_fin) {
    g.vertices.push_back(Point2(lower, 0));
    if (upper > lower) g.vertices.push_back(Point2(upper, 0));
    g.start_dir = Point2(0, -1);
    g.end_dir = Point2(0, 1);
  } else if (up_fin) {
    g.vertices.push_back(Point2(upper, 0));
    g.start_dir = Point2(-1, 0);
    g.end_dir = Point2(0, 1);
  } else if (lo_fin) {
    g.vertices.push_back(Point2(lower, 0));
    g.start_dir = Point2(0, -1);
    g.end_dir = Point2(1, 0);
  } else {
    g.vertices.push_back(Point2(0, 0));
    g.start_dir = Point2(-1, 0);
    g.end_dir = Point2(1, 0);
  }
  return g;
}

IntervalSet nys_interval(double lower, double upper, double y, double w, double v) {
  return coderivative(normal_map_graph(lower, upper), Point2(y, w), v);
}

const char* to_string(TiltVerdict verdict) {
  switch (verdict) {
    case TiltVerdict::Stable: return "stable";
    case TiltVerdict::Unstable: return "unstable";
    case TiltVerdict::Unsupported: return "unsupported";
  }
  return "unknown";
}

TiltVerdict tilt_composite(const CompositeProblem& p, const Vector& xbar) {
  if (p.n() != 1 || xbar.size() != 1) return TiltVerdict::Unsupported;
  const Matrix& q = p.h().Q();
  const Index m = p.m();
  if (!q.isDiagonal(0.0)) return TiltVerdict::Unsupported;
  const bool q_zero = q.isZero(0.0);
  if (!q_zero && q.diagonal().minCoeff() <= 0.0) return TiltVerdict::Unsupported;
  const Polyhedron& y = p.h().Y();
  auto single_nonzero = [](const Matrix& rows) {
    for (Index i = 0; i < rows.rows(); ++i)
      if ((rows.row(i).array() != 0.0).count() > 1) return false;
    return true;
  };
  if (!single_nonzero(y.eq_matrix()) || !single_nonzero(y.ineq_matrix())) return TiltVerdict::Unsupported;
  if (!p.G().weighted_hessian) return TiltVerdict::Unsupported;
  if (!phi(p, xbar).is_finite()) return TiltVerdict::Unsupported;

  const ChainSubgradient chain = chain_subgradient(p, xbar);
  if (!chain.qualification_ok) return TiltVerdict::Unsupported;
  const Vector z = p.G()(xbar);
  const auto sub = subgradients(p.h(), z);
  if (!sub) return TiltVerdict::Unsupported;
  const Vector grad = p.G().jacobian_at(xbar).col(0);
  Vector ybar = sub->representative;
  if (sub->unique) {
    if (chain.representative.norm() > 1e-9) return TiltVerdict::Unstable;
  } else {
    if (!q_zero) return TiltVerdict::Unsupported;
    Polyhedron stationary = y.with_equalities(grad.transpose(), Vector::Zero(1));
    if (z.norm() > 0.0)
      stationary = stationary.with_equalities(z.transpose(), Vector::Constant(1, evaluate(p.h(), z).value()));
    if (!is_nonempty(stationary)) return TiltVerdict::Unstable;
    for (Index i = 0; i < m; ++i) {
      const Vector e = Vector::Unit(m, i);
      const QpSolution lo = solve_qp(QpProblem(Matrix::Zero(m, m), e, stationary));
      const QpSolution hi = solve_qp(QpProblem(Matrix::Zero(m, m), -e, stationary));
      if (!lo.optimal() || !hi.optimal() || -hi.objective - lo.objective > 1e-9) return TiltVerdict::Unsupported;
      ybar(i) = lo.objective;
    }
  }
  const double hess = p.G().weighted_hessian(xbar, ybar)(0, 0);

  std::vector<Plq1d> parts(static_cast<std::size_t>(m));
  for (Index i = 0; i < m; ++i) {
    Plq1d& f = parts[static_cast<std::size_t>(i)];
    f.q = q(i, i);
    for (Index r = 0; r < y.num_eq(); ++r) {
      const double a = y.eq_matrix()(r, i);
      if (a != 0.0) f.lower = f.upper = y.eq_rhs()(r) / a;
    }
    for (Index r = 0; r < y.num_ineq(); ++r) {
      const double a = y.ineq_matrix()(r, i);
      if (a > 0.0) f.upper = std::min(f.upper, y.ineq_rhs()(r) / a);
      if (a < 0.0) f.lower = std::max(f.lower, y.ineq_rhs()(r) / a);
    }
  }
  // second-order qualification
  int nontrivial = 0;
  for (Index i = 0; i < m; ++i) {
    const IntervalSet s = second_subdiff_1d(parts[static_cast<std::size_t>(i)], z(i), ybar(i), 0.0);
    if (s == IntervalSet::point(0.0)) continue;
    if (grad(i) == 0.0) return TiltVerdict::Unsupported;
    ++nontrivial;
  }
  if (nontrivial > 1) return TiltVerdict::Unsupported;

  for (double v : {1.0, -1.0}) {
    IntervalSet total = IntervalSet::point(hess * v);
    for (Index i = 0; i < m; ++i) {
      const IntervalSet s = second_subdiff_1d(parts[static_cast<std::size_t>(i)], z(i), ybar(i), grad(i) * v);
      total = total.plus(s.scaled(grad(i)));
    }
    if (total.is_empty()) continue;
    if (v > 0 ? !(total.min() > 0) : !(total.max() < 0)) return TiltVerdict::Unstable;
  }
  return TiltVerdict::Stable;
}

}  // namespace plqcomp
