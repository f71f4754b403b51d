#include "plqcomp/problem_file.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace plqcomp {

namespace {

std::string where(const YAML::Mark& mark) {
  if (mark.is_null()) return "";
  return " (line " + std::to_string(mark.line + 1) + ", column " + std::to_string(mark.column + 1) + ")";
}

[[noreturn]] void fail(const std::string& section, const YAML::Node& node, const std::string& msg) {
  throw ProblemFileError(section + ": " + msg + where(node.Mark()));
}

void require_map(const YAML::Node& node, const std::string& section) {
  if (!node.IsMap()) fail(section, node, "expected a mapping");
}

void check_keys(const YAML::Node& node, const std::string& section, const std::set<std::string>& allowed) {
  require_map(node, section);
  for (const auto& kv : node) {
    const std::string key = kv.first.as<std::string>();
    if (!allowed.count(key)) throw ProblemFileError(section + ": unknown key '" + key + "'" + where(kv.first.Mark()));
  }
}

double read_double(const YAML::Node& node, const std::string& section) {
  if (!node.IsScalar()) fail(section, node, "expected a number");
  try {
    return node.as<double>();
  } catch (const YAML::Exception&) {
    fail(section, node, "expected a number, got '" + node.Scalar() + "'");
  }
}

long long read_int(const YAML::Node& node, const std::string& section) {
  if (!node.IsScalar()) fail(section, node, "expected an integer");
  try {
    return node.as<long long>();
  } catch (const YAML::Exception&) {
    fail(section, node, "expected an integer, got '" + node.Scalar() + "'");
  }
}

std::uint64_t read_u64(const YAML::Node& node, const std::string& section) {
  if (!node.IsScalar()) fail(section, node, "expected an unsigned integer");
  try {
    return node.as<std::uint64_t>();
  } catch (const YAML::Exception&) {
    fail(section, node, "expected an unsigned integer, got '" + node.Scalar() + "'");
  }
}

bool read_bool(const YAML::Node& node, const std::string& section) {
  if (!node.IsScalar()) fail(section, node, "expected a boolean");
  try {
    return node.as<bool>();
  } catch (const YAML::Exception&) {
    fail(section, node, "expected a boolean, got '" + node.Scalar() + "'");
  }
}

std::string read_string(const YAML::Node& node, const std::string& section) {
  if (!node.IsScalar()) fail(section, node, "expected a string");
  return node.Scalar();
}

Vector read_vector(const YAML::Node& node, const std::string& section) {
  if (!node.IsSequence()) fail(section, node, "expected a list of numbers");
  Vector v(static_cast<Index>(node.size()));
  for (std::size_t i = 0; i < node.size(); ++i) v(static_cast<Index>(i)) = read_double(node[i], section);
  return v;
}

Matrix read_matrix(const YAML::Node& node, const std::string& section, Index cols_if_empty = 0) {
  if (!node.IsSequence()) fail(section, node, "expected a list of rows");
  if (node.size() == 0) return Matrix(0, cols_if_empty);
  const Index rows = static_cast<Index>(node.size());
  Index cols = -1;
  Matrix m;
  for (Index i = 0; i < rows; ++i) {
    const YAML::Node row = node[static_cast<std::size_t>(i)];
    Vector r = read_vector(row, section);
    if (cols < 0) {
      cols = r.size();
      m.resize(rows, cols);
    } else if (r.size() != cols) {
      fail(section, row, "ragged matrix rows");
    }
    m.row(i) = r.transpose();
  }
  return m;
}

std::vector<double> read_list(const YAML::Node& node, const std::string& section) {
  Vector v = read_vector(node, section);
  return std::vector<double>(v.data(), v.data() + v.size());
}

SetSpec read_set(const YAML::Node& node, const std::string& section) {
  check_keys(node, section, {"whole_space", "box", "orthant", "simplex", "point", "general", "product"});
  if (node.size() != 1) fail(section, node, "exactly one set constructor expected");
  const auto kv = *node.begin();
  const std::string kind = kv.first.as<std::string>();
  const YAML::Node body = kv.second;
  SetSpec s;
  auto positive_dim = [&](const YAML::Node& n) {
    const long long d = read_int(n, section);
    if (d < 1) fail(section, n, "dimension must be positive");
    return static_cast<Index>(d);
  };
  if (kind == "whole_space" || kind == "orthant") {
    s.kind = kind == "whole_space" ? SetSpec::Kind::WholeSpace : SetSpec::Kind::Orthant;
    s.dim = positive_dim(body);
  } else if (kind == "box") {
    check_keys(body, section, {"lower", "upper"});
    if (!body["lower"] || !body["upper"]) fail(section, body, "box needs lower and upper");
    s.kind = SetSpec::Kind::Box;
    s.lower = read_vector(body["lower"], section);
    s.upper = read_vector(body["upper"], section);
    if (s.lower.size() != s.upper.size() || s.lower.size() == 0)
      fail(section, body, "box bounds must be nonempty and of equal length");
  } else if (kind == "simplex") {
    check_keys(body, section, {"dim", "total"});
    if (!body["dim"]) fail(section, body, "simplex needs dim");
    s.kind = SetSpec::Kind::Simplex;
    s.dim = positive_dim(body["dim"]);
    if (body["total"]) s.total = read_double(body["total"], section);
  } else if (kind == "point") {
    s.kind = SetSpec::Kind::Point;
    s.point = read_vector(body, section);
    if (s.point.size() == 0) fail(section, body, "point must be nonempty");
  } else if (kind == "general") {
    check_keys(body, section, {"dim", "eq", "eq_rhs", "ineq", "ineq_rhs"});
    if (!body["dim"]) fail(section, body, "general set needs dim");
    s.kind = SetSpec::Kind::General;
    s.dim = positive_dim(body["dim"]);
    s.eq = body["eq"] ? read_matrix(body["eq"], section, s.dim) : Matrix(0, s.dim);
    s.eq_rhs = body["eq_rhs"] ? read_vector(body["eq_rhs"], section) : Vector(0);
    s.ineq = body["ineq"] ? read_matrix(body["ineq"], section, s.dim) : Matrix(0, s.dim);
    s.ineq_rhs = body["ineq_rhs"] ? read_vector(body["ineq_rhs"], section) : Vector(0);
    if (s.eq.cols() != s.dim || s.ineq.cols() != s.dim) fail(section, body, "row length differs from dim");
    if (s.eq_rhs.size() != s.eq.rows() || s.ineq_rhs.size() != s.ineq.rows())
      fail(section, body, "right-hand side length differs from row count");
  } else {
    s.kind = SetSpec::Kind::Product;
    if (!body.IsSequence() || body.size() < 2) fail(section, body, "product needs a list of at least two sets");
    for (const auto& f : body) s.factors.push_back(read_set(f, section));
  }
  return s;
}

QSpec read_q(const YAML::Node& node) {
  QSpec q;
  if (node.IsScalar()) {
    if (node.Scalar() != "zero") fail("Q", node, "expected 'zero', {identity: c} or a matrix");
    q.kind = QSpec::Kind::Zero;
  } else if (node.IsMap()) {
    check_keys(node, "Q", {"identity"});
    if (!node["identity"]) fail("Q", node, "expected {identity: c}");
    q.kind = QSpec::Kind::Identity;
    q.scale = read_double(node["identity"], "Q");
    if (!(q.scale >= 0)) fail("Q", node, "identity scale must be nonnegative");
  } else {
    q.kind = QSpec::Kind::Dense;
    q.dense = read_matrix(node, "Q");
    if (q.dense.rows() != q.dense.cols() || q.dense.rows() == 0) fail("Q", node, "matrix must be square");
    const double scale = std::max(1.0, q.dense.cwiseAbs().maxCoeff());
    if ((q.dense - q.dense.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
      fail("Q", node, "matrix is not symmetric");
  }
  return q;
}

GSpec read_g(const YAML::Node& node) {
  require_map(node, "G");
  GSpec g;
  if (node["affine"]) {
    check_keys(node, "G", {"affine"});
    const YAML::Node a = node["affine"];
    check_keys(a, "G", {"A", "b"});
    if (!a["A"] || !a["b"]) fail("G", a, "affine needs A and b");
    g.is_catalog = false;
    g.A = read_matrix(a["A"], "G");
    g.b = read_vector(a["b"], "G");
    if (g.A.rows() == 0 || g.A.rows() != g.b.size()) fail("G", a, "A rows must match b length");
    return g;
  }
  check_keys(node, "G", {"family", "n", "m", "targets", "penalties", "curvature", "center", "radius2", "n_eq",
                         "n_ineq", "probabilities", "alpha", "theta", "taper", "capacity"});
  if (!node["family"]) fail("G", node, "expected 'family' or 'affine'");
  InstanceSpec& s = g.catalog;
  try {
    s.family = family_from_string(read_string(node["family"], "G"));
  } catch (const std::invalid_argument& e) {
    fail("G", node["family"], e.what());
  }
  if (node["n"]) s.n = read_int(node["n"], "G");
  if (node["m"]) s.m = read_int(node["m"], "G");
  if (node["targets"]) s.targets = read_vector(node["targets"], "G");
  if (node["penalties"]) s.penalties = read_vector(node["penalties"], "G");
  if (node["curvature"]) s.curvature = read_double(node["curvature"], "G");
  if (node["center"]) s.center = read_vector(node["center"], "G");
  if (node["radius2"]) s.radius2 = read_double(node["radius2"], "G");
  if (node["n_eq"]) s.n_eq = read_int(node["n_eq"], "G");
  if (node["n_ineq"]) s.n_ineq = read_int(node["n_ineq"], "G");
  if (node["probabilities"]) s.probabilities = read_vector(node["probabilities"], "G");
  if (node["alpha"]) s.alpha = read_double(node["alpha"], "G");
  if (node["theta"]) s.theta = read_double(node["theta"], "G");
  if (node["taper"]) s.taper = read_bool(node["taper"], "G");
  if (node["capacity"]) s.capacity = read_double(node["capacity"], "G");
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    fail("G", node, e.what());
  }
  return g;
}

SolverSpec read_solver(const YAML::Node& node) {
  check_keys(node, "solver", {"method", "tol", "prox", "approx", "alm", "x0", "y0"});
  SolverSpec s;
  if (node["method"]) {
    s.method = read_string(node["method"], "solver");
    if (s.method != "prox" && s.method != "approx" && s.method != "alm")
      fail("solver", node["method"], "method must be prox, approx or alm");
  }
  if (node["tol"]) s.tol = read_double(node["tol"], "solver");
  if (!(s.tol > 0)) fail("solver", node, "tol must be positive");
  if (const YAML::Node p = node["prox"]) {
    check_keys(p, "solver", {"tau", "sigma", "lambda_max", "lambda0", "stop_tol", "max_iter", "max_backtracks"});
    if (p["tau"]) s.prox.tau = read_double(p["tau"], "solver");
    if (p["sigma"]) s.prox.sigma = read_double(p["sigma"], "solver");
    if (p["lambda_max"]) s.prox.lambda_max = read_double(p["lambda_max"], "solver");
    if (p["lambda0"]) s.prox.lambda0 = read_double(p["lambda0"], "solver");
    if (p["stop_tol"]) s.prox.stop_tol = read_double(p["stop_tol"], "solver");
    if (p["max_iter"]) s.prox.max_iter = static_cast<int>(read_int(p["max_iter"], "solver"));
    if (p["max_backtracks"]) s.prox.max_backtracks = static_cast<int>(read_int(p["max_backtracks"], "solver"));
    try {
      s.prox.validate();
    } catch (const std::invalid_argument& e) {
      fail("solver", p, e.what());
    }
  }
  if (const YAML::Node a = node["approx"]) {
    check_keys(a, "solver", {"kind", "nu", "eps", "theta"});
    ScheduleSpec sch;
    if (a["kind"]) sch.kind = read_string(a["kind"], "solver");
    if (sch.kind != "moreau" && sch.kind != "penalty") fail("solver", a, "approx kind must be moreau or penalty");
    if (a["nu"]) {
      Vector v = read_vector(a["nu"], "solver");
      for (Index i = 0; i < v.size(); ++i) {
        if (v(i) != std::floor(v(i))) fail("solver", a["nu"], "nu entries must be integers");
        sch.nu.push_back(static_cast<int>(v(i)));
      }
    }
    if (a["eps"]) sch.eps = read_list(a["eps"], "solver");
    if (a["theta"]) sch.theta = read_list(a["theta"], "solver");
    s.approx = sch;
  }
  if (const YAML::Node a = node["alm"]) {
    check_keys(a, "solver", {"theta", "lambda_step", "outer_iters", "tol", "inner_max_iter", "inner_tol"});
    if (a["theta"]) s.alm.theta = read_double(a["theta"], "solver");
    if (a["lambda_step"]) s.alm.lambda_step = read_double(a["lambda_step"], "solver");
    if (a["outer_iters"]) s.alm.outer_iters = static_cast<int>(read_int(a["outer_iters"], "solver"));
    if (a["tol"]) s.alm.tol = read_double(a["tol"], "solver");
    if (a["inner_max_iter"]) s.alm.inner_max_iter = static_cast<int>(read_int(a["inner_max_iter"], "solver"));
    if (a["inner_tol"]) s.alm.inner_tol = read_double(a["inner_tol"], "solver");
    try {
      s.alm.validate();
    } catch (const std::invalid_argument& e) {
      fail("solver", a, e.what());
    }
  }
  if (node["x0"]) s.x0 = read_vector(node["x0"], "solver");
  if (node["y0"]) s.y0 = read_vector(node["y0"], "solver");
  return s;
}

CheckSpec read_check(const YAML::Node& node) {
  check_keys(node, "check", {"point", "duals", "grid_radius"});
  CheckSpec c;
  if (node["point"]) c.point = read_vector(node["point"], "check");
  if (const YAML::Node d = node["duals"]) {
    if (!d.IsSequence()) fail("check", d, "duals must be a list of vectors");
    for (const auto& y : d) c.duals.push_back(read_vector(y, "check"));
  }
  if (node["grid_radius"]) c.grid_radius = read_double(node["grid_radius"], "check");
  if (!(c.grid_radius > 0)) fail("check", node, "grid_radius must be positive");
  return c;
}

ProblemFile read_document(const YAML::Node& root) {
  if (!root.IsMap()) throw ProblemFileError("document: expected a mapping of sections" + where(root.Mark()));
  check_keys(root, "document", {"meta", "X", "Y", "Q", "G", "solver", "check", "outputs"});
  ProblemFile f;
  if (const YAML::Node m = root["meta"]) {
    check_keys(m, "meta", {"name", "seed"});
    if (m["name"]) f.name = read_string(m["name"], "meta");
    if (m["seed"]) f.seed = read_u64(m["seed"], "meta");
  }
  if (!root["G"]) throw ProblemFileError("G: section is required");
  f.G = read_g(root["G"]);
  if (root["X"]) f.X = read_set(root["X"], "X");
  if (root["Y"]) f.Y = read_set(root["Y"], "Y");
  if (root["Q"]) f.Q = read_q(root["Q"]);
  if (!f.G.is_catalog && !f.Y) throw ProblemFileError("Y: section is required for affine G");
  if (root["solver"]) f.solver = read_solver(root["solver"]);
  if (root["check"]) f.check = read_check(root["check"]);
  if (const YAML::Node o = root["outputs"]) {
    check_keys(o, "outputs", {"trace", "json"});
    if (o["trace"]) f.trace_path = read_string(o["trace"], "outputs");
    if (o["json"]) f.json_path = read_string(o["json"], "outputs");
  }
  return f;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ProblemFileError("file: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Emission

void emit_double(YAML::Emitter& out, double v) {
  if (std::isinf(v)) {
    out << (v > 0 ? ".inf" : "-.inf");
    return;
  }
  out << v;
}

void emit_vector(YAML::Emitter& out, const Vector& v) {
  out << YAML::Flow << YAML::BeginSeq;
  for (Index i = 0; i < v.size(); ++i) emit_double(out, v(i));
  out << YAML::EndSeq;
}

void emit_matrix(YAML::Emitter& out, const Matrix& m) {
  out << YAML::BeginSeq;
  for (Index i = 0; i < m.rows(); ++i) emit_vector(out, m.row(i).transpose());
  out << YAML::EndSeq;
}

void emit_set(YAML::Emitter& out, const SetSpec& s) {
  out << YAML::BeginMap;
  switch (s.kind) {
    case SetSpec::Kind::WholeSpace: out << YAML::Key << "whole_space" << YAML::Value << s.dim; break;
    case SetSpec::Kind::Orthant: out << YAML::Key << "orthant" << YAML::Value << s.dim; break;
    case SetSpec::Kind::Box:
      out << YAML::Key << "box" << YAML::Value << YAML::BeginMap;
      out << YAML::Key << "lower" << YAML::Value;
      emit_vector(out, s.lower);
      out << YAML::Key << "upper" << YAML::Value;
      emit_vector(out, s.upper);
      out << YAML::EndMap;
      break;
    case SetSpec::Kind::Simplex:
      out << YAML::Key << "simplex" << YAML::Value << YAML::BeginMap << YAML::Key << "dim" << YAML::Value
          << s.dim << YAML::Key << "total" << YAML::Value;
      emit_double(out, s.total);
      out << YAML::EndMap;
      break;
    case SetSpec::Kind::Point:
      out << YAML::Key << "point" << YAML::Value;
      emit_vector(out, s.point);
      break;
    case SetSpec::Kind::General:
      out << YAML::Key << "general" << YAML::Value << YAML::BeginMap;
      out << YAML::Key << "dim" << YAML::Value << s.dim;
      out << YAML::Key << "eq" << YAML::Value;
      emit_matrix(out, s.eq);
      out << YAML::Key << "eq_rhs" << YAML::Value;
      emit_vector(out, s.eq_rhs);
      out << YAML::Key << "ineq" << YAML::Value;
      emit_matrix(out, s.ineq);
      out << YAML::Key << "ineq_rhs" << YAML::Value;
      emit_vector(out, s.ineq_rhs);
      out << YAML::EndMap;
      break;
    case SetSpec::Kind::Product:
      out << YAML::Key << "product" << YAML::Value << YAML::BeginSeq;
      for (const auto& f : s.factors) emit_set(out, f);
      out << YAML::EndSeq;
      break;
  }
  out << YAML::EndMap;
}

bool same(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.size() == 0 || a == b);
}

bool same_set(const SetSpec& a, const SetSpec& b) {
  if (a.kind != b.kind || a.dim != b.dim || a.total != b.total || a.factors.size() != b.factors.size()) return false;
  if (!same(a.lower, b.lower) || !same(a.upper, b.upper) || !same(a.point, b.point) || !same(a.eq, b.eq) ||
      !same(a.eq_rhs, b.eq_rhs) || !same(a.ineq, b.ineq) || !same(a.ineq_rhs, b.ineq_rhs))
    return false;
  for (std::size_t i = 0; i < a.factors.size(); ++i)
    if (!same_set(a.factors[i], b.factors[i])) return false;
  return true;
}

template <class T, class Eq>
bool same_opt(const std::optional<T>& a, const std::optional<T>& b, Eq eq) {
  if (a.has_value() != b.has_value()) return false;
  return !a || eq(*a, *b);
}

bool same_spec(const InstanceSpec& a, const InstanceSpec& b) {
  return a.family == b.family && a.n == b.n && a.m == b.m && a.seed == b.seed && same(a.targets, b.targets) &&
         same(a.penalties, b.penalties) && a.curvature == b.curvature &&
         same_opt(a.center, b.center, [](const Vector& u, const Vector& v) { return same(u, v); }) &&
         a.radius2 == b.radius2 && a.n_eq == b.n_eq && a.n_ineq == b.n_ineq &&
         same(a.probabilities, b.probabilities) && a.alpha == b.alpha && a.theta == b.theta &&
         a.taper == b.taper && a.capacity == b.capacity;
}

Polyhedron build_set(const SetSpec& s, const std::string& section) {
  try {
    return s.build();
  } catch (const std::invalid_argument& e) {
    throw ProblemFileError(section + ": " + e.what());
  }
}

}  // namespace

Polyhedron SetSpec::build() const {
  switch (kind) {
    case Kind::WholeSpace: return Polyhedron::whole_space(dim);
    case Kind::Orthant: return Polyhedron::orthant(dim);
    case Kind::Box: return Polyhedron::box(lower, upper);
    case Kind::Simplex: return Polyhedron::simplex(dim, total);
    case Kind::Point: return Polyhedron::point(point);
    case Kind::General: return Polyhedron(eq, eq_rhs, ineq, ineq_rhs);
    case Kind::Product: {
      Polyhedron p = factors.at(0).build();
      for (std::size_t i = 1; i < factors.size(); ++i) p = Polyhedron::product(p, factors[i].build());
      return p;
    }
  }
  throw std::invalid_argument("unknown set kind");
}

Matrix QSpec::build(Index m) const {
  switch (kind) {
    case Kind::Zero: return Matrix::Zero(m, m);
    case Kind::Identity: return scale * Matrix::Identity(m, m);
    case Kind::Dense:
      if (dense.rows() != m) throw ProblemFileError("Q: size " + std::to_string(dense.rows()) +
                                                    " does not match Y dimension " + std::to_string(m));
      return dense;
  }
  return Matrix::Zero(m, m);
}

bool operator==(const ProblemFile& a, const ProblemFile& b) {
  auto set_eq = [](const SetSpec& u, const SetSpec& v) { return same_set(u, v); };
  auto q_eq = [](const QSpec& u, const QSpec& v) {
    return u.kind == v.kind && u.scale == v.scale && same(u.dense, v.dense);
  };
  auto vec_eq = [](const Vector& u, const Vector& v) { return same(u, v); };
  auto sch_eq = [](const ScheduleSpec& u, const ScheduleSpec& v) {
    return u.kind == v.kind && u.nu == v.nu && u.eps == v.eps && u.theta == v.theta;
  };
  const SolverSpec& s = a.solver;
  const SolverSpec& t = b.solver;
  const bool prox_eq = s.prox.tau == t.prox.tau && s.prox.sigma == t.prox.sigma &&
                       s.prox.lambda_max == t.prox.lambda_max && s.prox.lambda0 == t.prox.lambda0 &&
                       s.prox.stop_tol == t.prox.stop_tol && s.prox.max_iter == t.prox.max_iter &&
                       s.prox.max_backtracks == t.prox.max_backtracks;
  const bool alm_eq = s.alm.theta == t.alm.theta && s.alm.lambda_step == t.alm.lambda_step &&
                      s.alm.outer_iters == t.alm.outer_iters && s.alm.tol == t.alm.tol &&
                      s.alm.inner_max_iter == t.alm.inner_max_iter && s.alm.inner_tol == t.alm.inner_tol;
  bool duals_eq = a.check.duals.size() == b.check.duals.size();
  for (std::size_t i = 0; duals_eq && i < a.check.duals.size(); ++i)
    duals_eq = same(a.check.duals[i], b.check.duals[i]);
  return a.name == b.name && a.seed == b.seed && same_opt(a.X, b.X, set_eq) && same_opt(a.Y, b.Y, set_eq) &&
         same_opt(a.Q, b.Q, q_eq) && a.G.is_catalog == b.G.is_catalog &&
         (a.G.is_catalog ? same_spec(a.G.catalog, b.G.catalog) : same(a.G.A, b.G.A) && same(a.G.b, b.G.b)) &&
         s.method == t.method && s.tol == t.tol && prox_eq && alm_eq && same_opt(s.approx, t.approx, sch_eq) &&
         same_opt(s.x0, t.x0, vec_eq) && same_opt(s.y0, t.y0, vec_eq) &&
         same_opt(a.check.point, b.check.point, vec_eq) && duals_eq &&
         a.check.grid_radius == b.check.grid_radius && a.trace_path == b.trace_path && a.json_path == b.json_path;
}

ProblemFile parse_problem(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ProblemFileError("document: " + e.msg + where(e.mark));
  }
  return read_document(root);
}

ProblemFile load_problem(const std::string& path) { return parse_problem(read_file(path)); }

std::vector<ProblemFile> load_batch(const std::string& path) {
  std::vector<YAML::Node> docs;
  try {
    docs = YAML::LoadAll(read_file(path));
  } catch (const YAML::ParserException& e) {
    throw ProblemFileError("document: " + e.msg + where(e.mark));
  }
  std::vector<ProblemFile> files;
  for (const auto& d : docs) files.push_back(read_document(d));
  return files;
}

std::string serialize_problem(const ProblemFile& f) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "meta" << YAML::Value << YAML::BeginMap << YAML::Key << "name" << YAML::Value
      << YAML::DoubleQuoted << f.name << YAML::Key << "seed" << YAML::Value << f.seed << YAML::EndMap;
  if (f.X) {
    out << YAML::Key << "X" << YAML::Value;
    emit_set(out, *f.X);
  }
  if (f.Y) {
    out << YAML::Key << "Y" << YAML::Value;
    emit_set(out, *f.Y);
  }
  if (f.Q) {
    out << YAML::Key << "Q" << YAML::Value;
    switch (f.Q->kind) {
      case QSpec::Kind::Zero: out << "zero"; break;
      case QSpec::Kind::Identity:
        out << YAML::BeginMap << YAML::Key << "identity" << YAML::Value;
        emit_double(out, f.Q->scale);
        out << YAML::EndMap;
        break;
      case QSpec::Kind::Dense: emit_matrix(out, f.Q->dense); break;
    }
  }
  out << YAML::Key << "G" << YAML::Value << YAML::BeginMap;
  if (!f.G.is_catalog) {
    out << YAML::Key << "affine" << YAML::Value << YAML::BeginMap << YAML::Key << "A" << YAML::Value;
    emit_matrix(out, f.G.A);
    out << YAML::Key << "b" << YAML::Value;
    emit_vector(out, f.G.b);
    out << YAML::EndMap;
  } else {
    const InstanceSpec& s = f.G.catalog;
    auto scalar = [&](const char* key, double v) {
      out << YAML::Key << key << YAML::Value;
      emit_double(out, v);
    };
    auto vec = [&](const char* key, const Vector& v) {
      if (v.size() == 0) return;
      out << YAML::Key << key << YAML::Value;
      emit_vector(out, v);
    };
    out << YAML::Key << "family" << YAML::Value << to_string(s.family);
    out << YAML::Key << "n" << YAML::Value << s.n << YAML::Key << "m" << YAML::Value << s.m;
    vec("targets", s.targets);
    vec("penalties", s.penalties);
    scalar("curvature", s.curvature);
    if (s.center) vec("center", *s.center);
    scalar("radius2", s.radius2);
    out << YAML::Key << "n_eq" << YAML::Value << s.n_eq << YAML::Key << "n_ineq" << YAML::Value << s.n_ineq;
    vec("probabilities", s.probabilities);
    scalar("alpha", s.alpha);
    scalar("theta", s.theta);
    out << YAML::Key << "taper" << YAML::Value << s.taper;
    scalar("capacity", s.capacity);
  }
  out << YAML::EndMap;

  const SolverSpec& s = f.solver;
  out << YAML::Key << "solver" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "method" << YAML::Value << s.method << YAML::Key << "tol" << YAML::Value;
  emit_double(out, s.tol);
  out << YAML::Key << "prox" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "tau" << YAML::Value << s.prox.tau << YAML::Key << "sigma" << YAML::Value << s.prox.sigma
      << YAML::Key << "lambda_max" << YAML::Value << s.prox.lambda_max << YAML::Key << "lambda0" << YAML::Value
      << s.prox.lambda0 << YAML::Key << "stop_tol" << YAML::Value << s.prox.stop_tol << YAML::Key << "max_iter"
      << YAML::Value << s.prox.max_iter << YAML::Key << "max_backtracks" << YAML::Value << s.prox.max_backtracks;
  out << YAML::EndMap;
  if (s.approx) {
    out << YAML::Key << "approx" << YAML::Value << YAML::BeginMap << YAML::Key << "kind" << YAML::Value
        << s.approx->kind;
    out << YAML::Key << "nu" << YAML::Value << YAML::Flow << s.approx->nu;
    out << YAML::Key << "eps" << YAML::Value;
    emit_vector(out, Eigen::Map<const Vector>(s.approx->eps.data(), static_cast<Index>(s.approx->eps.size())));
    out << YAML::Key << "theta" << YAML::Value;
    emit_vector(out, Eigen::Map<const Vector>(s.approx->theta.data(), static_cast<Index>(s.approx->theta.size())));
    out << YAML::EndMap;
  }
  out << YAML::Key << "alm" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "theta" << YAML::Value << s.alm.theta;
  if (s.alm.lambda_step) out << YAML::Key << "lambda_step" << YAML::Value << *s.alm.lambda_step;
  out << YAML::Key << "outer_iters" << YAML::Value << s.alm.outer_iters << YAML::Key << "tol" << YAML::Value
      << s.alm.tol << YAML::Key << "inner_max_iter" << YAML::Value << s.alm.inner_max_iter << YAML::Key
      << "inner_tol" << YAML::Value << s.alm.inner_tol;
  out << YAML::EndMap;
  if (s.x0) {
    out << YAML::Key << "x0" << YAML::Value;
    emit_vector(out, *s.x0);
  }
  if (s.y0) {
    out << YAML::Key << "y0" << YAML::Value;
    emit_vector(out, *s.y0);
  }
  out << YAML::EndMap;

  out << YAML::Key << "check" << YAML::Value << YAML::BeginMap;
  if (f.check.point) {
    out << YAML::Key << "point" << YAML::Value;
    emit_vector(out, *f.check.point);
  }
  if (!f.check.duals.empty()) {
    out << YAML::Key << "duals" << YAML::Value << YAML::BeginSeq;
    for (const auto& y : f.check.duals) emit_vector(out, y);
    out << YAML::EndSeq;
  }
  out << YAML::Key << "grid_radius" << YAML::Value;
  emit_double(out, f.check.grid_radius);
  out << YAML::EndMap;

  out << YAML::Key << "outputs" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "trace" << YAML::Value << YAML::DoubleQuoted << f.trace_path;
  out << YAML::Key << "json" << YAML::Value << YAML::DoubleQuoted << f.json_path;
  out << YAML::EndMap;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

BuiltProblem build_problem(const ProblemFile& f) {
  std::optional<Instance> instance;
  Polyhedron x_set = Polyhedron::whole_space(1);
  Polyhedron y_set = Polyhedron::whole_space(1);
  SmoothMap g;
  Matrix q;
  Vector x0;
  if (f.G.is_catalog) {
    InstanceSpec spec = f.G.catalog;
    spec.seed = f.seed;
    try {
      instance = build(spec);
    } catch (const std::exception& e) {
      throw ProblemFileError(std::string("G: ") + e.what());
    }
    const CompositeProblem& p = instance->problem;
    x_set = f.X ? build_set(*f.X, "X") : p.X();
    y_set = f.Y ? build_set(*f.Y, "Y") : p.h().Y();
    g = p.G();
    q = f.Q ? f.Q->build(y_set.dim()) : p.h().Q();
    x0 = instance->x0;
  } else {
    g = SmoothMap::from_affine(f.G.A, f.G.b);
    x_set = f.X ? build_set(*f.X, "X") : Polyhedron::whole_space(f.G.A.cols());
    y_set = build_set(*f.Y, "Y");
    q = f.Q ? f.Q->build(y_set.dim()) : Matrix::Zero(y_set.dim(), y_set.dim());
    x0 = Vector::Zero(g.n);
  }
  if (x_set.dim() != g.n)
    throw ProblemFileError("X: dimension " + std::to_string(x_set.dim()) + " does not match G input dimension " +
                           std::to_string(g.n));
  if (y_set.dim() != g.m)
    throw ProblemFileError("Y: dimension " + std::to_string(y_set.dim()) + " does not match G output dimension " +
                           std::to_string(g.m));
  if (q.rows() != y_set.dim()) throw ProblemFileError("Q: size does not match Y dimension");
  std::optional<PlqFunction> h;
  try {
    h.emplace(y_set, q);
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    const bool about_q = msg.find("Y is empty") == std::string::npos;
    throw ProblemFileError((about_q ? "Q: " : "Y: ") + msg);
  }
  if (f.solver.x0) {
    if (f.solver.x0->size() != g.n) throw ProblemFileError("solver: x0 dimension does not match X");
    x0 = *f.solver.x0;
  }
  if (f.solver.y0 && f.solver.y0->size() != g.m) throw ProblemFileError("solver: y0 dimension does not match Y");
  return BuiltProblem{CompositeProblem(x_set, std::move(g), std::move(*h)), x0, std::move(instance)};
}

}  // namespace plqcomp
