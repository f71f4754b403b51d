#pragma once

#include "plqcomp/catalog.hpp"
#include "plqcomp/duality.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace plqcomp {

/// Parse or build failure; the message starts with the offending section name.
class ProblemFileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SetSpec {
  enum class Kind { WholeSpace, Box, Orthant, Simplex, Point, General, Product };
  Kind kind = Kind::WholeSpace;
  Index dim = 0;          ///< WholeSpace, Orthant, Simplex
  Vector lower;           ///< Box
  Vector upper;           ///< Box
  double total = 1.0;     ///< Simplex
  Vector point;           ///< Point
  Matrix eq;              ///< General
  Vector eq_rhs;
  Matrix ineq;
  Vector ineq_rhs;
  std::vector<SetSpec> factors;  ///< Product

  Polyhedron build() const;
};

struct QSpec {
  enum class Kind { Zero, Identity, Dense };
  Kind kind = Kind::Zero;
  double scale = 1.0;  ///< Identity
  Matrix dense;

  Matrix build(Index m) const;
};

struct GSpec {
  bool is_catalog = true;
  InstanceSpec catalog;
  Matrix A;  ///< affine G(x) = b - A x
  Vector b;
};

struct ScheduleSpec {
  std::string kind = "moreau";  ///< moreau | penalty
  std::vector<int> nu;
  std::vector<double> eps;
  std::vector<double> theta;
};

struct SolverSpec {
  std::string method = "prox";  ///< prox | approx | alm
  double tol = 1e-6;
  ProxParams prox;
  std::optional<ScheduleSpec> approx;
  AugParams alm;
  std::optional<Vector> x0;
  std::optional<Vector> y0;
};

struct CheckSpec {
  std::optional<Vector> point;  ///< x at which subgradient and tilt checks run
  std::vector<Vector> duals;    ///< y values for the weak-duality sweep
  double grid_radius = 3.0;
};

struct ProblemFile {
  std::string name = "problem";
  std::uint64_t seed = 1;
  std::optional<SetSpec> X;
  std::optional<SetSpec> Y;
  std::optional<QSpec> Q;
  GSpec G;
  SolverSpec solver;
  CheckSpec check;
  std::string trace_path;
  std::string json_path;
};

bool operator==(const ProblemFile& a, const ProblemFile& b);

ProblemFile parse_problem(const std::string& text);
ProblemFile load_problem(const std::string& path);
/// Every document of a multi-document stream.
std::vector<ProblemFile> load_batch(const std::string& path);
std::string serialize_problem(const ProblemFile& file);

struct BuiltProblem {
  CompositeProblem problem;
  Vector x0;
  std::optional<Instance> instance;
};

/// Catalog G takes X, Y and Q from the family unless the file overrides them.
BuiltProblem build_problem(const ProblemFile& file);

}  // namespace plqcomp
