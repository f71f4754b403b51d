#pragma once

#include "plqcomp/problem_file.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace plqcomp {

/// Exit-code contract shared by the CLI commands.
enum ExitCode : int { kExitOk = 0, kExitInputError = 1, kExitNotConverged = 2, kExitUnsupported = 3 };

struct SolveOptions {
  std::optional<std::string> method;
  std::optional<double> tol;
  std::optional<int> max_iter;
};

struct SolveOutcome {
  nlohmann::json report;  ///< "wall_time_s" is the only nondeterministic field
  std::string trace_csv;
  int exit_code = kExitOk;
};

SolveOutcome run_solve(const ProblemFile& file, const SolveOptions& options = {});

struct CheckRow {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct CheckOutcome {
  std::vector<CheckRow> rows;
  int exit_code = kExitOk;
  std::string message;  ///< reason when unsupported
};

/// what: subgradient | duality | tilt.
CheckOutcome run_check(const ProblemFile& file, const std::string& what);

std::string format_table(const CheckOutcome& outcome);

/// JSON number, or the strings "inf" and "-inf".
nlohmann::json json_number(double v);
nlohmann::json json_vector(const Vector& v);

}  // namespace plqcomp
