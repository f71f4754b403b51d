#include "plqcomp/report.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iostream>
#include <thread>

using namespace plqcomp;

namespace {

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ProblemFileError("outputs: cannot write '" + path + "'");
  out << text;
}

int cmd_solve(const std::string& path, const SolveOptions& options, std::string trace_path, std::string json_path) {
  const ProblemFile file = load_problem(path);
  const SolveOutcome out = run_solve(file, options);
  if (trace_path.empty()) trace_path = file.trace_path;
  if (json_path.empty()) json_path = file.json_path;
  if (!trace_path.empty()) write_file(trace_path, out.trace_csv);
  const std::string json = out.report.dump(2) + "\n";
  if (json_path.empty())
    std::cout << json;
  else
    write_file(json_path, json);
  std::cerr << file.name << ": " << out.report["termination"].get<std::string>() << ", residual "
            << out.report["residual"]["total"].dump() << '\n';
  return out.exit_code;
}

int cmd_check(const std::string& path, const std::string& what) {
  const CheckOutcome out = run_check(load_problem(path), what);
  std::cout << format_table(out);
  return out.exit_code;
}

int cmd_batch(const std::string& path, const SolveOptions& options, int jobs, const std::string& json_path) {
  const std::vector<ProblemFile> files = load_batch(path);
  std::vector<SolveOutcome> results(files.size());
  std::vector<std::string> errors(files.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < files.size(); k = next++) {
      try {
        results[k] = run_solve(files[k], options);
      } catch (const std::exception& e) {
        errors[k] = e.what();
        results[k].exit_code = kExitInputError;
      }
    }
  };
  std::vector<std::thread> pool;
  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(files.size())));
  for (int t = 0; t < n; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  nlohmann::json all = nlohmann::json::array();
  int code = kExitOk;
  for (std::size_t k = 0; k < files.size(); ++k) {
    if (!errors[k].empty()) {
      all.push_back({{"name", files[k].name}, {"error", errors[k]}});
      std::cerr << "error: " << errors[k] << '\n';
    } else {
      all.push_back(results[k].report);
    }
    code = std::max(code, results[k].exit_code);
  }
  const std::string json = all.dump(2) + "\n";
  if (json_path.empty())
    std::cout << json;
  else
    write_file(json_path, json);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Composite optimization with piecewise linear-quadratic penalties"};
  app.require_subcommand(1);

  std::string file;
  std::string method;
  double tol = 0;
  int max_iter = 0;
  std::string trace_path;
  std::string json_path;
  std::string what;
  int jobs = 1;

  auto add_solve_flags = [&](CLI::App* sub) {
    sub->add_option("--method", method, "prox, approx or alm")->check(CLI::IsMember({"prox", "approx", "alm"}));
    sub->add_option("--tol", tol, "residual tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--max-iter", max_iter, "iteration limit")->check(CLI::PositiveNumber);
    sub->add_option("--json", json_path, "report path (stdout when omitted)");
  };

  CLI::App* solve = app.add_subcommand("solve", "run a solver on a problem file");
  solve->add_option("file", file, "problem file")->required();
  add_solve_flags(solve);
  solve->add_option("--trace", trace_path, "CSV trace path");

  CLI::App* check = app.add_subcommand("check", "run a diagnostic suite");
  check->add_option("file", file, "problem file")->required();
  check->add_option("--what", what, "subgradient, duality or tilt")
      ->required()
      ->check(CLI::IsMember({"subgradient", "duality", "tilt"}));

  CLI::App* batch = app.add_subcommand("batch", "solve every document of a multi-document file");
  batch->add_option("file", file, "batch file")->required();
  add_solve_flags(batch);
  batch->add_option("--jobs", jobs, "parallel workers")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInputError;
  }

  SolveOptions options;
  if (!method.empty()) options.method = method;
  if (tol > 0) options.tol = tol;
  if (max_iter > 0) options.max_iter = max_iter;

  try {
    if (solve->parsed()) return cmd_solve(file, options, trace_path, json_path);
    if (check->parsed()) return cmd_check(file, what);
    return cmd_batch(file, options, jobs, json_path);
  } catch (const ProblemFileError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInputError;
  }
}
