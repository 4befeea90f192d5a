// The CLI subcommands as library calls. Each returns the run report and the
// process exit code; the executable only parses flags and prints.
#pragma once

#include "rankcert/bench.hpp"
#include "rankcert/generators.hpp"
#include "rankcert/report.hpp"

#include <optional>
#include <string>
#include <vector>

namespace rankcert {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitInfeasible = 2;

struct CommandResult {
  RunReport report;
  int exit_code = kExitOk;
  /// Set for usage and IO failures; the report then carries it as well.
  std::string error;
};

struct CertifyOptions {
  std::string matrix_path;
  int rank = 0;
  Side side = Side::Right;
  double tol = tolerance::kCertificate;
};

enum class SolveMode { RankConstrained, RankMin, SparseLS };

const char* to_string(SolveMode mode);
SolveMode solve_mode_from_string(const std::string& name);

struct SolveOptions {
  std::string problem_path;
  /// Defaults to the problem file's kind; plain matrix files need a mode.
  std::optional<SolveMode> mode;
  /// Overrides the file's rank bound (or k for sparse least squares).
  std::optional<int> rank;
  SolverConfig config;
};

struct GenOptions {
  GenSpec spec;
  std::string out_path;
};

CommandResult cmd_certify(const CertifyOptions& options, std::vector<std::string> argv = {});
CommandResult cmd_solve(const SolveOptions& options, std::vector<std::string> argv = {});
CommandResult cmd_gen(const GenOptions& options, std::vector<std::string> argv = {});
CommandResult cmd_bench(const BenchOptions& options, std::vector<std::string> argv = {});

}  // namespace rankcert
