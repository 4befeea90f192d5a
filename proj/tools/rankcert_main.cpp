// rankcert: certify matrix rank bounds, solve rank-constrained problems,
// generate planted instances and run the property bench.
//
// Exit codes: 0 success / valid certificate, 1 usage or IO error,
// 2 constraint infeasible at the requested rank.
#include "rankcert/commands.hpp"
#include "rankcert/io.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>

namespace {

using namespace rankcert;

int emit(const CommandResult& result, const std::string& out_path) {
  if (!result.error.empty()) std::cerr << "rankcert: " << result.error << "\n";
  try {
    if (out_path.empty()) {
      std::cout << result.report.serialize();
    } else {
      write_file(out_path, result.report.serialize());
    }
  } catch (const IoError& e) {
    std::cerr << "rankcert: " << e.what() << "\n";
    return kExitUsage;
  }
  return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Matrix rank certificates and rank-constrained solvers"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  const std::vector<std::string> echo(argv, argv + argc);
  std::string format = "text";
  const auto add_format = [&format](CLI::App* sub) {
    sub->add_option("--format", format, "Report format")->check(CLI::IsMember({"text"}));
  };

  // certify
  CertifyOptions certify;
  std::string side = "right";
  std::string certify_out;
  auto* certify_cmd = app.add_subcommand("certify", "Build and verify a rank certificate for a matrix file");
  certify_cmd->add_option("matrix", certify.matrix_path, "Matrix text file")->required();
  certify_cmd->add_option("-r,--rank", certify.rank, "Rank bound r")->required();
  certify_cmd->add_option("--side", side, "Certificate side")->check(CLI::IsMember({"left", "right"}));
  certify_cmd->add_option("--tol", certify.tol, "Relative tolerance")->check(CLI::PositiveNumber);
  certify_cmd->add_option("--out", certify_out, "Write the report here instead of stdout");
  add_format(certify_cmd);

  // solve
  SolveOptions solve;
  std::string mode;
  int solve_rank = -1;
  std::string solve_out;
  auto* solve_cmd = app.add_subcommand("solve", "Run a rank-constrained, rank-min or sparse least-squares solver");
  solve_cmd->add_option("problem", solve.problem_path, "Problem JSON or matrix text file")->required();
  solve_cmd->add_option("--mode", mode, "Solver")->check(CLI::IsMember({"rank-constrained", "rank-min", "sparse-ls"}));
  solve_cmd->add_option("-r,--rank", solve_rank, "Rank bound (or sparsity k)")->check(CLI::NonNegativeNumber);
  solve_cmd->add_option("--seed", solve.config.seed, "Seed");
  solve_cmd->add_option("--max-iters", solve.config.max_outer_iters, "Outer iterations")->check(CLI::PositiveNumber);
  solve_cmd->add_option("--penalty-init", solve.config.penalty_init, "Initial penalty")->check(CLI::PositiveNumber);
  solve_cmd->add_option("--penalty-growth", solve.config.penalty_growth, "Penalty growth factor");
  solve_cmd->add_option("--tol", solve.config.stop_residual, "Residual stopping threshold")
      ->check(CLI::PositiveNumber);
  solve_cmd->add_option("--out", solve_out, "Write the report here instead of stdout");
  add_format(solve_cmd);

  // gen
  GenOptions gen;
  std::string kind;
  auto* gen_cmd = app.add_subcommand("gen", "Write a planted instance");
  gen_cmd->add_option("--kind", kind, "Instance kind")
      ->required()
      ->check(CLI::IsMember({"lowrank", "sparse-ls", "affine-rank"}));
  gen_cmd->add_option("--rows", gen.spec.rows, "Rows (m)")->required();
  gen_cmd->add_option("--cols", gen.spec.cols, "Columns (n)")->required();
  gen_cmd->add_option("-r,--rank", gen.spec.planted, "Planted rank or sparsity")->required();
  gen_cmd->add_option("--noise", gen.spec.noise, "Noise level");
  gen_cmd->add_option("--params", gen.spec.parameters, "Affine parameter count");
  gen_cmd->add_option("--seed", gen.spec.seed, "Seed");
  gen_cmd->add_option("--out", gen.out_path, "Instance file to write")->required();
  add_format(gen_cmd);

  // bench
  BenchOptions bench;
  std::string bench_out;
  auto* bench_cmd = app.add_subcommand("bench", "Run the seeded property suites");
  bench_cmd->add_option("--seed", bench.seed, "Seed");
  bench_cmd->add_option("--dims-cap", bench.dims_cap, "Largest dimension drawn")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--suite", bench.groups, "Restrict to these groups (repeatable)");
  bench_cmd->add_option("--samples", bench.ky_fan_samples, "Phi samples per Ky Fan instance")
      ->check(CLI::NonNegativeNumber);
  bench_cmd->add_option("--out", bench_out, "Write the report here instead of stdout");
  add_format(bench_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*certify_cmd) {
      certify.side = side == "left" ? Side::Left : Side::Right;
      return emit(cmd_certify(certify, echo), certify_out);
    }
    if (*solve_cmd) {
      if (!mode.empty()) solve.mode = solve_mode_from_string(mode);
      if (solve_rank >= 0) solve.rank = solve_rank;
      return emit(cmd_solve(solve, echo), solve_out);
    }
    if (*gen_cmd) {
      gen.spec.kind = planted_kind_from_string(kind);
      return emit(cmd_gen(gen, echo), {});
    }
    if (*bench_cmd) return emit(cmd_bench(bench, echo), bench_out);
  } catch (const std::exception& e) {
    std::cerr << "rankcert: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
