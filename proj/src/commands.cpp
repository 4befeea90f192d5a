#include "rankcert/commands.hpp"

#include "rankcert/io.hpp"

#include <chrono>

namespace rankcert {

using nlohmann::ordered_json;

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

CommandResult failure(RunReport report, int code, const std::string& message) {
  report.outputs = ordered_json{{"status", "error"}, {"error", message}};
  return CommandResult{std::move(report), code, message};
}

ordered_json membership_to_json(const MembershipReport<double>& m) {
  return ordered_json{{"member", m.member},
                      {"symmetric", m.symmetric},
                      {"eigenvalues_in_range", m.eigenvalues_in_range},
                      {"trace_matches", m.trace_matches},
                      {"min_eigenvalue", m.min_eigenvalue},
                      {"max_eigenvalue", m.max_eigenvalue},
                      {"trace", m.trace},
                      {"trace_deviation", m.trace_deviation}};
}

bool looks_like_json(const std::string& text) {
  const auto pos = text.find_first_not_of(" \t\r\n");
  return pos != std::string::npos && text[pos] == '{';
}

}  // namespace

const char* to_string(SolveMode mode) {
  switch (mode) {
    case SolveMode::RankConstrained: return "rank-constrained";
    case SolveMode::RankMin: return "rank-min";
    case SolveMode::SparseLS: return "sparse-ls";
  }
  return "unknown";
}

SolveMode solve_mode_from_string(const std::string& name) {
  if (name == "rank-constrained") return SolveMode::RankConstrained;
  if (name == "rank-min") return SolveMode::RankMin;
  if (name == "sparse-ls") return SolveMode::SparseLS;
  throw ContractViolation("unknown solve mode '" + name + "'");
}

CommandResult cmd_certify(const CertifyOptions& options, std::vector<std::string> argv) {
  const auto start = Clock::now();
  RunReport report;
  report.command = std::move(argv);
  MatrixXd g;
  try {
    g = load_matrix(options.matrix_path);
  } catch (const IoError& e) {
    return failure(std::move(report), kExitUsage, e.what());
  }
  report.inputs = ordered_json{{"matrix", digest(g)},
                               {"rank", options.rank},
                               {"side", to_string(options.side)},
                               {"tol", options.tol}};
  try {
    const auto cert = options.side == Side::Right ? right_certificate<double>(g, options.rank, options.tol)
                                                  : left_certificate<double>(g, options.rank, options.tol);
    const auto check = verify_certificate<double>(g, cert.W, options.side, options.tol, options.rank);
    report.outputs = ordered_json{{"status", check.valid ? "valid" : "invalid"},
                                  {"side", to_string(cert.side)},
                                  {"rank_bound", cert.r},
                                  {"certified_bound", check.certified_bound},
                                  {"residual", cert.residual},
                                  {"residual_limit", check.residual_limit},
                                  {"degenerate_cut", cert.degenerate_cut},
                                  {"membership", membership_to_json(cert.membership)},
                                  {"justification", check.justification},
                                  {"W", matrix_to_json(cert.W)}};
    report.timings_ms = ordered_json{{"total", elapsed_ms(start)}};
    return CommandResult{std::move(report), check.valid ? kExitOk : kExitInfeasible, {}};
  } catch (const RankTooHighError& e) {
    report.outputs = ordered_json{{"status", "rank_too_high"},
                                  {"observed_rank", e.observed_rank()},
                                  {"requested_rank", e.requested_rank()},
                                  {"error", e.what()}};
    report.timings_ms = ordered_json{{"total", elapsed_ms(start)}};
    return CommandResult{std::move(report), kExitInfeasible, e.what()};
  } catch (const std::invalid_argument& e) {
    return failure(std::move(report), kExitUsage, e.what());
  }
}

CommandResult cmd_solve(const SolveOptions& options, std::vector<std::string> argv) {
  const auto start = Clock::now();
  RunReport report;
  report.command = std::move(argv);

  ProblemFile problem;
  bool from_matrix = false;
  try {
    const std::string text = read_file(options.problem_path);
    if (looks_like_json(text)) {
      problem = load_problem(options.problem_path);
    } else {
      problem = RankMinProblem{AffineMatrixMap(parse_matrix(text), {}), std::nullopt, std::nullopt};
      from_matrix = true;
    }
  } catch (const IoError& e) {
    return failure(std::move(report), kExitUsage, e.what());
  } catch (const std::invalid_argument& e) {
    return failure(std::move(report), kExitUsage, e.what());
  }

  SolveMode mode;
  if (options.mode) {
    mode = *options.mode;
  } else if (std::holds_alternative<SparseLsProblem>(problem)) {
    mode = SolveMode::SparseLS;
  } else if (std::holds_alternative<RankConstrainedFile>(problem)) {
    mode = SolveMode::RankConstrained;
  } else {
    mode = SolveMode::RankMin;
  }

  try {
    SolveReport solved;
    ordered_json extra = ordered_json::object();
    switch (mode) {
      case SolveMode::SparseLS: {
        const auto* p = std::get_if<SparseLsProblem>(&problem);
        if (!p) throw ContractViolation("sparse-ls mode needs a sparse_ls problem file");
        const int k = options.rank.value_or(p->k);
        report.inputs = ordered_json{{"mode", to_string(mode)}, {"A", digest(p->A)}, {"k", k}};
        solved = solve_sparse_ls(p->A, p->b, k, options.config);
        extra["verify_l0"] = verify_l0<double>(solved.theta, solved.W.diagonal(), k);
        break;
      }
      case SolveMode::RankMin: {
        AffineMatrixMap map;
        std::optional<Box> bounds;
        std::optional<VectorXd> initial;
        if (const auto* p = std::get_if<RankMinProblem>(&problem)) {
          map = p->map;
          bounds = p->bounds;
          initial = p->initial_theta;
        } else if (const auto* p = std::get_if<RankConstrainedFile>(&problem)) {
          map = p->problem.map;
          bounds = p->problem.bounds;
          initial = p->problem.initial_theta;
        } else {
          throw ContractViolation("rank-min mode needs a matrix, rank_min or rank_constrained problem file");
        }
        report.inputs = ordered_json{
            {"mode", to_string(mode)}, {"base", digest(map.base())}, {"parameters", map.parameters()}};
        solved = solve_rank_min(map, bounds, options.config, initial);
        break;
      }
      case SolveMode::RankConstrained: {
        RankProblem p;
        if (from_matrix) {
          if (!options.rank) throw ContractViolation("rank-constrained mode on a matrix file needs --rank");
          p = full_matrix_approximation(std::get<RankMinProblem>(problem).map.base(), *options.rank);
        } else if (const auto* f = std::get_if<RankConstrainedFile>(&problem)) {
          p = f->problem;
          if (options.rank) p.rank_bound = *options.rank;
        } else {
          throw ContractViolation("rank-constrained mode needs a matrix or rank_constrained problem file");
        }
        report.inputs = ordered_json{{"mode", to_string(mode)},
                                     {"base", digest(p.map.base())},
                                     {"parameters", p.map.parameters()},
                                     {"rank_bound", p.rank_bound}};
        solved = solve_rank_constrained(p, options.config);
        break;
      }
    }
    report.inputs["config"] = ordered_json{{"max_outer_iters", options.config.max_outer_iters},
                                           {"penalty_init", options.config.penalty_init},
                                           {"penalty_growth", options.config.penalty_growth},
                                           {"stop_residual", options.config.stop_residual},
                                           {"stop_objective_delta", options.config.stop_objective_delta},
                                           {"seed", options.config.seed}};
    report.outputs = solve_report_to_json(solved);
    report.outputs.insert(extra.begin(), extra.end());
    report.timings_ms = ordered_json{{"total", elapsed_ms(start)}};
    return CommandResult{std::move(report), solved.certified ? kExitOk : kExitInfeasible, {}};
  } catch (const std::invalid_argument& e) {
    return failure(std::move(report), kExitUsage, e.what());
  }
}

CommandResult cmd_gen(const GenOptions& options, std::vector<std::string> argv) {
  const auto start = Clock::now();
  RunReport report;
  report.command = std::move(argv);
  const GenSpec& spec = options.spec;
  report.inputs = ordered_json{{"kind", to_string(spec.kind)}, {"rows", spec.rows},         {"cols", spec.cols},
                               {"planted", spec.planted},      {"noise", spec.noise},       {"seed", spec.seed},
                               {"parameters", spec.parameters}};
  try {
    const std::string contents = render_planted(spec);
    write_file(options.out_path, contents);
    report.outputs = ordered_json{{"status", "written"}, {"path", options.out_path}, {"bytes", contents.size()}};
    if (spec.kind == PlantedKind::LowRank) {
      report.outputs["numerical_rank"] = numerical_rank(parse_matrix(contents));
    } else if (spec.kind == PlantedKind::SparseLS) {
      const VectorXd x_star = gen_sparse_ls(spec).x_star.value_or(VectorXd());
      report.outputs["x_star_nonzeros"] = (x_star.array() != 0.0).count();
    }
    report.timings_ms = ordered_json{{"total", elapsed_ms(start)}};
    return CommandResult{std::move(report), kExitOk, {}};
  } catch (const IoError& e) {
    return failure(std::move(report), kExitUsage, e.what());
  } catch (const std::invalid_argument& e) {
    return failure(std::move(report), kExitUsage, e.what());
  }
}

CommandResult cmd_bench(const BenchOptions& options, std::vector<std::string> argv) {
  const auto start = Clock::now();
  RunReport report;
  report.command = std::move(argv);
  report.inputs = ordered_json{{"seed", options.seed},
                               {"dims_cap", options.dims_cap},
                               {"groups", options.groups},
                               {"ky_fan_samples", options.ky_fan_samples}};
  try {
    const BenchResult result = run_bench(options);
    ordered_json groups = ordered_json::array();
    ordered_json timings = ordered_json::object();
    int failures = 0;
    for (const auto& g : result.groups) {
      groups.push_back(ordered_json{{"name", g.name},
                                    {"pass", g.passed()},
                                    {"instances", g.instances},
                                    {"checks", g.checks},
                                    {"failures", g.failures},
                                    {"first_failure", g.first_failure}});
      timings[g.name] = g.elapsed_ms;
      failures += g.failures;
    }
    report.outputs = ordered_json{{"status", result.passed() ? "pass" : "fail"},
                                  {"total_failures", failures},
                                  {"groups", std::move(groups)}};
    timings["total"] = elapsed_ms(start);
    report.timings_ms = std::move(timings);
    return CommandResult{std::move(report), kExitOk, {}};
  } catch (const std::invalid_argument& e) {
    return failure(std::move(report), kExitUsage, e.what());
  }
}

}  // namespace rankcert
