// Flat-file formats.
//
// Matrix text format:
//   line 1      "m n" (positive decimal integers)
//   lines 2..   m rows of n whitespace-separated reals (scientific notation
//               allowed, NaN/Inf rejected)
// Trailing blank lines are ignored; anything else is a ParseError carrying the
// 1-based line number.
//
// Problem files are JSON documents; see problem_to_json for the schema.
#pragma once

#include "rankcert/rank_opt.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

namespace rankcert {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public IoError {
 public:
  ParseError(int line, const std::string& what)
      : IoError("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

MatrixXd parse_matrix(std::string_view text);
MatrixXd load_matrix(const std::filesystem::path& path);
/// Round-trip exact (17 significant digits).
std::string format_matrix(const MatrixXd& m);
void save_matrix(const std::filesystem::path& path, const MatrixXd& m);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

nlohmann::ordered_json matrix_to_json(const MatrixXd& m);
MatrixXd matrix_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json vector_to_json(const VectorXd& v);
/// null entries decode to `null_value` (used for unbounded box sides).
VectorXd vector_from_json(const nlohmann::ordered_json& j, double null_value = 0.0);

struct SparseLsProblem {
  MatrixXd A;
  VectorXd b;
  int k = 0;
  std::optional<VectorXd> x_star;
};

struct RankMinProblem {
  AffineMatrixMap map;
  std::optional<Box> bounds;
  std::optional<VectorXd> initial_theta;
};

struct RankConstrainedFile {
  RankProblem problem;
  std::optional<VectorXd> theta_star;
};

using ProblemFile = std::variant<RankConstrainedFile, RankMinProblem, SparseLsProblem>;

// {"format": "rankcert-problem", "version": 1, "kind": ..., ...}
//   rank_constrained: rank_bound, objective {H, c, d}, map {base, coefficients},
//                     bounds {lower, upper} (null = unbounded), initial_theta,
//                     theta_star
//   rank_min:         map, bounds, initial_theta
//   sparse_ls:        A, b, k, x_star
// Matrices are {"rows", "cols", "data"} with row-major data.
nlohmann::ordered_json problem_to_json(const ProblemFile& problem);
ProblemFile problem_from_json(const nlohmann::ordered_json& j);
ProblemFile load_problem(const std::filesystem::path& path);

}  // namespace rankcert
