#include "rankcert/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

namespace rankcert {

using nlohmann::ordered_json;

namespace {

std::vector<std::string_view> split_whitespace(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

template <typename T>
T parse_number(std::string_view token, int line) {
  T value{};
  // from_chars rejects a leading '+', which scientific output may carry in
  // the mantissa; strip it here.
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  const auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || end != token.data() + token.size()) {
    throw ParseError(line, "cannot parse '" + std::string(token) + "' as a number");
  }
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(value)) throw ParseError(line, "non-finite value '" + std::string(token) + "'");
  }
  return value;
}

}  // namespace

MatrixXd parse_matrix(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) {
      lines.push_back(text.substr(pos));
      break;
    }
    lines.push_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  while (!lines.empty() && split_whitespace(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) throw ParseError(1, "empty matrix file");

  const auto header = split_whitespace(lines[0]);
  if (header.size() != 2) throw ParseError(1, "header must be 'rows cols'");
  const long rows = parse_number<long>(header[0], 1);
  const long cols = parse_number<long>(header[1], 1);
  if (rows <= 0 || cols <= 0) throw ParseError(1, "dimensions must be positive");

  MatrixXd m(rows, cols);
  for (long i = 0; i < rows; ++i) {
    const int line_no = static_cast<int>(i) + 2;
    if (static_cast<std::size_t>(i + 1) >= lines.size()) {
      throw ParseError(line_no, "expected " + std::to_string(rows) + " rows, found " + std::to_string(i));
    }
    const auto tokens = split_whitespace(lines[static_cast<std::size_t>(i + 1)]);
    if (static_cast<long>(tokens.size()) != cols) {
      throw ParseError(line_no, "expected " + std::to_string(cols) + " values, found " + std::to_string(tokens.size()));
    }
    for (long j = 0; j < cols; ++j) m(i, j) = parse_number<double>(tokens[static_cast<std::size_t>(j)], line_no);
  }
  if (lines.size() > static_cast<std::size_t>(rows + 1)) {
    throw ParseError(static_cast<int>(rows) + 2, "unexpected data after the last row");
  }
  return m;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << contents;
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

MatrixXd load_matrix(const std::filesystem::path& path) { return parse_matrix(read_file(path)); }

std::string format_matrix(const MatrixXd& m) {
  std::ostringstream out;
  out.precision(std::numeric_limits<double>::max_digits10);
  out << m.rows() << ' ' << m.cols() << '\n';
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out << ' ';
      out << m(i, j);
    }
    out << '\n';
  }
  return out.str();
}

void save_matrix(const std::filesystem::path& path, const MatrixXd& m) { write_file(path, format_matrix(m)); }

ordered_json matrix_to_json(const MatrixXd& m) {
  ordered_json data = ordered_json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
  }
  return ordered_json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

MatrixXd matrix_from_json(const ordered_json& j) {
  const auto rows = j.at("rows").get<Index>();
  const auto cols = j.at("cols").get<Index>();
  const auto& data = j.at("data");
  if (rows < 0 || cols < 0 || static_cast<Index>(data.size()) != rows * cols) {
    throw IoError("matrix entry count does not match rows * cols");
  }
  MatrixXd m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index c = 0; c < cols; ++c) m(i, c) = data.at(static_cast<std::size_t>(i * cols + c)).get<double>();
  }
  if (!m.allFinite()) throw IoError("matrix has non-finite entries");
  return m;
}

ordered_json vector_to_json(const VectorXd& v) {
  ordered_json out = ordered_json::array();
  for (Index i = 0; i < v.size(); ++i) {
    if (std::isfinite(v(i))) {
      out.push_back(v(i));
    } else {
      out.push_back(nullptr);
    }
  }
  return out;
}

VectorXd vector_from_json(const ordered_json& j, double null_value) {
  VectorXd v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v(static_cast<Index>(i)) = j[i].is_null() ? null_value : j[i].get<double>();
  }
  return v;
}

namespace {

ordered_json map_to_json(const AffineMatrixMap& map) {
  ordered_json coeffs = ordered_json::array();
  for (const auto& c : map.coefficients()) coeffs.push_back(matrix_to_json(c));
  return ordered_json{{"base", matrix_to_json(map.base())}, {"coefficients", std::move(coeffs)}};
}

AffineMatrixMap map_from_json(const ordered_json& j) {
  std::vector<MatrixXd> coeffs;
  for (const auto& c : j.at("coefficients")) coeffs.push_back(matrix_from_json(c));
  return AffineMatrixMap(matrix_from_json(j.at("base")), std::move(coeffs));
}

ordered_json box_to_json(const std::optional<Box>& box) {
  if (!box) return nullptr;
  return ordered_json{{"lower", vector_to_json(box->lower)}, {"upper", vector_to_json(box->upper)}};
}

std::optional<Box> box_from_json(const ordered_json& j) {
  if (j.is_null()) return std::nullopt;
  const double inf = std::numeric_limits<double>::infinity();
  return Box{vector_from_json(j.at("lower"), -inf), vector_from_json(j.at("upper"), inf)};
}

ordered_json optional_vector(const std::optional<VectorXd>& v) {
  return v ? vector_to_json(*v) : ordered_json(nullptr);
}

std::optional<VectorXd> optional_vector(const ordered_json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return vector_from_json(j.at(key));
}

ordered_json header(const char* kind) {
  return ordered_json{{"format", "rankcert-problem"}, {"version", 1}, {"kind", kind}};
}

}  // namespace

ordered_json problem_to_json(const ProblemFile& problem) {
  struct Visitor {
    ordered_json operator()(const RankConstrainedFile& f) const {
      ordered_json j = header("rank_constrained");
      const RankProblem& p = f.problem;
      j["rank_bound"] = p.rank_bound;
      j["objective"] = ordered_json{
          {"H", matrix_to_json(p.objective.H)}, {"c", vector_to_json(p.objective.c)}, {"d", p.objective.d}};
      j["map"] = map_to_json(p.map);
      j["bounds"] = box_to_json(p.bounds);
      j["initial_theta"] = optional_vector(p.initial_theta);
      j["theta_star"] = optional_vector(f.theta_star);
      return j;
    }
    ordered_json operator()(const RankMinProblem& p) const {
      ordered_json j = header("rank_min");
      j["map"] = map_to_json(p.map);
      j["bounds"] = box_to_json(p.bounds);
      j["initial_theta"] = optional_vector(p.initial_theta);
      return j;
    }
    ordered_json operator()(const SparseLsProblem& p) const {
      ordered_json j = header("sparse_ls");
      j["k"] = p.k;
      j["A"] = matrix_to_json(p.A);
      j["b"] = vector_to_json(p.b);
      j["x_star"] = optional_vector(p.x_star);
      return j;
    }
  };
  return std::visit(Visitor{}, problem);
}

ProblemFile problem_from_json(const ordered_json& j) {
  try {
    if (j.value("format", "") != "rankcert-problem") throw IoError("not a rankcert problem document");
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "rank_constrained") {
      RankConstrainedFile f;
      const auto& obj = j.at("objective");
      f.problem.objective = QuadraticObjective{matrix_from_json(obj.at("H")), vector_from_json(obj.at("c")),
                                               obj.value("d", 0.0)};
      f.problem.map = map_from_json(j.at("map"));
      f.problem.bounds = box_from_json(j.value("bounds", ordered_json(nullptr)));
      f.problem.rank_bound = j.at("rank_bound").get<int>();
      f.problem.initial_theta = optional_vector(j, "initial_theta");
      f.theta_star = optional_vector(j, "theta_star");
      return f;
    }
    if (kind == "rank_min") {
      return RankMinProblem{map_from_json(j.at("map")), box_from_json(j.value("bounds", ordered_json(nullptr))),
                            optional_vector(j, "initial_theta")};
    }
    if (kind == "sparse_ls") {
      return SparseLsProblem{matrix_from_json(j.at("A")), vector_from_json(j.at("b")), j.at("k").get<int>(),
                             optional_vector(j, "x_star")};
    }
    throw IoError("unknown problem kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed problem document: ") + e.what());
  }
}

ProblemFile load_problem(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
  return problem_from_json(j);
}

}  // namespace rankcert
