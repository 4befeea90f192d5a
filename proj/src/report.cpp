#include "rankcert/report.hpp"

#include "rankcert/io.hpp"

namespace rankcert {

using nlohmann::ordered_json;

ordered_json RunReport::to_json() const {
  return ordered_json{{"tool", kToolName},   {"version", version}, {"command", command},
                      {"inputs", inputs},    {"outputs", outputs}, {"timings_ms", timings_ms}};
}

RunReport RunReport::from_json(const ordered_json& j) {
  try {
    if (j.at("tool").get<std::string>() != kToolName) throw IoError("report was not produced by rankcert");
    RunReport r;
    r.version = j.at("version").get<std::string>();
    r.command = j.at("command").get<std::vector<std::string>>();
    r.inputs = j.at("inputs");
    r.outputs = j.at("outputs");
    r.timings_ms = j.at("timings_ms");
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed report: ") + e.what());
  }
}

std::string RunReport::serialize() const { return to_json().dump(2) + "\n"; }

RunReport RunReport::parse(const std::string& text) {
  try {
    return from_json(ordered_json::parse(text));
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError(std::string("report is not valid JSON: ") + e.what());
  }
}

std::string RunReport::payload() const {
  ordered_json j = to_json();
  j.erase("timings_ms");
  return j.dump(2) + "\n";
}

ordered_json digest(const MatrixXd& m) {
  return ordered_json{{"rows", m.rows()},
                      {"cols", m.cols()},
                      {"frobenius_norm", m.norm()},
                      {"max_abs", m.size() ? m.cwiseAbs().maxCoeff() : 0.0}};
}

ordered_json solve_report_to_json(const SolveReport& report) {
  return ordered_json{{"status", to_string(report.status)},
                      {"certified", report.certified},
                      {"certified_bound", report.certified_bound},
                      {"rank", report.rank},
                      {"objective", report.objective},
                      {"residual", report.residual},
                      {"iterations", report.iterations},
                      {"theta", vector_to_json(report.theta)},
                      {"W", matrix_to_json(report.W)},
                      {"trajectory",
                       {{"objective", report.objective_trajectory},
                        {"cost", report.cost_trajectory},
                        {"residual", report.residual_trajectory},
                        {"penalty", report.penalty_trajectory},
                        {"phase", report.phase_trajectory}}}};
}

}  // namespace rankcert
