// Machine-readable run reports.
//
// A report is a JSON object with a fixed top-level field order:
//   tool, version, command, inputs, outputs, timings_ms
// `timings_ms` is the only nondeterministic part; payload() drops it so two
// runs of the same command with the same seed compare byte-for-byte.
#pragma once

#include "rankcert/rank_opt.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace rankcert {

inline constexpr const char* kToolName = "rankcert";
inline constexpr const char* kToolVersion = "0.1.0";

struct RunReport {
  std::vector<std::string> command;
  nlohmann::ordered_json inputs = nlohmann::ordered_json::object();
  nlohmann::ordered_json outputs = nlohmann::ordered_json::object();
  nlohmann::ordered_json timings_ms = nlohmann::ordered_json::object();
  std::string version = kToolVersion;

  nlohmann::ordered_json to_json() const;
  static RunReport from_json(const nlohmann::ordered_json& j);

  std::string serialize() const;
  static RunReport parse(const std::string& text);

  /// Serialization without timings.
  std::string payload() const;

  bool operator==(const RunReport&) const = default;
};

/// Dimensions and norms of an input matrix.
nlohmann::ordered_json digest(const MatrixXd& m);

nlohmann::ordered_json solve_report_to_json(const SolveReport& report);

}  // namespace rankcert
