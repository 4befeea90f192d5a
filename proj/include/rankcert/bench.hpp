// Seeded property suites behind `rankcert bench`.
//
// Each group draws its instances from its own generator, seeded from the
// bench seed and the group's position in kBenchGroups, so restricting the
// suite does not change the instances a group sees. Failures are recorded as
// data; nothing here throws on a violated property.
#pragma once

#include <json.hpp>

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace rankcert {

inline constexpr std::array<std::string_view, 11> kBenchGroups = {
    "trace-rank", "sylvester",    "round-trip", "converse", "lemma1",   "corollary",
    "ky-fan",     "eckart-young", "affine-2x2", "rank-min", "sparse-ls"};

struct BenchOptions {
  std::uint64_t seed = 0;
  /// Largest matrix dimension drawn (at least 1).
  int dims_cap = 8;
  /// Empty means every group.
  std::vector<std::string> groups;
  /// Phi_{n,r} members sampled per (G, r) in the ky-fan group.
  int ky_fan_samples = 1000;
};

struct BenchGroupResult {
  std::string name;
  int instances = 0;
  int checks = 0;
  int failures = 0;
  std::string first_failure;
  double elapsed_ms = 0;

  bool passed() const { return failures == 0; }
};

struct BenchResult {
  std::vector<BenchGroupResult> groups;
  bool passed() const;
};

/// Throws ContractViolation for an unknown group name or dims_cap < 1.
BenchResult run_bench(const BenchOptions& options);

}  // namespace rankcert
