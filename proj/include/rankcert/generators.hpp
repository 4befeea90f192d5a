// Planted instances: problems whose rank, sparsity or optimum is known by
// construction. Generation is deterministic in (spec, seed); see random.hpp
// for the variate definitions.
#pragma once

#include "rankcert/io.hpp"

#include <cstdint>
#include <string>

namespace rankcert {

enum class PlantedKind { LowRank, SparseLS, AffineRank };

const char* to_string(PlantedKind kind);
PlantedKind planted_kind_from_string(const std::string& name);

struct GenSpec {
  PlantedKind kind = PlantedKind::LowRank;
  int rows = 0;
  int cols = 0;
  /// Rank for LowRank / AffineRank, sparsity k for SparseLS.
  int planted = 0;
  double noise = 0;
  std::uint64_t seed = 0;
  /// Number of affine parameters for AffineRank.
  int parameters = 3;

  /// Throws ContractViolation for non-positive dims or an inadmissible
  /// planted value.
  void validate() const;
};

/// G = A B^T + noise * N with inner dimension `planted`.
MatrixXd gen_low_rank(const GenSpec& spec);

/// Exactly k-sparse x* (nonzeros of magnitude in [1, 2)), Gaussian A,
/// b = A x* + noise * N.
SparseLsProblem gen_sparse_ls(const GenSpec& spec);

/// G(theta) = G0 + sum theta_k G_k with G(theta*) of rank `planted`, and
/// f(theta) = ||theta - theta_ref||^2 where theta_ref = theta* + noise * N.
RankConstrainedFile gen_affine_rank(const GenSpec& spec);

/// File contents for the instance: matrix text for LowRank, a problem JSON
/// document otherwise.
std::string render_planted(const GenSpec& spec);

}  // namespace rankcert
