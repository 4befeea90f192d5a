// Seeded instance generation.
//
// All randomness comes from std::mt19937_64 (whose output sequence is fixed
// by the C++ standard) seeded with a 64-bit value. Derived variates avoid
// implementation-defined std distributions so instances reproduce across
// standard libraries:
//   uniform()  = (next() >> 11) * 2^-53, in [0, 1)
//   normal()   = Box-Muller on two uniforms, cosine branch only
//   index(k)   = floor(uniform() * k)
#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <vector>

namespace rankcert {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  /// Uniform integer in [0, bound).
  Eigen::Index index(Eigen::Index bound);

  Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols);
  Eigen::VectorXd gaussian(Eigen::Index size);

  /// Haar-distributed orthogonal matrix (QR of a Gaussian matrix with the
  /// signs of R's diagonal folded into Q).
  Eigen::MatrixXd orthogonal(Eigen::Index n);

  /// A B^T with Gaussian A (m x rank), B (n x rank); zero when rank == 0.
  Eigen::MatrixXd planted_rank(Eigen::Index m, Eigen::Index n, Eigen::Index rank);

  /// Orthogonal projector of the given rank onto a random subspace of R^n.
  Eigen::MatrixXd projector(Eigen::Index n, Eigen::Index rank);

  /// Q diag(d) Q^T with d_i uniform on [0, 1) for i < rank, zero otherwise.
  Eigen::MatrixXd psd(Eigen::Index n, Eigen::Index rank);

  /// k distinct indices from [0, n) in increasing order.
  std::vector<Eigen::Index> subset(Eigen::Index n, Eigen::Index k);

 private:
  std::mt19937_64 engine_;
};

}  // namespace rankcert
