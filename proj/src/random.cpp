#include "rankcert/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace rankcert {

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  // 1 - u keeps the logarithm argument in (0, 1].
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Eigen::Index Rng::index(Eigen::Index bound) {
  const auto i = static_cast<Eigen::Index>(uniform() * static_cast<double>(bound));
  return std::min(i, bound - 1);
}

Eigen::MatrixXd Rng::gaussian(Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd out(rows, cols);
  // Row-major fill order so a seed describes the same matrix in any layout.
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = normal();
  }
  return out;
}

Eigen::VectorXd Rng::gaussian(Eigen::Index size) {
  Eigen::VectorXd out(size);
  for (Eigen::Index i = 0; i < size; ++i) out(i) = normal();
  return out;
}

Eigen::MatrixXd Rng::orthogonal(Eigen::Index n) {
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian(n, n));
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < n; ++j) {
    if (r(j, j) < 0) q.col(j) = -q.col(j);
  }
  return q;
}

Eigen::MatrixXd Rng::planted_rank(Eigen::Index m, Eigen::Index n, Eigen::Index rank) {
  if (rank == 0) return Eigen::MatrixXd::Zero(m, n);
  const Eigen::MatrixXd a = gaussian(m, rank);
  const Eigen::MatrixXd b = gaussian(n, rank);
  return a * b.transpose();
}

Eigen::MatrixXd Rng::projector(Eigen::Index n, Eigen::Index rank) {
  const Eigen::MatrixXd q = orthogonal(n).leftCols(rank);
  return q * q.transpose();
}

Eigen::MatrixXd Rng::psd(Eigen::Index n, Eigen::Index rank) {
  const Eigen::MatrixXd q = orthogonal(n);
  Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < rank; ++i) d(i) = uniform();
  Eigen::MatrixXd out = q * d.asDiagonal() * q.transpose();
  return (out + out.transpose()) / 2.0;
}

std::vector<Eigen::Index> Rng::subset(Eigen::Index n, Eigen::Index k) {
  // Partial Fisher-Yates.
  std::vector<Eigen::Index> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), Eigen::Index{0});
  for (Eigen::Index i = 0; i < k; ++i) {
    const Eigen::Index j = i + index(n - i);
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
  }
  pool.resize(static_cast<std::size_t>(k));
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace rankcert
