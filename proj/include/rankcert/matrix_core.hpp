// Dense spectral primitives used by the certificate constructions.
//
// Everything here is a pure function of its inputs and is templated on the
// scalar type. Decompositions are backed by Eigen; this header adds the
// contracts the rest of the library depends on: nonincreasing ordering,
// complete right bases, finiteness checks and a deterministic sign
// convention for singular/eigen vectors.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>

namespace rankcert {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Index = Eigen::Index;

class DecompositionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace tolerance {
/// Relative threshold on sigma_i / sigma_max used by numerical_rank.
inline constexpr double kRank = 1e-9;
/// Symmetry slack, scaled by max(1, ||A||_F).
inline constexpr double kSymmetry = 1e-10;
/// Relative reconstruction bound promised by svd / sym_eig.
inline constexpr double kReconstruction = 1e-9;
}  // namespace tolerance

/// U diag(values) V^T for svd; Q diag(values) Q^T for sym_eig (left == right).
template <typename Scalar>
struct SpectralDecomposition {
  Matrix<Scalar> left_vectors;
  Vector<Scalar> values;
  Matrix<Scalar> right_vectors;
};

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& a) {
  return a.allFinite();
}

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& a, const char* what) {
  if (!a.allFinite()) {
    throw ContractViolation(std::string(what) + ": matrix has non-finite entries");
  }
}

/// Builds a rows x cols matrix from row-major entries, rejecting NaN/Inf.
template <typename Scalar>
Matrix<Scalar> make_matrix(Index rows, Index cols, std::span<const Scalar> row_major) {
  if (rows <= 0 || cols <= 0) {
    throw ContractViolation("make_matrix: dimensions must be positive");
  }
  if (static_cast<Index>(row_major.size()) != rows * cols) {
    throw DimensionMismatch("make_matrix: entry count does not equal rows * cols");
  }
  Matrix<Scalar> m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      m(i, j) = row_major[static_cast<std::size_t>(i * cols + j)];
    }
  }
  require_finite(m, "make_matrix");
  return m;
}

/// Default symmetry slack for A: kSymmetry * max(1, ||A||_F).
template <typename Derived>
typename Derived::RealScalar symmetry_tolerance(const Eigen::MatrixBase<Derived>& a) {
  using Real = typename Derived::RealScalar;
  return Real(tolerance::kSymmetry) * std::max(Real(1), a.norm());
}

template <typename Derived>
typename Derived::RealScalar asymmetry(const Eigen::MatrixBase<Derived>& a) {
  return (a - a.transpose()).cwiseAbs().maxCoeff();
}

template <typename Derived>
bool is_symmetric(const Eigen::MatrixBase<Derived>& a, typename Derived::RealScalar tol) {
  return a.rows() == a.cols() && asymmetry(a) <= tol;
}

namespace detail {

// Index of the entry with largest magnitude; the lowest index wins ties.
template <typename Derived>
Index dominant_index(const Eigen::MatrixBase<Derived>& v) {
  Index best = 0;
  for (Index i = 1; i < v.size(); ++i) {
    if (std::abs(v(i)) > std::abs(v(best))) best = i;
  }
  return best;
}

template <typename Scalar>
bool flip_to_positive(Eigen::Ref<Vector<Scalar>> v) {
  if (v.size() == 0) return false;
  if (v(dominant_index(v)) < Scalar(0)) {
    v = -v;
    return true;
  }
  return false;
}

}  // namespace detail

/// Full SVD. `right_vectors` is always n x n and `left_vectors` m x m, so the
/// trailing columns of V span the null space even when m < n. The
/// min(m, n) singular values are nonincreasing.
///
/// Sign convention: each right vector has its largest-magnitude component
/// positive; the paired left vector is flipped with it. Unpaired trailing
/// columns of U are normalized the same way on their own.
template <typename Derived>
SpectralDecomposition<typename Derived::Scalar> svd(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  require_finite(a, "svd");
  const Matrix<Scalar> dense = a;
  Eigen::JacobiSVD<Matrix<Scalar>> solver(dense, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (solver.info() != Eigen::Success) {
    throw DecompositionError("svd: Jacobi iteration failed to converge");
  }
  SpectralDecomposition<Scalar> out{solver.matrixU(), solver.singularValues(), solver.matrixV()};
  const Index k = out.values.size();
  for (Index i = 0; i < out.right_vectors.cols(); ++i) {
    const bool flipped = detail::flip_to_positive<Scalar>(out.right_vectors.col(i));
    if (i < k && flipped) out.left_vectors.col(i) = -out.left_vectors.col(i);
  }
  for (Index i = k; i < out.left_vectors.cols(); ++i) {
    detail::flip_to_positive<Scalar>(out.left_vectors.col(i));
  }
  return out;
}

/// Symmetric eigendecomposition with eigenvalues sorted nonincreasing.
/// Input must be symmetric within `sym_tol` (default symmetry_tolerance(a)).
template <typename Derived>
SpectralDecomposition<typename Derived::Scalar> sym_eig(const Eigen::MatrixBase<Derived>& a,
                                                        typename Derived::RealScalar sym_tol = -1) {
  using Scalar = typename Derived::Scalar;
  require_finite(a, "sym_eig");
  if (a.rows() != a.cols()) throw ContractViolation("sym_eig: matrix is not square");
  if (sym_tol < 0) sym_tol = symmetry_tolerance(a);
  const Scalar skew = asymmetry(a);
  if (skew > sym_tol) {
    std::ostringstream msg;
    msg << "sym_eig: matrix is not symmetric (max |A - A^T| = " << skew << ")";
    throw ContractViolation(msg.str());
  }
  const Matrix<Scalar> sym = (a + a.transpose()) / Scalar(2);
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw DecompositionError("sym_eig: tridiagonal QR failed to converge");
  }
  const Index n = sym.rows();
  SpectralDecomposition<Scalar> out;
  out.values = solver.eigenvalues().reverse();
  out.right_vectors = solver.eigenvectors().rowwise().reverse();
  for (Index i = 0; i < n; ++i) detail::flip_to_positive<Scalar>(out.right_vectors.col(i));
  out.left_vectors = out.right_vectors;
  return out;
}

/// Count of singular values strictly above rel_tol * sigma_max.
template <typename Derived>
int numerical_rank(const Eigen::MatrixBase<Derived>& a,
                   typename Derived::RealScalar rel_tol = tolerance::kRank) {
  if (!(rel_tol > 0)) throw ContractViolation("numerical_rank: rel_tol must be positive");
  require_finite(a, "numerical_rank");
  using Scalar = typename Derived::Scalar;
  const Matrix<Scalar> dense = a;
  Eigen::JacobiSVD<Matrix<Scalar>> solver(dense);
  if (solver.info() != Eigen::Success) {
    throw DecompositionError("numerical_rank: Jacobi iteration failed to converge");
  }
  const auto& s = solver.singularValues();
  if (s.size() == 0) return 0;
  const Scalar cut = rel_tol * s(0);
  int rank = 0;
  for (Index i = 0; i < s.size(); ++i) {
    if (s(i) > cut) ++rank;
  }
  return rank;
}

/// Moore-Penrose pseudoinverse. Singular values at or below
/// rel_tol * sigma_max are treated as zero; the default cutoff is
/// max(m, n) * machine epsilon.
template <typename Derived>
Matrix<typename Derived::Scalar> pinv(const Eigen::MatrixBase<Derived>& a,
                                      typename Derived::RealScalar rel_tol = -1) {
  using Scalar = typename Derived::Scalar;
  const auto dec = svd(a);
  if (rel_tol < 0) {
    rel_tol = Scalar(std::max(a.rows(), a.cols())) * Eigen::NumTraits<Scalar>::epsilon();
  }
  const Index k = dec.values.size();
  const Scalar cut = k > 0 ? rel_tol * dec.values(0) : Scalar(0);
  Matrix<Scalar> out = Matrix<Scalar>::Zero(a.cols(), a.rows());
  for (Index i = 0; i < k; ++i) {
    if (dec.values(i) > cut) {
      out.noalias() += (dec.right_vectors.col(i) / dec.values(i)) * dec.left_vectors.col(i).transpose();
    }
  }
  return out;
}

/// Singular values padded with zeros to length n (the column count): the
/// spectrum of A^T A square-rooted, in nonincreasing order.
template <typename Scalar>
Vector<Scalar> padded_singular_values(const SpectralDecomposition<Scalar>& dec, Index n) {
  Vector<Scalar> out = Vector<Scalar>::Zero(n);
  out.head(std::min<Index>(n, dec.values.size())) = dec.values.head(std::min<Index>(n, dec.values.size()));
  return out;
}

}  // namespace rankcert
