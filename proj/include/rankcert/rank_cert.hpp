// Rank certificates.
//
// A matrix G (m x n) has rank at most r exactly when some W in
//
//     Phi_{n,r} = { W symmetric : 0 <= W <= I, trace(W) = n - r }
//
// satisfies G W = 0 (right certificate), or equivalently some W in Phi_{m,r}
// satisfies W G = 0 (left certificate). Constructed certificates are the
// orthogonal projectors onto the n - r weakest right singular directions.
// Verification runs the converse chain
//
//     rank(G) + trace(W) <= rank(G) + rank(W) <= n + rank(G W) = n
//
// so rank(G) <= n - trace(W) for any W that passes the shape checks.
//
// The diagonal case (G = diag(x)) gives the l0 certificate: a weight vector
// w in [0, 1]^n with sum n - r and x_i w_i = 0.
#pragma once

#include "rankcert/matrix_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace rankcert {

namespace tolerance {
/// Default relative tolerance for certificate residuals and membership.
inline constexpr double kCertificate = 1e-8;
}  // namespace tolerance

enum class Side { Right, Left };

inline const char* to_string(Side side) { return side == Side::Right ? "right" : "left"; }

class RankTooHighError : public std::runtime_error {
 public:
  RankTooHighError(int observed_rank, int requested_rank)
      : std::runtime_error(message(observed_rank, requested_rank)),
        observed_rank_(observed_rank),
        requested_rank_(requested_rank) {}

  int observed_rank() const { return observed_rank_; }
  int requested_rank() const { return requested_rank_; }

 private:
  static std::string message(int observed, int requested) {
    std::ostringstream s;
    s << "numerical rank " << observed << " exceeds requested rank " << requested;
    return s.str();
  }
  int observed_rank_;
  int requested_rank_;
};

class SparsityTooHighError : public std::runtime_error {
 public:
  SparsityTooHighError(int observed_nonzeros, int requested)
      : std::runtime_error("vector has " + std::to_string(observed_nonzeros) +
                           " nonzeros, more than the requested " + std::to_string(requested)),
        observed_nonzeros_(observed_nonzeros) {}

  int observed_nonzeros() const { return observed_nonzeros_; }

 private:
  int observed_nonzeros_;
};

/// Describes Phi_{n,r} with membership slack `tol`.
template <typename Scalar>
struct PhiParams {
  int n = 0;
  int r = 0;
  Scalar tol = Scalar(tolerance::kCertificate);

  void validate() const {
    if (n <= 0) throw ContractViolation("PhiParams: n must be positive");
    if (r < 0 || r > n) throw ContractViolation("PhiParams: rank bound must satisfy 0 <= r <= n");
    if (!(tol > 0)) throw ContractViolation("PhiParams: tol must be positive");
  }
};

template <typename Scalar>
struct MembershipReport {
  bool member = false;
  bool symmetric = false;
  bool eigenvalues_in_range = false;
  bool trace_matches = false;
  Scalar asymmetry = 0;
  Scalar min_eigenvalue = 0;
  Scalar max_eigenvalue = 0;
  Scalar trace = 0;
  /// trace(W) - (n - r)
  Scalar trace_deviation = 0;
};

template <typename Scalar>
struct Certificate {
  Matrix<Scalar> W;
  Side side = Side::Right;
  int r = 0;
  /// ||G W||_F for right certificates, ||W G||_F for left ones.
  Scalar residual = 0;
  MembershipReport<Scalar> membership;
  /// sigma_r and sigma_{r+1} coincide within tolerance, so the kept subspace
  /// was one of several equally valid choices.
  bool degenerate_cut = false;
};

template <typename Scalar>
struct VerificationReport {
  bool valid = false;
  /// rank(G) <= certified_bound. Equals round(dim - trace(W)) when valid and
  /// the vacuous bound dim otherwise.
  int certified_bound = 0;
  int dimension = 0;
  bool shape_ok = false;
  bool residual_ok = false;
  bool trace_ok = true;
  Scalar residual = 0;
  Scalar residual_limit = 0;
  MembershipReport<Scalar> shape;
  std::string justification;
};

template <typename Scalar>
struct PsdTraceReport {
  Scalar trace_value = 0;
  Scalar product_norm = 0;
  /// ||P^T Q||_F^2 from G = P P^T, W = Q Q^T.
  Scalar factor_trace = 0;
  Scalar factor_discrepancy = 0;
  /// max(1, ||G||_F ||W||_F); both zero tests are relative to it.
  Scalar scale = 1;
  bool trace_zero = false;
  bool product_zero = false;
  bool agree = false;
};

template <typename Scalar>
struct SparseCertificate {
  Vector<Scalar> w;
  int r = 0;
  /// |x_i w_i|
  Vector<Scalar> residuals;
};

template <typename Scalar>
struct PenaltyCertificate {
  Matrix<Scalar> W;
  /// trace(G^T G W) = ||G W||_F^2, the sum of the n - r smallest eigenvalues of G^T G.
  Scalar value = 0;
  bool degenerate_cut = false;
};

namespace detail {

template <typename Scalar>
MembershipReport<Scalar> phi_shape(const Matrix<Scalar>& w, Scalar tol) {
  MembershipReport<Scalar> rep;
  rep.asymmetry = asymmetry(w);
  rep.symmetric = rep.asymmetry <= tol * std::max(Scalar(1), w.norm());
  // Eigenvalues of the symmetric part are meaningful diagnostics even when
  // the symmetry check fails.
  const Matrix<Scalar> sym = (w + w.transpose()) / Scalar(2);
  const auto eig = sym_eig(sym, std::numeric_limits<Scalar>::infinity());
  rep.max_eigenvalue = eig.values(0);
  rep.min_eigenvalue = eig.values(eig.values.size() - 1);
  rep.eigenvalues_in_range = rep.min_eigenvalue >= -tol && rep.max_eigenvalue <= Scalar(1) + tol;
  rep.trace = w.trace();
  return rep;
}

template <typename Scalar>
Matrix<Scalar> projector(const Matrix<Scalar>& basis) {
  // basis has orthonormal columns, so basis * pinv(basis) = basis * basis^T.
  Matrix<Scalar> w = basis * basis.transpose();
  return (w + w.transpose()) / Scalar(2);
}

template <typename Scalar>
bool cut_is_degenerate(const Vector<Scalar>& padded, int r, Scalar rel_tol) {
  const Index n = padded.size();
  if (r <= 0 || r >= n) return false;
  const Scalar scale = std::max(padded(0), std::numeric_limits<Scalar>::min());
  return padded(r - 1) - padded(r) <= rel_tol * scale;
}

// Positions of the `count` largest |x_i|, lowest index first among ties.
template <typename Scalar>
std::vector<Index> top_magnitudes(const Vector<Scalar>& x, int count) {
  std::vector<Index> order(static_cast<std::size_t>(x.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return std::abs(x(a)) > std::abs(x(b)); });
  order.resize(static_cast<std::size_t>(count));
  return order;
}

}  // namespace detail

/// Checks W against Phi_{n,r}: symmetric, eigenvalues in [-tol, 1 + tol],
/// |trace(W) - (n - r)| <= tol * n.
template <typename Scalar>
MembershipReport<Scalar> phi_membership(const Matrix<Scalar>& w, const PhiParams<Scalar>& params) {
  params.validate();
  if (w.rows() != params.n || w.cols() != params.n) {
    throw DimensionMismatch("phi_membership: W must be n x n for the given PhiParams");
  }
  require_finite(w, "phi_membership");
  auto rep = detail::phi_shape(w, params.tol);
  rep.trace_deviation = rep.trace - Scalar(params.n - params.r);
  rep.trace_matches = std::abs(rep.trace_deviation) <= params.tol * Scalar(params.n);
  rep.member = rep.symmetric && rep.eigenvalues_in_range && rep.trace_matches;
  return rep;
}

/// Right certificate for rank(G) <= r: the projector onto the n - r right
/// singular vectors of G with the smallest singular values.
///
/// Throws RankTooHighError when numerical_rank(G, rel_tol) > r.
template <typename Scalar>
Certificate<Scalar> right_certificate(const Matrix<Scalar>& g, int r,
                                      Scalar rel_tol = Scalar(tolerance::kCertificate)) {
  const int n = static_cast<int>(g.cols());
  if (r < 0 || r > n) throw ContractViolation("right_certificate: rank bound must satisfy 0 <= r <= n");
  if (!(rel_tol > 0)) throw ContractViolation("right_certificate: rel_tol must be positive");
  const int observed = numerical_rank(g, rel_tol);
  if (observed > r) throw RankTooHighError(observed, r);

  const auto dec = svd(g);
  Certificate<Scalar> cert;
  cert.side = Side::Right;
  cert.r = r;
  cert.W = detail::projector<Scalar>(dec.right_vectors.rightCols(n - r));
  cert.residual = (g * cert.W).norm();
  cert.degenerate_cut = detail::cut_is_degenerate(padded_singular_values(dec, n), r, rel_tol);
  cert.membership = phi_membership(cert.W, PhiParams<Scalar>{n, r, rel_tol});
  return cert;
}

/// Left certificate for rank(G) <= r, W in Phi_{m,r} with W G = 0. The left
/// singular vectors of G are the right singular vectors of G^T, so this is
/// the right certificate of G^T; the two agree entrywise.
template <typename Scalar>
Certificate<Scalar> left_certificate(const Matrix<Scalar>& g, int r,
                                     Scalar rel_tol = Scalar(tolerance::kCertificate)) {
  const int m = static_cast<int>(g.rows());
  if (r < 0 || r > m) throw ContractViolation("left_certificate: rank bound must satisfy 0 <= r <= m");
  Certificate<Scalar> cert = right_certificate<Scalar>(g.transpose(), r, rel_tol);
  cert.side = Side::Left;
  return cert;
}

/// Checks a candidate certificate and reports the rank bound it implies.
///
/// valid iff W is symmetric with 0 <= W <= I (within tol) and the residual
/// ||G W||_F (or ||W G||_F) is at most tol * max(1, ||G||_F). When
/// `target_rank` is given W must also have trace dim - r, i.e. lie in
/// Phi_{dim, r}.
template <typename Scalar>
VerificationReport<Scalar> verify_certificate(const Matrix<Scalar>& g, const Matrix<Scalar>& w, Side side,
                                              Scalar tol = Scalar(tolerance::kCertificate),
                                              std::optional<int> target_rank = std::nullopt) {
  const Index dim = side == Side::Right ? g.cols() : g.rows();
  if (w.rows() != dim || w.cols() != dim) {
    throw DimensionMismatch(std::string("verify_certificate: W has the wrong size for a ") + to_string(side) +
                            " certificate");
  }
  if (!(tol > 0)) throw ContractViolation("verify_certificate: tol must be positive");
  require_finite(g, "verify_certificate");
  require_finite(w, "verify_certificate");

  VerificationReport<Scalar> rep;
  rep.dimension = static_cast<int>(dim);
  rep.shape = detail::phi_shape(w, tol);
  rep.shape_ok = rep.shape.symmetric && rep.shape.eigenvalues_in_range;
  rep.residual = side == Side::Right ? (g * w).norm() : (w * g).norm();
  rep.residual_limit = tol * std::max(Scalar(1), g.norm());
  rep.residual_ok = rep.residual <= rep.residual_limit;
  if (target_rank) {
    if (*target_rank < 0 || *target_rank > dim) {
      throw ContractViolation("verify_certificate: target rank out of range");
    }
    rep.shape.trace_deviation = rep.shape.trace - Scalar(dim - *target_rank);
    rep.shape.trace_matches = std::abs(rep.shape.trace_deviation) <= tol * Scalar(dim);
    rep.trace_ok = rep.shape.trace_matches;
  }
  rep.shape.member = rep.shape_ok && rep.trace_ok;
  rep.valid = rep.shape_ok && rep.residual_ok && rep.trace_ok;

  const Scalar slack = Scalar(dim) - rep.shape.trace;
  rep.certified_bound = rep.valid ? static_cast<int>(std::lround(static_cast<double>(slack))) : static_cast<int>(dim);
  rep.certified_bound = std::clamp(rep.certified_bound, 0, static_cast<int>(dim));

  std::ostringstream why;
  const char* product = side == Side::Right ? "GW" : "WG";
  if (rep.valid) {
    why << "rank(G) + trace(W) <= " << dim << " + rank(" << product << ") with " << product
        << " = 0, so rank(G) <= " << dim << " - trace(W) = " << slack << " -> rank(G) <= "
        << rep.certified_bound;
  } else {
    why << "W rejected (" << (rep.shape_ok ? "" : "shape ") << (rep.residual_ok ? "" : "residual ")
        << (rep.trace_ok ? "" : "trace ") << "check failed); only the trivial bound rank(G) <= " << dim
        << " holds";
  }
  rep.justification = why.str();
  return rep;
}

/// For symmetric PSD G and W: compares trace(WG) = 0 against WG = 0 and
/// recomputes trace(WG) as ||P^T Q||_F^2 from square-root factors.
///
/// Eigenvalues in [-tol * max(1, ||A||_F), 0) are clamped to zero; anything
/// more negative is a ContractViolation. The zero tests are
/// trace <= tol * scale and ||WG||_F <= norm_tol * scale.
template <typename Scalar>
PsdTraceReport<Scalar> trace_certificate_psd(const Matrix<Scalar>& g, const Matrix<Scalar>& w,
                                             Scalar tol = Scalar(tolerance::kCertificate),
                                             std::optional<Scalar> norm_tol = std::nullopt) {
  if (g.rows() != g.cols() || w.rows() != w.cols() || g.rows() != w.rows()) {
    throw DimensionMismatch("trace_certificate_psd: G and W must be square of equal size");
  }
  auto psd_factor = [tol](const Matrix<Scalar>& a, const char* name) {
    const auto eig = sym_eig(a);
    const Scalar floor = -tol * std::max(Scalar(1), a.norm());
    const Scalar lowest = eig.values(eig.values.size() - 1);
    if (lowest < floor) {
      std::ostringstream msg;
      msg << "trace_certificate_psd: " << name << " is not PSD (eigenvalue " << lowest << ")";
      throw ContractViolation(msg.str());
    }
    const Vector<Scalar> roots = eig.values.cwiseMax(Scalar(0)).cwiseSqrt();
    return Matrix<Scalar>(eig.right_vectors * roots.asDiagonal());
  };
  const Matrix<Scalar> p = psd_factor(g, "G");
  const Matrix<Scalar> q = psd_factor(w, "W");

  PsdTraceReport<Scalar> rep;
  const Matrix<Scalar> product = w * g;
  rep.trace_value = product.trace();
  rep.product_norm = product.norm();
  rep.factor_trace = (p.transpose() * q).squaredNorm();
  rep.factor_discrepancy = std::abs(rep.trace_value - rep.factor_trace);
  rep.scale = std::max(Scalar(1), g.norm() * w.norm());
  rep.trace_zero = rep.trace_value <= tol * rep.scale;
  rep.product_zero = rep.product_norm <= norm_tol.value_or(tol) * rep.scale;
  rep.agree = rep.trace_zero == rep.product_zero;
  return rep;
}

/// Binary l0 certificate: w_i = 0 on the r largest |x_i| (lowest index first
/// among ties), 1 elsewhere. Throws SparsityTooHighError when more than r
/// entries exceed abs_tol in magnitude.
template <typename Scalar>
SparseCertificate<Scalar> l0_certificate(const Vector<Scalar>& x, int r, Scalar abs_tol = Scalar(0)) {
  const int n = static_cast<int>(x.size());
  if (r < 0 || r > n) throw ContractViolation("l0_certificate: sparsity bound must satisfy 0 <= r <= n");
  require_finite(x, "l0_certificate");
  const int nonzeros = static_cast<int>((x.array().abs() > abs_tol).count());
  if (nonzeros > r) throw SparsityTooHighError(nonzeros, r);

  SparseCertificate<Scalar> cert;
  cert.r = r;
  cert.w = Vector<Scalar>::Ones(n);
  for (Index i : detail::top_magnitudes(x, r)) cert.w(i) = Scalar(0);
  cert.residuals = x.cwiseProduct(cert.w).cwiseAbs();
  return cert;
}

/// 0 - tol <= w_i <= 1 + tol, |sum w - (n - r)| <= tol * n and
/// |x_i w_i| <= tol * max(1, ||x||_inf).
template <typename Scalar>
bool verify_l0(const Vector<Scalar>& x, const Vector<Scalar>& w, int r,
               Scalar tol = Scalar(tolerance::kCertificate)) {
  if (x.size() != w.size()) throw DimensionMismatch("verify_l0: x and w differ in length");
  const Index n = x.size();
  if (!x.allFinite() || !w.allFinite()) return false;
  if ((w.array() < -tol).any() || (w.array() > Scalar(1) + tol).any()) return false;
  if (std::abs(w.sum() - Scalar(n - r)) > tol * Scalar(n)) return false;
  const Scalar xmax = n > 0 ? x.cwiseAbs().maxCoeff() : Scalar(0);
  return (x.cwiseProduct(w).cwiseAbs().array() <= tol * std::max(Scalar(1), xmax)).all();
}

/// argmin over W in Phi_{n,r} of trace(G^T G W). The minimizer is the
/// projector onto the n - r weakest right singular directions and the value
/// is the sum of the squared discarded singular values.
template <typename Scalar>
PenaltyCertificate<Scalar> min_penalty_certificate(const Matrix<Scalar>& g, int r) {
  const int n = static_cast<int>(g.cols());
  if (r < 0 || r > n) throw ContractViolation("min_penalty_certificate: rank bound must satisfy 0 <= r <= n");
  const auto dec = svd(g);
  const Vector<Scalar> sigma = padded_singular_values(dec, n);
  PenaltyCertificate<Scalar> out;
  out.W = detail::projector<Scalar>(dec.right_vectors.rightCols(n - r));
  out.value = sigma.tail(n - r).squaredNorm();
  out.degenerate_cut = detail::cut_is_degenerate(sigma, r, Scalar(tolerance::kRank));
  return out;
}

}  // namespace rankcert
