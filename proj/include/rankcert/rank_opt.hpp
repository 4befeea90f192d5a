// Solvers for rank-constrained and rank-minimization problems.
//
// Both problems are posed over an affine family G(theta) = G0 + sum_k theta_k G_k.
// The rank constraint rank(G(theta)) <= r is replaced by a certificate
// W in Phi_{n,r} with G(theta) W = 0, and the bilinear equality is handled by
// the exterior penalty lambda ||G(theta) W||_F^2. Each round alternates an
// exact W-step (a spectral projector) with an exact theta-step (a convex
// quadratic), so the penalized objective never increases at fixed lambda.
//
// Results are local: the reports carry an independent certificate check, not
// a claim of global optimality.
#pragma once

#include "rankcert/rank_cert.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace rankcert {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Largest penalty weight the solvers will use.
inline constexpr double kPenaltyCap = 1e12;

class AffineMatrixMap {
 public:
  AffineMatrixMap() = default;
  /// Throws DimensionMismatch unless every coefficient matches base's shape.
  AffineMatrixMap(MatrixXd base, std::vector<MatrixXd> coefficients);

  Index rows() const { return base_.rows(); }
  Index cols() const { return base_.cols(); }
  Index parameters() const { return static_cast<Index>(coefficients_.size()); }

  const MatrixXd& base() const { return base_; }
  const std::vector<MatrixXd>& coefficients() const { return coefficients_; }

  MatrixXd operator()(const VectorXd& theta) const;

  /// Constant and linear parts of vec(G(theta) W) = a + B theta
  /// (column-major vec).
  void penalty_terms(const MatrixXd& w, VectorXd& a, MatrixXd& b) const;

 private:
  MatrixXd base_;
  std::vector<MatrixXd> coefficients_;
};

/// Coordinate box; entries may be +-infinity.
struct Box {
  VectorXd lower;
  VectorXd upper;

  VectorXd project(const VectorXd& theta) const { return theta.cwiseMax(lower).cwiseMin(upper); }
  bool contains(const VectorXd& theta, double slack = 0) const;
};

/// f(theta) = 1/2 theta^T H theta + c^T theta + d with H symmetric PSD.
struct QuadraticObjective {
  MatrixXd H;
  VectorXd c;
  double d = 0;

  double operator()(const VectorXd& theta) const { return 0.5 * theta.dot(H * theta) + c.dot(theta) + d; }
};

struct RankProblem {
  QuadraticObjective objective;
  AffineMatrixMap map;
  std::optional<Box> bounds;
  int rank_bound = 0;
  /// Starting point; when absent the solver starts from a minimizer of f.
  std::optional<VectorXd> initial_theta;

  /// Throws ContractViolation / DimensionMismatch on inconsistent data.
  void validate() const;
};

struct SolverConfig {
  int max_outer_iters = 500;
  double penalty_init = 1.0;
  double penalty_growth = 10.0;
  double stop_residual = 1e-9;
  double stop_objective_delta = 1e-10;
  std::uint64_t seed = 0;

  void validate() const;
};

enum class SolveStatus { Converged, MaxIters, Infeasible };

const char* to_string(SolveStatus status);

struct SolveReport {
  VectorXd theta;
  MatrixXd W;
  /// f(theta) at the reported point (||Ax - b||^2 for sparse least squares).
  double objective = 0;
  /// ||G(theta) W||_F at the reported point.
  double residual = 0;

  // One entry per recorded iterate. objective_trajectory holds the penalized
  // value f + lambda ||G W||_F^2; it is nonincreasing while phase is constant.
  // The closing entry of a run is the polished feasible point and gets its
  // own phase.
  std::vector<double> objective_trajectory;
  std::vector<double> cost_trajectory;
  std::vector<double> residual_trajectory;
  std::vector<double> penalty_trajectory;
  std::vector<int> phase_trajectory;

  bool certified = false;
  /// Bound returned by the final certificate check.
  int certified_bound = 0;
  /// Target rank for solve_rank_constrained, r* for solve_rank_min, k for
  /// solve_sparse_ls.
  int rank = 0;
  int iterations = 0;
  SolveStatus status = SolveStatus::MaxIters;
};

/// Best Frobenius approximation of rank at most r (truncated SVD).
MatrixXd project_rank(const MatrixXd& g, int r);

/// min ||X - G||_F^2 s.t. rank(X) <= r, with theta = vec(X) (column-major),
/// G(theta) = X and the start point X = G.
RankProblem full_matrix_approximation(const MatrixXd& g, int r);

SolveReport solve_rank_constrained(const RankProblem& problem, const SolverConfig& config = {});

/// Minimizes rank(G(theta)) over the box. With no parameters the answer is
/// closed form: r* = numerical_rank(G0) and W is its right certificate.
SolveReport solve_rank_min(const AffineMatrixMap& map, const std::optional<Box>& bounds,
                           const SolverConfig& config = {},
                           const std::optional<VectorXd>& initial_theta = std::nullopt);

/// W-step of solve_rank_min: argmax of trace(W) - lambda trace(G^T G W) over
/// 0 <= W <= I, the projector onto right singular directions with
/// sigma^2 < 1 / lambda.
MatrixXd trace_penalty_projector(const MatrixXd& g, double lambda);

/// min ||A x - b||^2 subject to ||x||_0 <= k. W is diag(w) with w the binary
/// off-support indicator. `initial_x` seeds the first support selection.
SolveReport solve_sparse_ls(const MatrixXd& a, const VectorXd& b, int k, const SolverConfig& config = {},
                            const std::optional<VectorXd>& initial_x = std::nullopt);

/// Least squares restricted to the given support (other entries zero).
VectorXd restricted_least_squares(const MatrixXd& a, const VectorXd& b, const std::vector<Index>& support);

}  // namespace rankcert
