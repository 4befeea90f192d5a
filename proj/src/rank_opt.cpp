#include "rankcert/rank_opt.hpp"

#include "rankcert/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rankcert {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::Map<const VectorXd> vec(const MatrixXd& m) { return {m.data(), m.size()}; }

// Minimizes 1/2 x^T M x + g^T x (M symmetric PSD) starting from `start`.
// Unboxed: a minimum-norm Newton step from start. Boxed: the unboxed point
// when it is feasible, otherwise projected coordinate descent, whose every
// update is a monotone exact line minimization.
VectorXd minimize_quadratic(const MatrixXd& m, const VectorXd& g, const VectorXd& start,
                            const std::optional<Box>& box) {
  if (start.size() == 0) return start;
  const VectorXd grad = m * start + g;
  const VectorXd candidate = start - m.completeOrthogonalDecomposition().solve(grad);
  if (candidate.allFinite() && (!box || box->contains(candidate))) return candidate;
  if (!box) return start;

  VectorXd x = box->project(start);
  const Index p = x.size();
  for (int sweep = 0; sweep < 20000; ++sweep) {
    double largest_move = 0;
    for (Index k = 0; k < p; ++k) {
      const double gk = m.row(k).dot(x) + g(k);
      const double mkk = m(k, k);
      double target;
      if (mkk > 0) {
        target = x(k) - gk / mkk;
      } else if (gk > 0) {
        target = box->lower(k);
      } else if (gk < 0) {
        target = box->upper(k);
      } else {
        continue;
      }
      target = std::clamp(target, box->lower(k), box->upper(k));
      if (!std::isfinite(target)) continue;
      largest_move = std::max(largest_move, std::abs(target - x(k)));
      x(k) = target;
    }
    if (largest_move <= 1e-15 * (1.0 + x.lpNorm<Eigen::Infinity>())) break;
  }
  return x;
}

struct Trajectory {
  SolveReport& report;
  void record(double penalized, double cost, double residual, double lambda, int phase) {
    report.objective_trajectory.push_back(penalized);
    report.cost_trajectory.push_back(cost);
    report.residual_trajectory.push_back(residual);
    report.penalty_trajectory.push_back(lambda);
    report.phase_trajectory.push_back(phase);
  }
};

// Multiplicative penalty schedule: grow when the residual fails to halve.
struct PenaltySchedule {
  double lambda;
  double growth;
  int phase = 0;
  double previous_residual = kInf;
  double previous_value = kInf;

  bool at_cap() const { return lambda >= kPenaltyCap; }

  bool stalled(double value, double tol) const {
    return std::isfinite(previous_value) && std::abs(previous_value - value) <= tol;
  }

  // Returns true when lambda changed.
  bool advance(double residual, double value) {
    bool grew = false;
    if (residual > 0.5 * previous_residual && !at_cap()) {
      lambda = std::min(lambda * growth, kPenaltyCap);
      ++phase;
      grew = true;
    }
    previous_residual = residual;
    previous_value = grew ? kInf : value;
    return grew;
  }
};

double relative_tol(double tol, double value) { return tol * std::max(1.0, std::abs(value)); }

// Null-space directions of a PSD matrix.
MatrixXd flat_directions(const MatrixXd& h) {
  if (h.size() == 0) return h;
  const auto eig = sym_eig(h);
  const double cut = 1e-12 * std::max(1.0, std::abs(eig.values(0)));
  Index count = 0;
  for (Index i = 0; i < eig.values.size(); ++i) {
    if (eig.values(i) <= cut) ++count;
  }
  return eig.right_vectors.rightCols(count);
}

VectorXd default_start(const RankProblem& problem, const SolverConfig& config) {
  if (problem.initial_theta) return *problem.initial_theta;
  const Index p = problem.map.parameters();
  VectorXd theta = minimize_quadratic(problem.objective.H, problem.objective.c, VectorXd::Zero(p), std::nullopt);
  // Moving along directions where f is flat keeps theta a minimizer of f but
  // avoids starting on the symmetric points where the W-step has no pull.
  const MatrixXd flat = flat_directions(problem.objective.H);
  if (flat.cols() > 0) {
    Rng rng(config.seed);
    theta += flat * rng.gaussian(flat.cols());
  }
  return theta;
}

struct Polished {
  VectorXd theta;
  double residual = kInf;
  bool ok = false;
};

// Minimizes f subject to G(theta) W = 0 for the fixed W via the KKT system
// solved for a step from theta.
Polished polish_constrained(const RankProblem& problem, const MatrixXd& w, const VectorXd& theta) {
  Polished out;
  VectorXd a;
  MatrixXd b;
  problem.map.penalty_terms(w, a, b);
  const Index p = theta.size();
  const Index q = a.size();
  MatrixXd kkt = MatrixXd::Zero(p + q, p + q);
  kkt.topLeftCorner(p, p) = problem.objective.H;
  kkt.topRightCorner(p, q) = b.transpose();
  kkt.bottomLeftCorner(q, p) = b;
  VectorXd rhs(p + q);
  rhs.head(p) = -(problem.objective.H * theta + problem.objective.c);
  rhs.tail(q) = -(a + b * theta);
  const VectorXd step = kkt.completeOrthogonalDecomposition().solve(rhs);
  out.theta = theta + step.head(p);
  if (!out.theta.allFinite()) return out;
  if (problem.bounds && !problem.bounds->contains(out.theta, 1e-12)) return out;
  out.theta = problem.bounds ? problem.bounds->project(out.theta) : out.theta;
  out.residual = (a + b * out.theta).norm();
  out.ok = true;
  return out;
}

}  // namespace

AffineMatrixMap::AffineMatrixMap(MatrixXd base, std::vector<MatrixXd> coefficients)
    : base_(std::move(base)), coefficients_(std::move(coefficients)) {
  if (base_.rows() <= 0 || base_.cols() <= 0) throw ContractViolation("AffineMatrixMap: empty base matrix");
  require_finite(base_, "AffineMatrixMap");
  for (const auto& c : coefficients_) {
    if (c.rows() != base_.rows() || c.cols() != base_.cols()) {
      throw DimensionMismatch("AffineMatrixMap: coefficient shape differs from base");
    }
    require_finite(c, "AffineMatrixMap");
  }
}

MatrixXd AffineMatrixMap::operator()(const VectorXd& theta) const {
  if (theta.size() != parameters()) throw DimensionMismatch("AffineMatrixMap: wrong parameter count");
  MatrixXd g = base_;
  for (Index k = 0; k < parameters(); ++k) g += theta(k) * coefficients_[static_cast<std::size_t>(k)];
  return g;
}

void AffineMatrixMap::penalty_terms(const MatrixXd& w, VectorXd& a, MatrixXd& b) const {
  const MatrixXd g0w = base_ * w;
  a = vec(g0w);
  b.resize(g0w.size(), parameters());
  for (Index k = 0; k < parameters(); ++k) {
    const MatrixXd gkw = coefficients_[static_cast<std::size_t>(k)] * w;
    b.col(k) = vec(gkw);
  }
}

bool Box::contains(const VectorXd& theta, double slack) const {
  return theta.size() == lower.size() && ((theta - lower).array() >= -slack).all() &&
         ((upper - theta).array() >= -slack).all();
}

void RankProblem::validate() const {
  const Index p = map.parameters();
  if (map.rows() <= 0) throw ContractViolation("RankProblem: map is empty");
  if (objective.H.rows() != p || objective.H.cols() != p || objective.c.size() != p) {
    throw DimensionMismatch("RankProblem: objective size does not match the parameter count");
  }
  require_finite(objective.H, "RankProblem");
  require_finite(objective.c, "RankProblem");
  if (!std::isfinite(objective.d)) throw ContractViolation("RankProblem: objective constant is not finite");
  if (p > 0) {
    const auto eig = sym_eig(objective.H);
    if (eig.values(p - 1) < -1e-10 * std::max(1.0, objective.H.norm())) {
      throw ContractViolation("RankProblem: H is not positive semidefinite");
    }
  }
  if (bounds) {
    if (bounds->lower.size() != p || bounds->upper.size() != p) {
      throw DimensionMismatch("RankProblem: bounds size does not match the parameter count");
    }
    if (bounds->lower.hasNaN() || bounds->upper.hasNaN() || (bounds->lower.array() > bounds->upper.array()).any()) {
      throw ContractViolation("RankProblem: bounds require lo <= hi");
    }
  }
  if (rank_bound < 0 || rank_bound > map.cols()) {
    throw ContractViolation("RankProblem: rank bound must satisfy 0 <= r <= n");
  }
  if (initial_theta) {
    if (initial_theta->size() != p) throw DimensionMismatch("RankProblem: initial theta has the wrong size");
    require_finite(*initial_theta, "RankProblem");
  }
}

void SolverConfig::validate() const {
  if (max_outer_iters <= 0) throw ContractViolation("SolverConfig: max_outer_iters must be positive");
  if (!(penalty_init > 0)) throw ContractViolation("SolverConfig: penalty_init must be positive");
  if (!(penalty_growth > 1)) throw ContractViolation("SolverConfig: penalty_growth must exceed 1");
  if (!(stop_residual > 0)) throw ContractViolation("SolverConfig: stop_residual must be positive");
  if (!(stop_objective_delta > 0)) throw ContractViolation("SolverConfig: stop_objective_delta must be positive");
}

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::MaxIters: return "max_iters";
    case SolveStatus::Infeasible: return "infeasible";
  }
  return "unknown";
}

MatrixXd project_rank(const MatrixXd& g, int r) {
  const Index k = std::min(g.rows(), g.cols());
  if (r < 0 || r > k) throw ContractViolation("project_rank: rank must satisfy 0 <= r <= min(m, n)");
  const auto dec = svd(g);
  MatrixXd out = MatrixXd::Zero(g.rows(), g.cols());
  for (Index i = 0; i < r; ++i) {
    out.noalias() += dec.values(i) * dec.left_vectors.col(i) * dec.right_vectors.col(i).transpose();
  }
  return out;
}

RankProblem full_matrix_approximation(const MatrixXd& g, int r) {
  const Index m = g.rows();
  const Index n = g.cols();
  std::vector<MatrixXd> units;
  units.reserve(static_cast<std::size_t>(m * n));
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < m; ++i) {
      MatrixXd e = MatrixXd::Zero(m, n);
      e(i, j) = 1.0;
      units.push_back(std::move(e));
    }
  }
  RankProblem problem;
  problem.map = AffineMatrixMap(MatrixXd::Zero(m, n), std::move(units));
  const VectorXd target = vec(g);
  problem.objective = QuadraticObjective{2.0 * MatrixXd::Identity(m * n, m * n), -2.0 * target, target.squaredNorm()};
  problem.rank_bound = r;
  problem.initial_theta = target;
  return problem;
}

SolveReport solve_rank_constrained(const RankProblem& problem, const SolverConfig& config) {
  problem.validate();
  config.validate();
  const QuadraticObjective& f = problem.objective;
  const int r = problem.rank_bound;

  SolveReport report;
  report.rank = r;
  Trajectory log{report};

  VectorXd theta = default_start(problem, config);
  if (problem.bounds) theta = problem.bounds->project(theta);

  PenaltySchedule schedule{config.penalty_init, config.penalty_growth};
  MatrixXd w;
  VectorXd a;
  MatrixXd b;
  bool converged = false;
  bool polished = false;
  double penalized = kInf;
  int phase_of_w = -1;

  for (int it = 1; it <= config.max_outer_iters; ++it) {
    report.iterations = it;
    const double lambda = schedule.lambda;

    {
      // Exact W-step. At F-values near 1e13 the fresh projector can lose an
      // ulp against the previous W; keep the old one then so the recorded
      // values stay monotone within a phase.
      MatrixXd fresh = min_penalty_certificate<double>(problem.map(theta), r).W;
      VectorXd fa;
      MatrixXd fb;
      problem.map.penalty_terms(fresh, fa, fb);
      const bool same_phase = w.size() > 0 && schedule.phase == phase_of_w;
      if (!same_phase || f(theta) + lambda * (fa + fb * theta).squaredNorm() <= penalized) {
        w = std::move(fresh);
        a = std::move(fa);
        b = std::move(fb);
      }
      phase_of_w = schedule.phase;
    }
    const auto value = [&](const VectorXd& t) { return f(t) + lambda * (a + b * t).squaredNorm(); };

    const MatrixXd m = f.H + 2.0 * lambda * b.transpose() * b;
    const VectorXd g = f.c + 2.0 * lambda * b.transpose() * a;
    VectorXd next = minimize_quadratic(m, g, theta, problem.bounds);
    if (!(value(next) <= value(theta))) next = theta;
    theta = next;

    const double residual = (a + b * theta).norm();
    penalized = value(theta);
    log.record(penalized, f(theta), residual, lambda, schedule.phase);

    const double tol = relative_tol(config.stop_objective_delta, penalized);
    const bool stalled = schedule.stalled(penalized, tol);
    if (residual <= config.stop_residual && stalled) {
      converged = true;
      break;
    }
    if (stalled || residual <= config.stop_residual) {
      // The constrained minimizer for this W is feasible, and its cost can
      // only exceed the penalized value; a small gap means the penalty has
      // done its job.
      const Polished candidate = polish_constrained(problem, w, theta);
      if (candidate.ok && candidate.residual <= config.stop_residual && f(candidate.theta) - penalized <= tol) {
        theta = candidate.theta;
        log.record(f(theta) + lambda * candidate.residual * candidate.residual, f(theta), candidate.residual, lambda,
                   schedule.phase + 1);
        converged = true;
        polished = true;
        break;
      }
    }
    if (schedule.at_cap() && stalled) break;
    schedule.advance(residual, penalized);
  }

  if (!polished && w.size() > 0) {
    problem.map.penalty_terms(w, a, b);
    const double current = (a + b * theta).norm();
    const Polished candidate = polish_constrained(problem, w, theta);
    if (candidate.ok && candidate.residual <= current) {
      theta = candidate.theta;
      log.record(f(theta) + schedule.lambda * candidate.residual * candidate.residual, f(theta), candidate.residual,
                 schedule.lambda, schedule.phase + 1);
    }
  }

  const MatrixXd g_final = problem.map(theta);
  report.theta = theta;
  report.W = w;
  report.objective = f(theta);
  report.residual = (g_final * w).norm();
  const auto check = verify_certificate<double>(g_final, w, Side::Right, tolerance::kCertificate, r);
  report.certified_bound = check.certified_bound;
  report.certified = check.valid && check.certified_bound <= r && report.residual <= config.stop_residual;
  if (converged && report.certified) {
    report.status = SolveStatus::Converged;
  } else if (!report.certified && schedule.at_cap()) {
    report.status = SolveStatus::Infeasible;
  } else {
    report.status = SolveStatus::MaxIters;
  }
  return report;
}

MatrixXd trace_penalty_projector(const MatrixXd& g, double lambda) {
  if (!(lambda > 0)) throw ContractViolation("trace_penalty_projector: lambda must be positive");
  const Index n = g.cols();
  const auto dec = svd(g);
  const VectorXd sigma = padded_singular_values(dec, n);
  Index first = n;
  while (first > 0 && lambda * sigma(first - 1) * sigma(first - 1) < 1.0) --first;
  return detail::projector<double>(dec.right_vectors.rightCols(n - first));
}

SolveReport solve_rank_min(const AffineMatrixMap& map, const std::optional<Box>& bounds, const SolverConfig& config,
                           const std::optional<VectorXd>& initial_theta) {
  config.validate();
  const Index p = map.parameters();
  const int n = static_cast<int>(map.cols());
  if (map.rows() <= 0) throw ContractViolation("solve_rank_min: map is empty");
  if (bounds && (bounds->lower.size() != p || bounds->upper.size() != p)) {
    throw DimensionMismatch("solve_rank_min: bounds size does not match the parameter count");
  }
  if (initial_theta && initial_theta->size() != p) {
    throw DimensionMismatch("solve_rank_min: initial theta has the wrong size");
  }

  SolveReport report;
  Trajectory log{report};

  if (p == 0) {
    const MatrixXd& g = map.base();
    const int rank = numerical_rank(g);
    const auto cert = right_certificate<double>(g, rank);
    report.theta = VectorXd(0);
    report.W = cert.W;
    report.rank = rank;
    report.objective = static_cast<double>(rank);
    report.residual = cert.residual;
    report.iterations = 1;
    log.record(n - cert.W.trace(), report.objective, cert.residual, 0.0, 0);
    const auto check = verify_certificate<double>(g, cert.W, Side::Right, tolerance::kCertificate, rank);
    report.certified = check.valid;
    report.certified_bound = check.certified_bound;
    report.status = report.certified ? SolveStatus::Converged : SolveStatus::MaxIters;
    return report;
  }

  VectorXd theta = initial_theta.value_or(VectorXd::Zero(p));
  if (bounds) theta = bounds->project(theta);

  PenaltySchedule schedule{config.penalty_init, config.penalty_growth};
  MatrixXd w;
  VectorXd a;
  MatrixXd b;
  bool converged = false;
  double previous_trace = -1;

  for (int it = 1; it <= config.max_outer_iters; ++it) {
    report.iterations = it;
    const double lambda = schedule.lambda;

    w = trace_penalty_projector(map(theta), lambda);
    map.penalty_terms(w, a, b);
    const double trace = w.trace();
    const auto value = [&](const VectorXd& t) { return n - trace + lambda * (a + b * t).squaredNorm(); };

    const MatrixXd m = 2.0 * lambda * b.transpose() * b;
    const VectorXd g = 2.0 * lambda * b.transpose() * a;
    VectorXd next = minimize_quadratic(m, g, theta, bounds);
    if (!(value(next) <= value(theta))) next = theta;
    theta = next;

    const double residual = (a + b * theta).norm();
    const double penalized = value(theta);
    log.record(penalized, n - trace, residual, lambda, schedule.phase);

    const bool stalled = schedule.stalled(penalized, relative_tol(config.stop_objective_delta, penalized)) &&
                         std::abs(trace - previous_trace) < 0.5;
    previous_trace = trace;
    if (residual <= config.stop_residual && stalled) {
      converged = true;
      break;
    }
    if (schedule.at_cap() && stalled) break;
    schedule.advance(residual, penalized);
  }

  // Drive G(theta) W to zero for the final W.
  map.penalty_terms(w, a, b);
  const double before = (a + b * theta).norm();
  VectorXd polished = theta - b.completeOrthogonalDecomposition().solve(a + b * theta);
  if (polished.allFinite() && (!bounds || bounds->contains(polished, 1e-12))) {
    if (bounds) polished = bounds->project(polished);
    const double after = (a + b * polished).norm();
    if (after < before) {
      theta = polished;
      log.record(n - w.trace() + schedule.lambda * after * after, n - w.trace(), after, schedule.lambda,
                 schedule.phase + 1);
    }
  }

  const MatrixXd g_final = map(theta);
  report.theta = theta;
  report.W = w;
  report.rank = n - static_cast<int>(std::lround(w.trace()));
  report.objective = report.rank;
  report.residual = (g_final * w).norm();
  const auto check = verify_certificate<double>(g_final, w, Side::Right, tolerance::kCertificate, report.rank);
  report.certified_bound = check.certified_bound;
  report.certified = check.valid;
  if (converged && report.certified) {
    report.status = SolveStatus::Converged;
  } else if (!report.certified && schedule.at_cap()) {
    report.status = SolveStatus::Infeasible;
  } else {
    report.status = SolveStatus::MaxIters;
  }
  return report;
}

VectorXd restricted_least_squares(const MatrixXd& a, const VectorXd& b, const std::vector<Index>& support) {
  VectorXd x = VectorXd::Zero(a.cols());
  if (support.empty()) return x;
  MatrixXd sub(a.rows(), static_cast<Index>(support.size()));
  for (std::size_t j = 0; j < support.size(); ++j) sub.col(static_cast<Index>(j)) = a.col(support[j]);
  const auto cod = sub.completeOrthogonalDecomposition();
  VectorXd coef = cod.solve(b);
  // One refinement step on the normal-equation residual; recovers exact
  // values when the columns are orthonormal.
  coef += cod.solve(b - sub * coef);
  for (std::size_t j = 0; j < support.size(); ++j) x(support[j]) = coef(static_cast<Index>(j));
  return x;
}

SolveReport solve_sparse_ls(const MatrixXd& a, const VectorXd& b, int k, const SolverConfig& config,
                            const std::optional<VectorXd>& initial_x) {
  config.validate();
  const Index n = a.cols();
  if (a.rows() != b.size()) throw DimensionMismatch("solve_sparse_ls: A and b have different row counts");
  if (k < 0 || k > n) throw ContractViolation("solve_sparse_ls: sparsity must satisfy 0 <= k <= n");
  require_finite(a, "solve_sparse_ls");
  require_finite(b, "solve_sparse_ls");
  if (initial_x && initial_x->size() != n) throw DimensionMismatch("solve_sparse_ls: initial x has the wrong size");

  SolveReport report;
  report.rank = k;
  Trajectory log{report};

  const auto cost = [&](const VectorXd& x) { return (a * x - b).squaredNorm(); };
  const MatrixXd gram = a.transpose() * a;
  const VectorXd atb = a.transpose() * b;

  VectorXd x = initial_x ? *initial_x : VectorXd(a.completeOrthogonalDecomposition().solve(b));

  PenaltySchedule schedule{config.penalty_init, config.penalty_growth};
  VectorXd best_x;
  VectorXd best_w;
  double best_cost = kInf;
  bool converged = false;

  for (int it = 1; it <= config.max_outer_iters; ++it) {
    report.iterations = it;
    const double lambda = schedule.lambda;

    // w-step: zero weight on the k largest |x_i|.
    const std::vector<Index> support = detail::top_magnitudes<double>(x, k);
    VectorXd w = VectorXd::Ones(n);
    for (Index i : support) w(i) = 0.0;
    const auto value = [&](const VectorXd& t) { return cost(t) + lambda * w.cwiseProduct(t).squaredNorm(); };

    // x-step: ridge penalty on the off-support coordinates.
    const MatrixXd m = 2.0 * (gram + MatrixXd(lambda * w.asDiagonal()));
    VectorXd next = minimize_quadratic(m, -2.0 * atb, x, std::nullopt);
    if (!(value(next) <= value(x))) next = x;
    x = next;

    const double residual = w.cwiseProduct(x).norm();
    const double penalized = value(x);
    log.record(penalized, cost(x), residual, lambda, schedule.phase);

    const VectorXd candidate = restricted_least_squares(a, b, support);
    const double candidate_cost = cost(candidate);
    if (candidate_cost < best_cost) {
      best_cost = candidate_cost;
      best_x = candidate;
      best_w = w;
    }

    const double tol = relative_tol(config.stop_objective_delta, penalized);
    const bool stalled = schedule.stalled(penalized, tol);
    if (stalled && (residual <= config.stop_residual || best_cost - penalized <= tol)) {
      converged = true;
      break;
    }
    if (schedule.at_cap() && stalled) break;
    schedule.advance(residual, penalized);
  }

  log.record(best_cost, best_cost, best_w.cwiseProduct(best_x).norm(), schedule.lambda, schedule.phase + 1);
  report.theta = best_x;
  report.W = best_w.asDiagonal();
  report.objective = best_cost;
  report.residual = best_w.cwiseProduct(best_x).norm();
  report.certified = verify_l0<double>(best_x, best_w, k);
  report.certified_bound = report.certified ? k : static_cast<int>(n);
  report.status = converged && report.certified ? SolveStatus::Converged : SolveStatus::MaxIters;
  return report;
}

}  // namespace rankcert
