#include "oracles.hpp"
#include "rankcert/rank_opt.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace rankcert;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd diag(std::initializer_list<double> values) {
  VectorXd v(static_cast<Index>(values.size()));
  Index i = 0;
  for (double x : values) v(i++) = x;
  return v.asDiagonal();
}

// G(theta) = [[1, t1], [t1, t2]], f = (t2 - 2)^2, r = 1.
RankProblem affine_two_by_two() {
  MatrixXd g0(2, 2), g1(2, 2), g2(2, 2);
  g0 << 1, 0, 0, 0;
  g1 << 0, 1, 1, 0;
  g2 << 0, 0, 0, 1;
  RankProblem p;
  p.map = AffineMatrixMap(g0, {g1, g2});
  p.objective.H = diag({0, 2});
  p.objective.c = VectorXd::Zero(2);
  p.objective.c(1) = -4;
  p.objective.d = 4;
  p.rank_bound = 1;
  return p;
}

// Random convex quadratic over a random affine map.
RankProblem random_problem(oracle::Draw& draw, bool boxed) {
  const int m = draw.integer(2, 5);
  const int n = draw.integer(2, 5);
  const int p = draw.integer(1, 6);
  std::vector<MatrixXd> coefficients;
  for (int k = 0; k < p; ++k) coefficients.push_back(draw.gaussian(m, n));
  RankProblem problem;
  problem.map = AffineMatrixMap(draw.gaussian(m, n), coefficients);
  const MatrixXd b = draw.gaussian(p, p);
  problem.objective.H = b.transpose() * b + 0.1 * MatrixXd::Identity(p, p);
  problem.objective.c = draw.gaussian(p, 1).col(0);
  problem.objective.d = 0;
  problem.rank_bound = draw.integer(0, std::min(m, n) - 1);
  if (boxed) {
    Box box;
    box.lower = VectorXd::Constant(p, -0.5);
    box.upper = VectorXd::Constant(p, 0.5);
    problem.bounds = box;
  }
  return problem;
}

void expect_consistent_trajectories(const SolveReport& rep) {
  const std::size_t len = rep.objective_trajectory.size();
  ASSERT_GT(len, 0u);
  ASSERT_EQ(rep.cost_trajectory.size(), len);
  ASSERT_EQ(rep.residual_trajectory.size(), len);
  ASSERT_EQ(rep.penalty_trajectory.size(), len);
  ASSERT_EQ(rep.phase_trajectory.size(), len);
  EXPECT_TRUE(oracle::monotone_within_phases(rep.objective_trajectory, rep.phase_trajectory));
  for (std::size_t k = 0; k < len; ++k) {
    const double rebuilt =
        rep.cost_trajectory[k] + rep.penalty_trajectory[k] * rep.residual_trajectory[k] * rep.residual_trajectory[k];
    EXPECT_NEAR(rep.objective_trajectory[k], rebuilt, 1e-9 * std::max(1.0, std::abs(rebuilt)));
    EXPECT_LE(rep.penalty_trajectory[k], kPenaltyCap);
  }
  if (rep.certified) {
    EXPECT_LE(rep.residual_trajectory.back(), SolverConfig{}.stop_residual);
  }
}

}  // namespace

// AffineMatrixMap

TEST(AffineMatrixMap, EvaluatesAndRejectsShapes) {
  const auto p = affine_two_by_two();
  MatrixXd expected(2, 2);
  expected << 1, 3, 3, 5;
  EXPECT_EQ(p.map(VectorXd::LinSpaced(2, 3, 5)), expected);
  EXPECT_THROW(AffineMatrixMap(MatrixXd::Zero(2, 2), {MatrixXd::Zero(2, 3)}), DimensionMismatch);
  EXPECT_THROW(p.map(VectorXd::Zero(3)), DimensionMismatch);
}

TEST(AffineMatrixMap, IsAffine) {
  oracle::Draw draw(101);
  for (int trial = 0; trial < 50; ++trial) {
    const auto problem = random_problem(draw, false);
    const Index p = problem.map.parameters();
    const VectorXd x = draw.gaussian(p, 1).col(0);
    const VectorXd y = draw.gaussian(p, 1).col(0);
    const double a = 4 * draw.uniform() - 2;
    const MatrixXd lhs = problem.map(a * x + (1 - a) * y);
    const MatrixXd rhs = a * problem.map(x) + (1 - a) * problem.map(y);
    EXPECT_LT((lhs - rhs).norm(), 1e-12 * std::max(1.0, lhs.norm()));
  }
}

TEST(AffineMatrixMap, PenaltyTermsMatchEvaluation) {
  oracle::Draw draw(103);
  const auto problem = random_problem(draw, false);
  const MatrixXd q = draw.orthogonal(problem.map.cols()).leftCols(1);
  const MatrixXd w = q * q.transpose();
  VectorXd a;
  MatrixXd b;
  problem.map.penalty_terms(w, a, b);
  const VectorXd theta = draw.gaussian(problem.map.parameters(), 1).col(0);
  const MatrixXd gw = problem.map(theta) * w;
  const VectorXd flat = Eigen::Map<const VectorXd>(gw.data(), gw.size());
  EXPECT_LT((a + b * theta - flat).norm(), 1e-12);
}

// project_rank

TEST(ProjectRank, Examples) {
  EXPECT_LT((project_rank(diag({3, 1}), 1) - diag({3, 0})).norm(), 1e-14);
  oracle::Draw draw(107);
  const MatrixXd g = draw.gaussian(4, 2) * draw.gaussian(2, 5);
  EXPECT_LT((project_rank(g, 2) - g).norm(), 1e-12 * g.norm());
  EXPECT_LT((project_rank(g, 3) - g).norm(), 1e-12 * g.norm());
  EXPECT_EQ(project_rank(g, 0), MatrixXd::Zero(4, 5));
  EXPECT_THROW(project_rank(g, 5), ContractViolation);
}

TEST(ProjectRank, MatchesEckartYoungError) {
  oracle::Draw draw(109);
  for (int trial = 0; trial < 50; ++trial) {
    const int m = draw.integer(1, 8);
    const int n = draw.integer(1, 8);
    const MatrixXd g = draw.gaussian(m, n);
    const int r = draw.integer(0, std::min(m, n));
    const MatrixXd x = project_rank(g, r);
    EXPECT_LE(numerical_rank(x), r);
    EXPECT_NEAR((g - x).squaredNorm(), oracle::eckart_young_error(g, r), 1e-9 * std::max(1.0, g.squaredNorm()));
  }
}

// solve_rank_constrained

TEST(SolveRankConstrained, InactiveConstraintGivesUnconstrainedMinimizer) {
  oracle::Draw draw(113);
  auto problem = random_problem(draw, false);
  problem.rank_bound = static_cast<int>(std::min(problem.map.rows(), problem.map.cols()));
  const auto rep = solve_rank_constrained(problem);
  const VectorXd minimizer = problem.objective.H.ldlt().solve(-problem.objective.c);
  EXPECT_LT((rep.theta - minimizer).norm(), 1e-9 * std::max(1.0, minimizer.norm()));
  EXPECT_LT(rep.residual, 1e-12);
  EXPECT_TRUE(rep.certified);
  EXPECT_EQ(rep.status, SolveStatus::Converged);
}

TEST(SolveRankConstrained, AffineTwoByTwoReachesZero) {
  const auto rep = solve_rank_constrained(affine_two_by_two());
  EXPECT_LE(rep.objective, 1e-6);
  EXPECT_TRUE(rep.certified);
  EXPECT_EQ(rep.status, SolveStatus::Converged);
  // Rank one with unit (1,1) entry: t2 = t1^2, and t1^2 -> 2.
  EXPECT_NEAR(rep.theta(1), rep.theta(0) * rep.theta(0), 1e-8);
  EXPECT_NEAR(rep.theta(0) * rep.theta(0), 2.0, 1e-3);
  expect_consistent_trajectories(rep);
}

TEST(SolveRankConstrained, FullMatrixMatchesEckartYoung) {
  oracle::Draw draw(127);
  for (int trial = 0; trial < 20; ++trial) {
    const int m = draw.integer(1, 6);
    const int n = draw.integer(1, 6);
    const MatrixXd g = draw.gaussian(m, n);
    const int r = std::min({1, m, n});
    const auto rep = solve_rank_constrained(full_matrix_approximation(g, r));
    const double optimum = oracle::eckart_young_error(g, r);
    EXPECT_GE(rep.objective, optimum - 1e-9);
    EXPECT_LE(std::abs(rep.objective - optimum), 1e-6 * std::max(1.0, optimum)) << "trial " << trial;
    EXPECT_TRUE(rep.certified);
    expect_consistent_trajectories(rep);
  }
}

TEST(SolveRankConstrained, MonotoneAndSoundOnRandomProblems) {
  oracle::Draw draw(131);
  SolverConfig config;
  config.max_outer_iters = 200;
  for (int trial = 0; trial < 50; ++trial) {
    const auto problem = random_problem(draw, trial % 3 == 0);
    const auto rep = solve_rank_constrained(problem, config);
    expect_consistent_trajectories(rep);
    if (problem.bounds) {
      EXPECT_TRUE(problem.bounds->contains(rep.theta, 1e-12));
    }
    if (rep.certified) {
      const auto check = verify_certificate<double>(problem.map(rep.theta), rep.W, Side::Right);
      EXPECT_TRUE(check.valid);
      EXPECT_LE(check.certified_bound, problem.rank_bound);
      EXPECT_EQ(rep.certified_bound, check.certified_bound);
    }
  }
}

TEST(SolveRankConstrained, BoxedRankOne) {
  // With 0 <= t1 <= 1 the rank-one curve t2 = t1^2 stays below 1, so the best
  // feasible point is (1, 1) with f = 1.
  auto problem = affine_two_by_two();
  Box box;
  box.lower = VectorXd::Zero(2);
  box.upper = VectorXd::Constant(2, 1.0);
  box.upper(1) = 10;
  problem.bounds = box;
  const auto rep = solve_rank_constrained(problem);
  EXPECT_TRUE(box.contains(rep.theta, 1e-12));
  EXPECT_TRUE(rep.certified);
  EXPECT_GE(rep.objective, 1 - 1e-9);
  EXPECT_NEAR(rep.objective, 1.0, 1e-4);
  expect_consistent_trajectories(rep);
}

TEST(SolveRankConstrained, DeterministicForSeed) {
  oracle::Draw draw(137);
  const auto problem = random_problem(draw, false);
  const auto a = solve_rank_constrained(problem);
  const auto b = solve_rank_constrained(problem);
  EXPECT_EQ(a.theta, b.theta);
  EXPECT_EQ(a.objective_trajectory, b.objective_trajectory);
}

TEST(SolveRankConstrained, Validation) {
  auto problem = affine_two_by_two();
  problem.rank_bound = 3;
  EXPECT_THROW(solve_rank_constrained(problem), ContractViolation);
  problem = affine_two_by_two();
  problem.objective.H = diag({-1, 2});
  EXPECT_THROW(solve_rank_constrained(problem), ContractViolation);
  problem = affine_two_by_two();
  problem.objective.c = VectorXd::Zero(3);
  EXPECT_THROW(solve_rank_constrained(problem), DimensionMismatch);
  problem = affine_two_by_two();
  problem.bounds = Box{VectorXd::Constant(2, 1.0), VectorXd::Zero(2)};
  EXPECT_THROW(solve_rank_constrained(problem), ContractViolation);
  SolverConfig config;
  config.penalty_growth = 1;
  EXPECT_THROW(solve_rank_constrained(affine_two_by_two(), config), ContractViolation);
}

// solve_rank_min

TEST(SolveRankMin, ConstantDiagonal) {
  const auto rep = solve_rank_min(AffineMatrixMap(diag({1, 1, 0}), {}), std::nullopt);
  EXPECT_EQ(rep.rank, 2);
  EXPECT_LT((rep.W - diag({0, 0, 1})).norm(), 1e-14);
  EXPECT_TRUE(rep.certified);
}

TEST(SolveRankMin, ConstantZero) {
  const auto rep = solve_rank_min(AffineMatrixMap(MatrixXd::Zero(2, 3), {}), std::nullopt);
  EXPECT_EQ(rep.rank, 0);
  EXPECT_LT((rep.W - MatrixXd::Identity(3, 3)).norm(), 1e-14);
}

TEST(SolveRankMin, ConstantIdentity) {
  const auto rep = solve_rank_min(AffineMatrixMap(MatrixXd::Identity(4, 4), {}), std::nullopt);
  EXPECT_EQ(rep.rank, 4);
  EXPECT_EQ(rep.W, MatrixXd::Zero(4, 4));
}

TEST(SolveRankMin, ConstantMapsMatchNumericalRank) {
  oracle::Draw draw(139);
  for (int trial = 0; trial < 100; ++trial) {
    const int m = draw.integer(1, 8);
    const int n = draw.integer(1, 8);
    const int s = draw.integer(0, std::min(m, n));
    const MatrixXd g = draw.gaussian(m, s) * draw.gaussian(s, n);
    const auto rep = solve_rank_min(AffineMatrixMap(g, {}), std::nullopt);
    EXPECT_EQ(rep.rank, s);
    EXPECT_EQ(rep.rank, oracle::elimination_rank(g));
    const auto check = verify_certificate<double>(g, rep.W, Side::Right);
    EXPECT_TRUE(check.valid);
    EXPECT_EQ(check.certified_bound, rep.rank);
  }
}

TEST(SolveRankMin, ParametricFindsLowerRank) {
  // G(t) = diag(1, 1 - t, 2 - t): rank drops to 2 at t = 1 or t = 2.
  // The scheme is local: start where the second direction is already weak.
  std::vector<MatrixXd> coefficients{diag({0, -1, -1})};
  const auto rep = solve_rank_min(AffineMatrixMap(diag({1, 1, 2}), coefficients), std::nullopt, {},
                                  VectorXd::Constant(1, 0.8));
  EXPECT_EQ(rep.rank, 2);
  EXPECT_TRUE(rep.certified);
  const auto check = verify_certificate<double>(AffineMatrixMap(diag({1, 1, 2}), coefficients)(rep.theta), rep.W,
                                                Side::Right);
  EXPECT_TRUE(check.valid);
  EXPECT_EQ(check.certified_bound, 2);
}

TEST(TracePenaltyProjector, KeepsWeakDirections) {
  EXPECT_LT((trace_penalty_projector(diag({3, 0.5}), 1.0) - diag({0, 1})).norm(), 1e-14);
  EXPECT_THROW(trace_penalty_projector(diag({1, 1}), 0.0), ContractViolation);
}

TEST(TracePenaltyProjector, MaximizesPenalizedTrace) {
  oracle::Draw draw(149);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = draw.integer(1, 6);
    const MatrixXd g = draw.gaussian(draw.integer(1, 6), n);
    const double lambda = std::pow(10.0, draw.uniform() * 4 - 2);
    const MatrixXd gram = g.transpose() * g;
    const MatrixXd w = trace_penalty_projector(g, lambda);
    const double value = w.trace() - lambda * (gram * w).trace();
    // Closed form: sum over eigenvalues of max(0, 1 - lambda * mu).
    const VectorXd mu = Eigen::SelfAdjointEigenSolver<MatrixXd>(gram).eigenvalues();
    const double expected = (1 - lambda * mu.array()).max(0.0).sum();
    EXPECT_NEAR(value, expected, 1e-9 * std::max(1.0, expected));
    for (int s = 0; s < 100; ++s) {
      const MatrixXd q = draw.orthogonal(n);
      VectorXd d(n);
      for (int i = 0; i < n; ++i) d(i) = draw.uniform();
      const MatrixXd sample = q * d.asDiagonal() * q.transpose();
      EXPECT_LE(sample.trace() - lambda * (gram * sample).trace(), value + 1e-9);
    }
  }
}

// solve_sparse_ls

TEST(SolveSparseLs, IdentityDesignIsHardThresholding) {
  VectorXd b(5);
  b << 0.3, -2, 1.5, 0.1, -0.7;
  const auto rep = solve_sparse_ls(MatrixXd::Identity(5, 5), b, 2);
  VectorXd expected = VectorXd::Zero(5);
  expected(1) = -2;
  expected(2) = 1.5;
  EXPECT_EQ(rep.theta, expected);
  EXPECT_TRUE(rep.certified);
  EXPECT_TRUE(verify_l0<double>(rep.theta, rep.W.diagonal(), 2));
}

TEST(SolveSparseLs, FullSupportIsLeastSquares) {
  oracle::Draw draw(151);
  const MatrixXd a = draw.gaussian(8, 4);
  const VectorXd b = draw.gaussian(8, 1).col(0);
  const auto rep = solve_sparse_ls(a, b, 4);
  const VectorXd ls = a.colPivHouseholderQr().solve(b);
  EXPECT_LT((rep.theta - ls).norm(), 1e-9);
  EXPECT_EQ(rep.W, MatrixXd::Zero(4, 4));
  EXPECT_TRUE(rep.certified);
}

TEST(SolveSparseLs, PlantedMatchesBruteForce) {
  oracle::Draw draw(157);
  const MatrixXd a = draw.gaussian(8, 6);
  VectorXd x_star = VectorXd::Zero(6);
  x_star(1) = 1.3;
  x_star(4) = -0.8;
  const VectorXd b = a * x_star;
  const auto rep = solve_sparse_ls(a, b, 2);
  const auto best = oracle::brute_force_sparse_ls(a, b, 2);
  EXPECT_NEAR(rep.objective, best.value, 1e-9);
  EXPECT_LT((rep.theta - x_star).norm(), 1e-8);
}

TEST(SolveSparseLs, NeverBeatsBruteForceAndMatchesWithOracleStart) {
  oracle::Draw draw(163);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = draw.integer(1, 12);
    const int m = draw.integer(1, 12);
    const int k = draw.integer(0, n);
    const MatrixXd a = draw.gaussian(m, n);
    const VectorXd b = draw.gaussian(m, 1).col(0);
    const auto best = oracle::brute_force_sparse_ls(a, b, k);
    const auto rep = solve_sparse_ls(a, b, k);
    EXPECT_GE(rep.objective, best.value - 1e-9);
    EXPECT_LE((rep.theta.array() != 0).count(), k);
    EXPECT_TRUE(oracle::monotone_within_phases(rep.objective_trajectory, rep.phase_trajectory));
    if (rep.certified) {
      EXPECT_TRUE(verify_l0<double>(rep.theta, rep.W.diagonal(), k));
    }

    const auto seeded = solve_sparse_ls(a, b, k, {}, best.x);
    EXPECT_NEAR(seeded.objective, best.value, 1e-9 * std::max(1.0, best.value)) << "trial " << trial;
  }
}

TEST(SolveSparseLs, RestrictedLeastSquares) {
  MatrixXd a(3, 2);
  a << 1, 0, 0, 1, 0, 0;
  VectorXd b(3);
  b << 2, 3, 4;
  const VectorXd x = restricted_least_squares(a, b, {1});
  EXPECT_DOUBLE_EQ(x(0), 0.0);
  EXPECT_DOUBLE_EQ(x(1), 3.0);
}

TEST(SolveSparseLs, Validation) {
  EXPECT_THROW(solve_sparse_ls(MatrixXd::Identity(3, 3), VectorXd::Zero(3), 4), ContractViolation);
  EXPECT_THROW(solve_sparse_ls(MatrixXd::Identity(3, 3), VectorXd::Zero(2), 1), DimensionMismatch);
}
