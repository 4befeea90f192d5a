#include "oracles.hpp"
#include "rankcert/matrix_core.hpp"

#include <gtest/gtest.h>

#include <array>
#include <limits>

using namespace rankcert;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd mat(std::initializer_list<std::initializer_list<double>> rows) {
  MatrixXd m(static_cast<Index>(rows.size()), static_cast<Index>(rows.begin()->size()));
  Index i = 0;
  for (const auto& row : rows) {
    Index j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

double orthonormality_error(const MatrixXd& q) {
  return (q.transpose() * q - MatrixXd::Identity(q.cols(), q.cols())).norm();
}

}  // namespace

TEST(Svd, IdentityHasUnitValues) {
  const auto dec = svd(MatrixXd::Identity(2, 2));
  EXPECT_DOUBLE_EQ(dec.values(0), 1.0);
  EXPECT_DOUBLE_EQ(dec.values(1), 1.0);
  EXPECT_LT(orthonormality_error(dec.left_vectors), 1e-14);
  EXPECT_LT(orthonormality_error(dec.right_vectors), 1e-14);
}

TEST(Svd, DiagonalValues) {
  const auto dec = svd(mat({{3, 0}, {0, 0}}));
  EXPECT_DOUBLE_EQ(dec.values(0), 3.0);
  EXPECT_DOUBLE_EQ(dec.values(1), 0.0);
}

TEST(Svd, AllOnesMatchesCharacteristicPolynomial) {
  const MatrixXd a = mat({{1, 1}, {1, 1}});
  const Eigen::Matrix2d gram = a.transpose() * a;
  const auto lambda = oracle::sym2_eigenvalues(gram);  // 4 and 0
  const auto dec = svd(a);
  EXPECT_NEAR(dec.values(0), std::sqrt(lambda[0]), 1e-14);
  EXPECT_NEAR(dec.values(1), std::sqrt(lambda[1]), 1e-7);
  EXPECT_NEAR(dec.values(0), 2.0, 1e-14);
}

TEST(Svd, WideMatrixGetsCompleteRightBasis) {
  oracle::Draw draw(3);
  const MatrixXd a = draw.gaussian(2, 5);
  const auto dec = svd(a);
  ASSERT_EQ(dec.right_vectors.rows(), 5);
  ASSERT_EQ(dec.right_vectors.cols(), 5);
  ASSERT_EQ(dec.values.size(), 2);
  EXPECT_LT(orthonormality_error(dec.right_vectors), 1e-12);
  // Trailing columns are null directions of A.
  EXPECT_LT((a * dec.right_vectors.rightCols(3)).norm(), 1e-12);
}

TEST(Svd, ReconstructsRandomMatrices) {
  oracle::Draw draw(11);
  for (int trial = 0; trial < 100; ++trial) {
    const int m = draw.integer(1, 8);
    const int n = draw.integer(1, 8);
    const MatrixXd a = draw.gaussian(m, n);
    const auto dec = svd(a);
    const Index k = std::min(m, n);
    const MatrixXd rebuilt =
        dec.left_vectors.leftCols(k) * dec.values.asDiagonal() * dec.right_vectors.leftCols(k).transpose();
    EXPECT_LE((a - rebuilt).norm(), 1e-10 * a.norm());
    EXPECT_LT(orthonormality_error(dec.left_vectors), 1e-10);
    EXPECT_LT(orthonormality_error(dec.right_vectors), 1e-10);
    for (Index i = 1; i < k; ++i) EXPECT_GE(dec.values(i - 1), dec.values(i));
    EXPECT_GE(dec.values.minCoeff(), 0.0);
  }
}

TEST(Svd, SignConventionMakesDominantComponentPositive) {
  oracle::Draw draw(5);
  const MatrixXd a = draw.gaussian(4, 6);
  const auto first = svd(a);
  const auto again = svd(a);
  EXPECT_EQ(first.right_vectors, again.right_vectors);
  for (Index j = 0; j < first.right_vectors.cols(); ++j) {
    Index idx;
    first.right_vectors.col(j).cwiseAbs().maxCoeff(&idx);
    EXPECT_GT(first.right_vectors(idx, j), 0.0);
  }
  // Negating A flips only the left vectors.
  const auto negated = svd(MatrixXd(-a));
  EXPECT_LT((negated.right_vectors - first.right_vectors).norm(), 1e-12);
}

TEST(Svd, RejectsNonFinite) {
  MatrixXd a = MatrixXd::Ones(2, 2);
  a(0, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(svd(a), ContractViolation);
}

TEST(SymEig, ZeroMatrix) {
  const auto dec = sym_eig(MatrixXd::Zero(3, 3));
  EXPECT_EQ(dec.values, VectorXd::Zero(3));
}

TEST(SymEig, DiagonalSortedNonincreasing) {
  const auto dec = sym_eig(mat({{0.2, 0}, {0, 0.5}}));
  EXPECT_DOUBLE_EQ(dec.values(0), 0.5);
  EXPECT_DOUBLE_EQ(dec.values(1), 0.2);
}

TEST(SymEig, TwoByTwoMatchesCharacteristicPolynomial) {
  const MatrixXd a = mat({{2, 1}, {1, 2}});
  const auto expected = oracle::sym2_eigenvalues(a);  // roots of l^2 - 4l + 3
  const auto dec = sym_eig(a);
  EXPECT_NEAR(dec.values(0), expected[0], 1e-14);
  EXPECT_NEAR(dec.values(1), expected[1], 1e-14);
  EXPECT_NEAR(dec.values(0), 3.0, 1e-14);
  EXPECT_NEAR(dec.values(1), 1.0, 1e-14);
}

TEST(SymEig, RejectsNonSymmetric) {
  EXPECT_THROW(sym_eig(mat({{1, 2}, {0, 1}})), ContractViolation);
  EXPECT_THROW(sym_eig(MatrixXd::Ones(2, 3)), ContractViolation);
}

TEST(SymEig, ToleratesRoundoffAsymmetry) {
  MatrixXd a = mat({{2, 1}, {1, 2}});
  a(0, 1) += 1e-14;
  EXPECT_NO_THROW(sym_eig(a));
}

TEST(SymEig, MatchesSingularValuesForSymmetricInputs) {
  oracle::Draw draw(17);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = draw.integer(1, 8);
    const MatrixXd b = draw.gaussian(n, n);
    const MatrixXd a = b + b.transpose();
    const auto eig = sym_eig(a);
    VectorXd magnitudes = eig.values.cwiseAbs();
    std::sort(magnitudes.data(), magnitudes.data() + n, std::greater<>());
    EXPECT_LT((magnitudes - svd(a).values).norm(), 1e-10 * std::max(1.0, a.norm()));
    const MatrixXd rebuilt = eig.right_vectors * eig.values.asDiagonal() * eig.right_vectors.transpose();
    EXPECT_LE((a - rebuilt).norm(), tolerance::kReconstruction * a.norm());
  }
}

TEST(Pinv, DiagonalKeepsZero) {
  const MatrixXd p = pinv(mat({{2, 0}, {0, 0}}));
  EXPECT_TRUE(p.isApprox(mat({{0.5, 0}, {0, 0}})));
}

TEST(Pinv, ZeroMatrixTransposesShape) {
  const MatrixXd p = pinv(MatrixXd::Zero(2, 3));
  EXPECT_EQ(p.rows(), 3);
  EXPECT_EQ(p.cols(), 2);
  EXPECT_EQ(p, MatrixXd::Zero(3, 2));
}

TEST(Pinv, ColumnMatchesNormalEquations) {
  const MatrixXd a = mat({{1}, {1}});
  // (A^T A)^{-1} A^T = (1/2) [1 1]
  const MatrixXd expected = (a.transpose() * a).inverse() * a.transpose();
  EXPECT_LT((pinv(a) - expected).norm(), 1e-15);
  EXPECT_LT((pinv(a) - mat({{0.5, 0.5}})).norm(), 1e-15);
}

TEST(Pinv, PenroseConditionsOnRandomMatrices) {
  oracle::Draw draw(23);
  for (int trial = 0; trial < 100; ++trial) {
    const int m = draw.integer(1, 8);
    const int n = draw.integer(1, 8);
    const int k = draw.integer(0, std::min(m, n));
    // Mix full-rank and rank-deficient inputs.
    const MatrixXd a = trial % 2 ? draw.gaussian(m, n) : MatrixXd(draw.gaussian(m, k) * draw.gaussian(k, n));
    const MatrixXd p = pinv(a);
    const double sa = std::max(1.0, a.norm());
    const double sp = std::max(1.0, p.norm());
    EXPECT_LE((a * p * a - a).norm(), 1e-10 * sa) << "trial " << trial;
    EXPECT_LE((p * a * p - p).norm(), 1e-10 * sp) << "trial " << trial;
    const MatrixXd ap = a * p;
    const MatrixXd pa = p * a;
    EXPECT_LE((ap - ap.transpose()).norm(), 1e-10 * std::max(1.0, ap.norm()));
    EXPECT_LE((pa - pa.transpose()).norm(), 1e-10 * std::max(1.0, pa.norm()));
  }
}

TEST(NumericalRank, Examples) {
  EXPECT_EQ(numerical_rank(MatrixXd::Zero(3, 3)), 0);
  EXPECT_EQ(numerical_rank(MatrixXd::Identity(3, 3)), 3);
  const VectorXd a = VectorXd::LinSpaced(4, 1, 4);
  const VectorXd b = VectorXd::LinSpaced(3, -1, 2);
  EXPECT_EQ(numerical_rank(MatrixXd(a * b.transpose())), 1);
}

TEST(NumericalRank, RejectsNonPositiveTolerance) {
  EXPECT_THROW(numerical_rank(MatrixXd::Identity(2, 2), 0.0), ContractViolation);
}

TEST(NumericalRank, RecoversInnerDimensionOfProducts) {
  oracle::Draw draw(29);
  for (int trial = 0; trial < 100; ++trial) {
    const int m = draw.integer(1, 8);
    const int n = draw.integer(1, 8);
    const int k = draw.integer(0, std::min(m, n));
    const MatrixXd a = draw.gaussian(m, k) * draw.gaussian(k, n);
    EXPECT_EQ(numerical_rank(a), k);
    EXPECT_EQ(oracle::elimination_rank(a), k);
  }
}

TEST(MakeMatrix, ValidatesShapeAndFiniteness) {
  const std::array<double, 6> data{1, 2, 3, 4, 5, 6};
  const auto m = make_matrix<double>(2, 3, data);
  EXPECT_EQ(m(1, 0), 4.0);
  EXPECT_THROW(make_matrix<double>(2, 2, data), DimensionMismatch);
  EXPECT_THROW(make_matrix<double>(0, 6, data), ContractViolation);
  const std::array<double, 2> bad{1, std::numeric_limits<double>::infinity()};
  EXPECT_THROW(make_matrix<double>(1, 2, bad), ContractViolation);
}

TEST(ScalarTypes, FloatAndLongDoubleDecompose) {
  Eigen::MatrixXf f(2, 2);
  f << 2, 1, 1, 2;
  EXPECT_NEAR(sym_eig(f).values(0), 3.0f, 1e-5f);
  EXPECT_EQ(numerical_rank(f, 1e-5f), 2);

  Matrix<long double> l(2, 3);
  l << 1, 2, 3, 2, 4, 6;
  const auto dec = svd(l);
  EXPECT_EQ(dec.right_vectors.cols(), 3);
  EXPECT_LT(static_cast<double>(dec.values(1)), 1e-15);
}
