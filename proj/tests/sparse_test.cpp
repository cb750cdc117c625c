#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace kqp;
using namespace kqp::test;

TEST(Spmv, IdentityReturnsInput) {
  EXPECT_EQ(spmv(CscMatrixd::identity(2), vec({3, -1})), vec({3, -1}));
}

TEST(Spmv, MatchesDenseProduct) {
  EXPECT_EQ(spmv(dense({{1, 2}, {0, 3}}), vec({1, 1})), vec({3, 3}));
}

TEST(Spmv, ZeroPattern) {
  EXPECT_EQ(spmv(CscMatrixd::zero(2, 2), vec({5, 5})), vec({0, 0}));
}

TEST(SpmvTranspose, Examples) {
  EXPECT_EQ(spmv_transpose(CscMatrixd::identity(2), vec({1, 2})), vec({1, 2}));
  EXPECT_EQ(spmv_transpose(dense({{1, 2}, {0, 3}}), vec({1, 1})), vec({1, 5}));
  EXPECT_EQ(spmv_transpose(dense({{1, -1}}), vec({2})), vec({2, -2}));
}

TEST(SpmvPaired, IdentityAndZero) {
  const auto v = make_dual<double>(vec({1, 2}), vec({3, 4}));
  const auto id = spmv_paired(CscMatrixd::identity(2), v);
  EXPECT_EQ(VectorXd(primary(id)), vec({1, 2}));
  EXPECT_EQ(VectorXd(shadow(id)), vec({3, 4}));
  const auto z = spmv_paired(CscMatrixd::zero(2, 2), v);
  EXPECT_TRUE(z.isZero(0));
}

TEST(SpmvPaired, BitwiseEqualToTwoSingleCalls) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 5; ++trial) {
    const auto a = random_sparse(50, 50, 0.1, rng);
    VectorXd p(50), s(50);
    for (Index i = 0; i < 50; ++i) {
      p(i) = normal(rng);
      s(i) = normal(rng);
    }
    const auto pair = spmv_paired(a, make_dual<double>(p, s));
    EXPECT_EQ(VectorXd(primary(pair)), spmv(a, p));
    EXPECT_EQ(VectorXd(shadow(pair)), spmv(a, s));
    const auto pt = spmv_transpose_paired(a, make_dual<double>(p, s));
    EXPECT_EQ(VectorXd(primary(pt)), spmv_transpose(a, p));
    EXPECT_EQ(VectorXd(shadow(pt)), spmv_transpose(a, s));
  }
}

TEST(Spmv, RandomAgainstDense) {
  std::mt19937_64 rng(11);
  const auto a = random_sparse(17, 9, 0.3, rng);
  VectorXd x = VectorXd::LinSpaced(9, -1, 1), y = VectorXd::LinSpaced(17, 2, -2);
  EXPECT_LE((spmv(a, x) - a.to_dense() * x).lpNorm<Eigen::Infinity>(), 1e-14);
  EXPECT_LE((spmv_transpose(a, y) - a.to_dense().transpose() * y).lpNorm<Eigen::Infinity>(), 1e-14);
}

TEST(SpmvSymmetric, UpperStorageActsAsFullMatrix) {
  std::mt19937_64 rng(5);
  const Matrix<double> w = random_spd(8, rng);
  const auto upper = CscMatrixd::from_dense(w).upper();
  const VectorXd x = VectorXd::LinSpaced(8, -3, 4);
  EXPECT_LE((spmv_symmetric(upper, x) - w * x).lpNorm<Eigen::Infinity>(), 1e-12);
  EXPECT_EQ(upper.symmetric_from_upper().to_dense(), CscMatrixd::from_dense(w).to_dense());
}

TEST(CscMatrix, RejectsMalformedInput) {
  EXPECT_THROW(CscMatrixd(2, 2, {0, 1}, {0}, {1.0}), std::invalid_argument);
  EXPECT_THROW(CscMatrixd(2, 1, {0, 2}, {1, 0}, {1.0, 2.0}), std::invalid_argument);
  EXPECT_THROW(CscMatrixd(2, 1, {0, 1}, {2}, {1.0}), std::invalid_argument);
}

TEST(CscMatrix, TransposeRoundTrip) {
  std::mt19937_64 rng(9);
  const auto a = random_sparse(6, 4, 0.5, rng);
  EXPECT_EQ(a.transpose().transpose(), a);
  EXPECT_EQ(a.transpose().to_dense(), Matrix<double>(a.to_dense().transpose()));
}
