#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace kqp;
using namespace kqp::test;

namespace {

AffineOp half_plus_one() { return {Matrix<double>::Constant(1, 1, 0.5), vec({1})}; }

}  // namespace

TEST(Givens, Examples) {
  auto g = givens(3.0, 4.0);
  EXPECT_DOUBLE_EQ(g.c, 0.6);
  EXPECT_DOUBLE_EQ(g.s, 0.8);
  EXPECT_DOUBLE_EQ(g.r, 5.0);
  g = givens(1.0, 0.0);
  EXPECT_EQ(g.c, 1);
  EXPECT_EQ(g.s, 0);
  EXPECT_EQ(g.r, 1);
  g = givens(0.0, 2.0);
  EXPECT_EQ(g.c, 0);
  EXPECT_EQ(g.s, 1);
  EXPECT_EQ(g.r, 2);
}

TEST(Givens, ZeroesSecondComponent) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal;
  for (int t = 0; t < 100; ++t) {
    const double a = normal(rng), b = normal(rng);
    const auto g = givens(a, b);
    EXPECT_NEAR(-g.s * a + g.c * b, 0, 1e-15);
    EXPECT_NEAR(g.c * a + g.s * b, g.r, 1e-14);
    EXPECT_NEAR(g.c * g.c + g.s * g.s, 1, 1e-15);
  }
}

TEST(InitBasis, Normalizes) {
  ArnoldiState<double> s(2, 3);
  EXPECT_EQ(s.init_basis(vec({3, 4})), ArnoldiStatus::Ok);
  EXPECT_NEAR(s.basis()(0, 0), 0.6, 1e-16);
  EXPECT_NEAR(s.basis()(1, 0), 0.8, 1e-16);
  ArnoldiState<double> t(3, 3);
  t.init_basis(vec({1, 0, 0}));
  EXPECT_EQ(t.last_column(), vec({1, 0, 0}));
  EXPECT_EQ(t.init_basis(VectorXd::Zero(3)), ArnoldiStatus::Breakdown);
  EXPECT_EQ(t.size(), 0);
}

TEST(ArnoldiStep, ScalarObvBreaksDown) {
  const auto op = half_plus_one();
  ArnoldiState<double> s(1, 3);
  s.init_basis(vec({1}));
  EXPECT_EQ(arnoldi_step(s, op, ActiveSet{}, KrylovMode::Obv), ArnoldiStatus::Breakdown);
  EXPECT_DOUBLE_EQ(s.hessenberg()(0, 0), -0.5);
  EXPECT_EQ(s.hessenberg()(1, 0), 0);
  EXPECT_TRUE(s.broken_down());
}

TEST(ArnoldiStep, ScalarAlt) {
  const auto op = half_plus_one();
  ArnoldiState<double> s(1, 3);
  s.init_basis(vec({1}));
  arnoldi_step(s, op, ActiveSet{}, KrylovMode::Alt);
  EXPECT_DOUBLE_EQ(s.hessenberg()(0, 0), 0.5);
}

TEST(ArnoldiStep, DiagonalTwoByTwo) {
  AffineOp op{Matrix<double>(Eigen::Vector2d(0.5, 0.2).asDiagonal()), VectorXd::Zero(2)};
  ArnoldiState<double> s(2, 3);
  s.init_basis(vec({1, 1}) / std::sqrt(2.0));
  EXPECT_EQ(arnoldi_step(s, op, ActiveSet{}, KrylovMode::Alt), ArnoldiStatus::Ok);
  const Matrix<double> q = s.basis().leftCols(2);
  EXPECT_LE((q.transpose() * q - Matrix<double>::Identity(2, 2)).norm(), 1e-12);
  const Matrix<double> lhs = op.g * q.leftCols(1);
  const Matrix<double> rhs = q * s.hessenberg().topLeftCorner(2, 1);
  EXPECT_LE((lhs - rhs).norm(), 1e-12);
}

TEST(ArnoldiStep, RandomOperatorKeepsRelationAndOrthogonality) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  const Index d = 30;
  Matrix<double> g(d, d);
  for (Index i = 0; i < g.size(); ++i) g.data()[i] = normal(rng) / std::sqrt(double(d));
  AffineOp op{g, VectorXd::Zero(d)};
  for (auto mode : {KrylovMode::Obv, KrylovMode::Alt}) {
    ArnoldiState<double> s(d, 15);
    s.init_basis(VectorXd::Ones(d));
    while (!s.full()) ASSERT_EQ(arnoldi_step(s, op, ActiveSet{}, mode), ArnoldiStatus::Ok);
    ASSERT_EQ(s.size(), 16);
    const Matrix<double> q = s.basis();
    EXPECT_LE((q.transpose() * q - Matrix<double>::Identity(16, 16)).lpNorm<Eigen::Infinity>(), 1e-12);
    Matrix<double> lin = g;
    if (mode == KrylovMode::Obv) lin -= Matrix<double>::Identity(d, d);
    const Matrix<double> lhs = lin * q.leftCols(15);
    const Matrix<double> rhs = q * s.hessenberg();
    EXPECT_LE((lhs - rhs).lpNorm<Eigen::Infinity>(), 1e-12);
    EXPECT_THROW(s.extend(VectorXd::Zero(d), mode), std::logic_error);
  }
}

TEST(HessenbergLeastSquares, MatchesDenseSolve) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  for (int t = 0; t < 20; ++t) {
    const Index j = 2 + t % 8;
    Matrix<double> e = Matrix<double>::Zero(j, j - 1);
    for (Index c = 0; c < j - 1; ++c)
      for (Index r = 0; r <= c + 1; ++r) e(r, c) = normal(rng);
    VectorXd rhs(j);
    for (Index i = 0; i < j; ++i) rhs(i) = normal(rng);
    VectorXd z;
    ASSERT_TRUE(hessenberg_least_squares<double>(e, rhs, z));
    const VectorXd ref = e.colPivHouseholderQr().solve(VectorXd(-rhs));
    EXPECT_LE((z - ref).lpNorm<Eigen::Infinity>(), 1e-10 * (1 + ref.norm()));
    EXPECT_LE((e * z + rhs).norm(), rhs.norm() + 1e-12);
  }
}

TEST(Propose, ScalarObv) {
  const auto op = half_plus_one();
  ArnoldiState<double> s(1, 3);
  s.init_basis(op.apply_t(vec({0})).value - vec({0}));
  arnoldi_step(s, op, ActiveSet{}, KrylovMode::Obv);
  const VectorXd u1 = vec({1});
  const auto p = propose(s, op, u1, VectorXd(op.apply_t(u1).value - u1), KrylovMode::Obv);
  ASSERT_EQ(p.status, ProposalStatus::Ok);
  EXPECT_DOUBLE_EQ(p.z(0), 1);
  EXPECT_DOUBLE_EQ(p.u_kr(0), 2);
  EXPECT_DOUBLE_EQ(p.u_hat(0), 2);
}

TEST(Propose, ScalarAlt) {
  const auto op = half_plus_one();
  ArnoldiState<double> s(1, 3);
  s.init_basis(vec({1}));
  arnoldi_step(s, op, ActiveSet{}, KrylovMode::Alt);
  const VectorXd u1 = vec({1});
  const auto p = propose(s, op, u1, VectorXd(op.apply_t(u1).value - u1), KrylovMode::Alt);
  ASSERT_EQ(p.status, ProposalStatus::Ok);
  EXPECT_DOUBLE_EQ(p.z(0), 1);
  EXPECT_DOUBLE_EQ(p.u_hat(0), 2);
}

TEST(Propose, NotReadyWithOneColumn) {
  const auto op = half_plus_one();
  ArnoldiState<double> s(1, 3);
  s.init_basis(vec({1}));
  EXPECT_EQ(propose(s, op, vec({0}), vec({1}), KrylovMode::Alt).status, ProposalStatus::NotReady);
}

TEST(Propose, FiniteTerminationOnEqualityQp) {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 10; ++t) {
    const Index n = 2 + t % 5, m = 1 + t % 3;
    const auto prob = small_qp(n, 0, m, rng);
    const auto op = AdmmOperatord::build(prob, 0.1);
    const Index d = op.dim();
    for (auto mode : {KrylovMode::Obv, KrylovMode::Alt}) {
      ArnoldiState<double> s(d, int(d) + 1);
      VectorXd u = VectorXd::Zero(d);
      auto step = op.apply_t(u);
      s.init_basis(step.value - u);
      for (Index k = 0; k < d && !s.broken_down(); ++k) {
        auto pair = op.apply_paired(step.value, s.last_column());
        u = step.value;
        s.extend(pair.gq, mode);
        step = {pair.tu, pair.active};
      }
      const auto p = propose(s, op, u, VectorXd(step.value - u), mode);
      ASSERT_EQ(p.status, ProposalStatus::Ok);
      const VectorXd r = op.apply_t(p.u_hat).value - p.u_hat;
      EXPECT_LE(r.norm(), 1e-8 * (1 + p.u_hat.norm())) << "trial " << t;
    }
  }
}

TEST(Restart, ClearsAndIsIdempotent) {
  const auto op = half_plus_one();
  ArnoldiState<double> s(1, 3);
  s.init_basis(vec({1}));
  arnoldi_step(s, op, ActiveSet{}, KrylovMode::Alt);
  s.restart();
  EXPECT_EQ(s.size(), 0);
  EXPECT_FALSE(s.broken_down());
  EXPECT_TRUE(s.basis().isZero(0));
  EXPECT_TRUE(s.hessenberg().isZero(0));
  s.restart();
  EXPECT_EQ(s.size(), 0);
}

TEST(Restart, ReusedStateMatchesFreshState) {
  std::mt19937_64 rng(29);
  const auto prob = small_qp(5, 0, 2, rng);
  const auto op = AdmmOperatord::build(prob, 0.1);
  const Index d = op.dim();
  auto build = [&](ArnoldiState<double>& s, VectorXd u) {
    auto step = op.apply_t(u);
    s.init_basis(step.value - u);
    for (int k = 0; k < 4; ++k) {
      auto pair = op.apply_paired(step.value, s.last_column());
      u = step.value;
      s.extend(pair.gq, KrylovMode::Alt);
      step = {pair.tu, pair.active};
    }
    return propose(s, op, u, VectorXd(step.value - u), KrylovMode::Alt);
  };
  ArnoldiState<double> reused(d, 6), fresh(d, 6);
  const auto first = build(reused, VectorXd::Zero(d));
  reused.restart();
  const auto again = build(reused, first.u_hat);
  const auto scratch = build(fresh, first.u_hat);
  EXPECT_EQ(again.u_hat, scratch.u_hat);
  EXPECT_EQ(reused.basis(), fresh.basis());
}

TEST(KrylovConfig, AttemptSets) {
  EXPECT_EQ(KrylovConfig::with_tries(15, 1, KrylovMode::Alt).tries, std::vector<int>{16});
  EXPECT_EQ(KrylovConfig::with_tries(15, 3, KrylovMode::Alt).tries, (std::vector<int>{6, 11, 16}));
  KrylovConfig bad;
  bad.tries = {15};
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}
