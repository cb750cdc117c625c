#ifndef KQP_KKT_ORACLE_HPP
#define KQP_KKT_ORACLE_HPP

#include "kqp/qp_model.hpp"

#include <Eigen/QR>

#include <stdexcept>

namespace kqp {

struct NoSolutionFound : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Reference solver for tiny problems: enumerates all 2^m1 active sets,
/// solves each equality-constrained KKT system densely, and returns the first
/// point that is stationary, primal feasible and dual feasible within `tol`.
///
/// Active sets are visited in increasing bitmask order (bit i set means
/// inequality row i is held at equality).
template <typename Scalar>
Iterate<Scalar> kkt_oracle(const QpProblem<Scalar>& prob, Scalar tol) {
  prob.validate();
  detail::require(prob.m1 <= 12, "kkt_oracle: at most 12 inequalities can be enumerated");
  const Index n = prob.n();
  const Matrix<Scalar> p = prob.P.symmetric_from_upper().to_dense();
  const Matrix<Scalar> a = prob.A.to_dense();
  const auto scale = [](const auto& v) {
    return Scalar(1) + (v.size() ? v.template lpNorm<Eigen::Infinity>() : Scalar(0));
  };

  for (unsigned long mask = 0; mask < (1ul << prob.m1); ++mask) {
    std::vector<Index> rows;
    for (Index i = 0; i < prob.m1; ++i)
      if (mask & (1ul << i)) rows.push_back(i);
    for (Index i = prob.m1; i < prob.m(); ++i) rows.push_back(i);
    const Index k = static_cast<Index>(rows.size());

    Matrix<Scalar> kkt = Matrix<Scalar>::Zero(n + k, n + k);
    Vector<Scalar> rhs(n + k);
    kkt.topLeftCorner(n, n) = p;
    rhs.head(n) = -prob.c;
    for (Index r = 0; r < k; ++r) {
      kkt.block(0, n + r, n, 1) = a.row(rows[r]).transpose();
      kkt.block(n + r, 0, 1, n) = a.row(rows[r]);
      rhs(n + r) = prob.b(rows[r]);
    }

    const Vector<Scalar> z = kkt.completeOrthogonalDecomposition().solve(rhs);
    if (!z.allFinite()) continue;
    if ((kkt * z - rhs).template lpNorm<Eigen::Infinity>() > tol * scale(rhs)) continue;

    Iterate<Scalar> it = Iterate<Scalar>::zero(n, prob.m());
    it.x = z.head(n);
    for (Index r = 0; r < k; ++r) it.y(rows[r]) = z(n + r);

    const Vector<Scalar> slack = prob.b - a * it.x;
    bool ok = true;
    for (Index i = 0; i < prob.m1 && ok; ++i) {
      if (mask & (1ul << i))
        ok = it.y(i) >= -tol * scale(it.y);
      else
        ok = slack(i) >= -tol * scale(prob.b);
    }
    if (ok) return it;
  }
  throw NoSolutionFound("kkt_oracle: no active set yields a KKT point");
}

}  // namespace kqp

#endif  // KQP_KKT_ORACLE_HPP
