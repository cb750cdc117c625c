#ifndef KQP_QP_MODEL_HPP
#define KQP_QP_MODEL_HPP

#include "kqp/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace kqp {

/// minimise ½xᵀPx + cᵀx  subject to  Ax + s = b,  s ∈ ℝ₊^{m1} × {0}^{m2}.
///
/// The first m1 rows of A are inequalities (Ax ≤ b), the remaining m2 rows
/// equalities. P holds only its upper triangle.
template <typename Scalar>
struct QpProblem {
  CscMatrix<Scalar> P;
  Vector<Scalar> c;
  CscMatrix<Scalar> A;
  Vector<Scalar> b;
  Index m1 = 0;
  Index m2 = 0;

  Index n() const { return c.size(); }
  Index m() const { return b.size(); }
  Index dim() const { return n() + m(); }

  /// Throws std::invalid_argument on inconsistent dimensions, a P with
  /// entries below the diagonal, or non-finite data.
  void validate() const {
    detail::require(P.nrows() == n() && P.ncols() == n(), "QpProblem: P must be n x n");
    detail::require(A.ncols() == n() && A.nrows() == m(), "QpProblem: A must be m x n");
    detail::require(m1 >= 0 && m2 >= 0 && m1 + m2 == m(), "QpProblem: m1 + m2 must equal m");
    detail::require(P.validate().empty() && A.validate().empty(), "QpProblem: malformed CSC");
    for (Index j = 0; j < P.ncols(); ++j)
      for (Index p = P.colptr()[j]; p < P.colptr()[j + 1]; ++p)
        detail::require(P.rowind()[p] <= j, "QpProblem: P must be stored upper triangular");
    auto finite = [](auto span) {
      return std::all_of(span.begin(), span.end(), [](Scalar v) { return std::isfinite(v); });
    };
    detail::require(finite(P.nzval()) && finite(A.nzval()) && c.allFinite() && b.allFinite(),
                    "QpProblem: non-finite data");
  }
};

/// Primal-dual pair. The flat layout used by the operators is u = (x, y).
template <typename Scalar>
struct Iterate {
  Vector<Scalar> x;
  Vector<Scalar> y;

  static Iterate zero(Index n, Index m) {
    return {Vector<Scalar>::Zero(n), Vector<Scalar>::Zero(m)};
  }

  static Iterate from_flat(const Vector<Scalar>& u, Index n) {
    detail::require(u.size() >= n, "Iterate::from_flat: vector too short");
    return {u.head(n), u.tail(u.size() - n)};
  }

  Vector<Scalar> flat() const {
    Vector<Scalar> u(x.size() + y.size());
    u << x, y;
    return u;
  }
};

template <typename Scalar>
struct ResidualTriple {
  Scalar r_p = 0;
  Scalar r_d = 0;
  Scalar pd = 0;

  Scalar max() const { return std::max({r_p, r_d, pd}); }
};

struct TerminationConfig {
  double eps = 1e-6;
  long max_iters = 20000;
  long check_every = 25;

  void validate() const {
    detail::require(eps > 0, "TerminationConfig: eps must be positive");
    detail::require(check_every >= 1, "TerminationConfig: check_every must be >= 1");
    detail::require(max_iters >= 0, "TerminationConfig: max_iters must be >= 0");
  }
};

/// Projection onto ℝ₊^{m1} × ℝ^{m2}.
template <typename Derived>
auto project_dual_cone(const Eigen::MatrixBase<Derived>& v, Index m1, Index m2) {
  using Scalar = typename Derived::Scalar;
  detail::require(v.size() == m1 + m2, "project_dual_cone: length must be m1 + m2");
  Vector<Scalar> out = v;
  out.head(m1) = out.head(m1).cwiseMax(Scalar(0));
  return out;
}

/// Termination residuals. Inequality rows contribute [Ax − b]₊ to r_p,
/// equality rows |Ax − b|.
template <typename Scalar>
ResidualTriple<Scalar> residuals(const QpProblem<Scalar>& prob, const Iterate<Scalar>& it) {
  detail::require(it.x.size() == prob.n() && it.y.size() == prob.m(),
                  "residuals: iterate dimensions do not match the problem");
  const Vector<Scalar> ax = spmv(prob.A, it.x);
  const Vector<Scalar> px = spmv_symmetric(prob.P, it.x);
  const Vector<Scalar> aty = spmv_transpose(prob.A, it.y);

  auto inf = [](const auto& v) { return v.size() == 0 ? Scalar(0) : v.template lpNorm<Eigen::Infinity>(); };

  Vector<Scalar> viol = ax - prob.b;
  viol.head(prob.m1) = viol.head(prob.m1).cwiseMax(Scalar(0));
  ResidualTriple<Scalar> r;
  r.r_p = inf(viol) / (1 + std::max(inf(ax), inf(prob.b)));
  r.r_d = inf(px + aty + prob.c) / (1 + std::max({inf(px), inf(aty), inf(prob.c)}));

  const Scalar xpx = it.x.dot(px);
  const Scalar cx = prob.c.dot(it.x);
  const Scalar by = prob.b.dot(it.y);
  r.pd = std::abs(xpx + cx + by) /
         (1 + std::max(std::abs(Scalar(0.5) * xpx + cx), std::abs(Scalar(0.5) * xpx + by)));
  return r;
}

template <typename Scalar>
bool is_solved(const ResidualTriple<Scalar>& res, Scalar eps) {
  return res.max() <= eps;
}

using QpProblemd = QpProblem<double>;
using Iterated = Iterate<double>;
using ResidualTripled = ResidualTriple<double>;

}  // namespace kqp

#endif  // KQP_QP_MODEL_HPP
