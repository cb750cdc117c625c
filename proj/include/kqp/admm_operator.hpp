#ifndef KQP_ADMM_OPERATOR_HPP
#define KQP_ADMM_OPERATOR_HPP

#include "kqp/qp_model.hpp"
#include "kqp/spd_factor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

namespace kqp {

struct FactorizationFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Which inequality multipliers pass the dual-cone projection unclipped.
/// Entry i is true when the pre-projection value of row i is >= 0.
struct ActiveSet {
  std::vector<bool> pass_through;

  Index size() const { return static_cast<Index>(pass_through.size()); }
  Index count() const { return std::count(pass_through.begin(), pass_through.end(), true); }
  friend bool operator==(const ActiveSet&, const ActiveSet&) = default;
};

template <typename Scalar>
struct OperatorStep {
  Vector<Scalar> value;
  ActiveSet active;
};

/// Result of one paired pass: T applied to the primary channel and the
/// linearization at the primary's active set applied to the shadow channel.
template <typename Scalar>
struct PairedStep {
  Vector<Scalar> tu;
  Vector<Scalar> gq;
  ActiveSet active;
};

/// Fixed-point operator of ADMM written as a preconditioned proximal point
/// method on u = (x, y):
///
///     y⁺ = Π(y + ρ(Ax − b)),   ȳ = 2y⁺ − y,   x⁺ = x − W⁻¹(Px + c + Aᵀȳ)
///
/// with W = P + ρAᵀA + δI. T is averaged in the seminorm induced by
///
///     M = [ ρAᵀA + δI   Aᵀ  ]
///         [ A          I/ρ ].
///
/// The operator keeps a reference to the problem, which must outlive it.
template <typename Scalar>
class AdmmOperator {
 public:
  static constexpr Scalar kFallbackDelta = Scalar(1e-10);

  /// Factorizes P + ρAᵀA, retrying once with δ = 1e-10 when that matrix is
  /// not numerically positive definite.
  static AdmmOperator build(const QpProblem<Scalar>& prob, Scalar rho) {
    detail::require(rho > 0, "AdmmOperator: rho must be positive");
    prob.validate();
    for (const Scalar delta : {Scalar(0), kFallbackDelta}) {
      CscMatrix<Scalar> w = assemble_w(prob, rho, delta);
      if (auto f = spd_factorize(w)) return AdmmOperator(prob, rho, delta, std::move(w), std::move(*f));
    }
    throw FactorizationFailed("AdmmOperator: P + rho A'A + delta I is not positive definite");
  }

  /// Fixed δ, no fallback.
  // The operator borrows the problem; a temporary would dangle.
  static AdmmOperator build(const QpProblem<Scalar>&&, Scalar) = delete;
  static AdmmOperator build(const QpProblem<Scalar>&&, Scalar, Scalar) = delete;

  static AdmmOperator build(const QpProblem<Scalar>& prob, Scalar rho, Scalar delta) {
    detail::require(rho > 0 && delta >= 0, "AdmmOperator: need rho > 0 and delta >= 0");
    prob.validate();
    CscMatrix<Scalar> w = assemble_w(prob, rho, delta);
    auto f = spd_factorize(w);
    if (!f) throw FactorizationFailed("AdmmOperator: P + rho A'A + delta I is not positive definite");
    return AdmmOperator(prob, rho, delta, std::move(w), std::move(*f));
  }

  const QpProblem<Scalar>& problem() const { return prob_.get(); }
  Scalar rho() const { return rho_; }
  Scalar delta() const { return delta_; }
  const CscMatrix<Scalar>& w_upper() const { return w_; }
  const SpdFactor<Scalar>& w_factor() const { return factor_; }

  Index n() const { return problem().n(); }
  Index m() const { return problem().m(); }
  Index dim() const { return problem().dim(); }

  OperatorStep<Scalar> apply_t(const Vector<Scalar>& u) const {
    detail::require(u.size() == dim(), "apply_t: dimension mismatch");
    OperatorStep<Scalar> s{Vector<Scalar>(dim()), {}};
    pipeline<1>(u.data(), s.value.data(), s.active, /*affine_primary=*/true);
    return s;
  }

  std::pair<Iterate<Scalar>, ActiveSet> apply_t(const Iterate<Scalar>& it) const {
    auto s = apply_t(it.flat());
    return {Iterate<Scalar>::from_flat(s.value, n()), std::move(s.active)};
  }

  /// G_𝒥·q: the pipeline of apply_t with b and c dropped and the projection
  /// replaced by the diagonal mask of `active`.
  Vector<Scalar> apply_linearized(const ActiveSet& active, const Vector<Scalar>& q) const {
    detail::require(q.size() == dim(), "apply_linearized: dimension mismatch");
    detail::require(active.size() == problem().m1, "apply_linearized: active set size must be m1");
    Vector<Scalar> out(dim());
    ActiveSet mask = active;
    pipeline<1>(q.data(), out.data(), mask, /*affine_primary=*/false);
    return out;
  }

  /// T on `u` and G_𝒥 on `q` in one sweep of the sparse kernels, where 𝒥 is
  /// the active set observed while applying T to `u`.
  PairedStep<Scalar> apply_paired(const Vector<Scalar>& u, const Vector<Scalar>& q) const {
    detail::require(u.size() == dim() && q.size() == dim(), "apply_paired: dimension mismatch");
    DualVector<Scalar> in = make_dual<Scalar>(u, q);
    DualVector<Scalar> out(2, dim());
    PairedStep<Scalar> s;
    pipeline<2>(in.data(), out.data(), s.active, /*affine_primary=*/true);
    s.tu = primary(out);
    s.gq = shadow(out);
    return s;
  }

  /// ‖v‖_M, evaluated as sqrt(‖ρA·dx + dy‖²/ρ + δ‖dx‖²), which equals the
  /// block quadratic form and is nonnegative by construction.
  Scalar m_norm(const Vector<Scalar>& v) const {
    detail::require(v.size() == dim(), "m_norm: dimension mismatch");
    const Vector<Scalar> dx = v.head(n());
    const Vector<Scalar> s = rho_ * spmv(problem().A, dx) + v.tail(m());
    return std::sqrt(s.squaredNorm() / rho_ + delta_ * dx.squaredNorm());
  }

  /// Tu − u together with the active set seen while applying T.
  OperatorStep<Scalar> fixed_point_residual(const Vector<Scalar>& u) const {
    auto s = apply_t(u);
    s.value -= u;
    return s;
  }

 private:
  AdmmOperator(const QpProblem<Scalar>& prob, Scalar rho, Scalar delta, CscMatrix<Scalar> w,
               SpdFactor<Scalar> factor)
      : prob_(prob), rho_(rho), delta_(delta), w_(std::move(w)), factor_(std::move(factor)) {}

  static CscMatrix<Scalar> assemble_w(const QpProblem<Scalar>& prob, Scalar rho, Scalar delta) {
    using Sparse = Eigen::SparseMatrix<Scalar, Eigen::ColMajor, Index>;
    const Sparse a = prob.A.as_eigen();
    const Sparse ata = Sparse(a.transpose()) * a;
    Sparse w = prob.P.as_eigen();
    w += rho * Sparse(ata.template triangularView<Eigen::Upper>());
    if (delta > 0) {
      Sparse id(prob.n(), prob.n());
      id.setIdentity();
      w += delta * id;
    }
    return CscMatrix<Scalar>::from_eigen(w);
  }

  // Channel 0 carries the affine map when `affine_primary` is set: it adds the
  // constants and decides `active`. Every other channel (or channel 0 when
  // `affine_primary` is false) gets the linear part under that mask. Buffers
  // hold `Channels` interleaved vectors laid out as (x, y).
  template <int Channels>
  void pipeline(const Scalar* u, Scalar* out, ActiveSet& active, bool affine_primary) const {
    const QpProblem<Scalar>& prob = problem();
    const Index nx = n(), ny = m(), m1 = prob.m1;
    const Scalar* x = u;
    const Scalar* y = u + Channels * nx;
    Scalar* x_next = out;
    Scalar* y_next = out + Channels * nx;

    std::vector<Scalar> ax(Channels * ny), ybar(Channels * ny);
    detail::spmv_kernel<Channels>(prob.A, x, ax.data());

    if (affine_primary) active.pass_through.assign(m1, false);
    for (Index i = 0; i < ny; ++i) {
      for (int ch = 0; ch < Channels; ++ch) {
        const Index k = Channels * i + ch;
        const bool constants = affine_primary && ch == 0;
        const Scalar pre = constants ? y[k] + rho_ * (ax[k] - prob.b[i]) : y[k] + rho_ * ax[k];
        Scalar proj = pre;
        if (i < m1) {
          if (constants) active.pass_through[i] = pre >= Scalar(0);
          if (!active.pass_through[i]) proj = Scalar(0);
        }
        y_next[k] = proj;
        ybar[k] = Scalar(2) * proj - y[k];
      }
    }

    std::vector<Scalar> px(Channels * nx), aty(Channels * nx), step(Channels * nx);
    detail::spmv_symmetric_upper_kernel<Channels>(prob.P, x, px.data());
    detail::spmv_transpose_kernel<Channels>(prob.A, ybar.data(), aty.data());
    for (Index j = 0; j < nx; ++j) {
      for (int ch = 0; ch < Channels; ++ch) {
        const Index k = Channels * j + ch;
        step[k] = (affine_primary && ch == 0) ? px[k] + prob.c[j] + aty[k] : px[k] + aty[k];
      }
    }
    factor_.template solve_channels<Channels>(step.data(), step.data());
    for (Index k = 0; k < Channels * nx; ++k) x_next[k] = x[k] - step[k];
  }

  std::reference_wrapper<const QpProblem<Scalar>> prob_;
  Scalar rho_;
  Scalar delta_;
  CscMatrix<Scalar> w_;
  SpdFactor<Scalar> factor_;
};

using AdmmOperatord = AdmmOperator<double>;

}  // namespace kqp

#endif  // KQP_ADMM_OPERATOR_HPP
