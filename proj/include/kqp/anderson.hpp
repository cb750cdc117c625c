#ifndef KQP_ANDERSON_HPP
#define KQP_ANDERSON_HPP

#include "kqp/krylov.hpp"

#include <Eigen/QR>

#include <cmath>

namespace kqp {

struct AndersonConfig {
  int memory = 15;
  /// The accelerator sees every `interval`-th iterate, i.e. it accelerates
  /// T^interval.
  int interval = 1;

  void validate() const {
    detail::require(memory >= 2, "AndersonConfig: memory must be >= 2");
    detail::require(interval >= 1, "AndersonConfig: interval must be >= 1");
  }
};

template <typename Scalar>
struct AndersonProposal {
  ProposalStatus status = ProposalStatus::NotReady;
  Vector<Scalar> gamma;
  /// Tu_k − ΔU γ, the type-II candidate.
  Vector<Scalar> u_hat;
  /// u_k − ΔX γ. For affine T, u_hat = T(u_combined).
  Vector<Scalar> u_combined;
};

/// Restarted type-II Anderson acceleration on pairs (u_i, Tu_i) with
/// residuals f_i = Tu_i − u_i. Holds at most `memory` difference columns;
/// the pair that would exceed it clears the window and starts a new one.
template <typename Scalar>
class AndersonState {
 public:
  static constexpr Scalar kRankTol = Scalar(1e-14);

  AndersonState(Index dim, AndersonConfig cfg)
      : cfg_(cfg),
        df_(dim, cfg.memory),
        du_(dim, cfg.memory),
        dx_(dim, cfg.memory) {
    cfg_.validate();
  }

  Index dim() const { return df_.rows(); }
  const AndersonConfig& config() const { return cfg_; }
  int pairs() const { return pairs_; }
  int columns() const { return cols_; }
  const Matrix<Scalar>& delta_f() const { return df_; }
  const Matrix<Scalar>& delta_u() const { return du_; }

  void update(const Vector<Scalar>& u, const Vector<Scalar>& tu) {
    detail::require(u.size() == dim() && tu.size() == dim(), "AndersonState::update: dimension mismatch");
    Vector<Scalar> f = tu - u;
    if (pairs_ > 0 && cols_ == cfg_.memory) clear();
    if (pairs_ > 0) {
      df_.col(cols_) = f - f_last_;
      du_.col(cols_) = tu - tu_last_;
      dx_.col(cols_) = u - u_last_;
      ++cols_;
    }
    u_last_ = u;
    tu_last_ = tu;
    f_last_ = std::move(f);
    ++pairs_;
  }

  /// γ = argmin ‖f_k − ΔF γ‖₂ by Householder QR, û = Tu_k − ΔU γ.
  AndersonProposal<Scalar> propose() const {
    AndersonProposal<Scalar> out;
    if (cols_ < 1) return out;
    const auto df = df_.leftCols(cols_);
    Eigen::HouseholderQR<Matrix<Scalar>> qr(df);
    const Index k = std::min<Index>(cols_, dim());
    const auto& packed = qr.matrixQR();
    for (Index i = 0; i < cols_; ++i) {
      if (i >= k || !(std::abs(packed(i, i)) >= kRankTol)) {
        out.status = ProposalStatus::RankDeficient;
        return out;
      }
    }
    const Vector<Scalar> qtf = qr.householderQ().transpose() * f_last_;
    out.gamma = packed.topLeftCorner(cols_, cols_).template triangularView<Eigen::Upper>().solve(
        qtf.head(cols_));
    out.u_hat = tu_last_ - du_.leftCols(cols_) * out.gamma;
    out.u_combined = u_last_ - dx_.leftCols(cols_) * out.gamma;
    out.status = ProposalStatus::Ok;
    return out;
  }

  void clear() {
    cols_ = 0;
    pairs_ = 0;
  }

 private:
  AndersonConfig cfg_;
  Matrix<Scalar> df_, du_, dx_;
  Vector<Scalar> u_last_, tu_last_, f_last_;
  int cols_ = 0;
  int pairs_ = 0;
};

}  // namespace kqp

#endif  // KQP_ANDERSON_HPP
