#ifndef KQP_KRYLOV_HPP
#define KQP_KRYLOV_HPP

#include "kqp/admm_operator.hpp"

#include <algorithm>
#include <cmath>
#include <concepts>
#include <stdexcept>
#include <vector>

namespace kqp {

/// A fixed-point map that is affine on each region indexed by an ActiveSet,
/// and can apply the linear part of the region it was last evaluated in.
template <typename Op, typename Scalar>
concept PiecewiseAffineOperator = requires(const Op& op, const Vector<Scalar>& v, const ActiveSet& js) {
  { op.dim() } -> std::convertible_to<Index>;
  { op.apply_t(v) } -> std::same_as<OperatorStep<Scalar>>;
  { op.apply_linearized(js, v) } -> std::convertible_to<Vector<Scalar>>;
};

/// obv builds the Krylov space of G − I; alt builds that of G and subtracts
/// the identity when forming the least-squares matrix.
enum class KrylovMode { Obv, Alt };

struct KrylovConfig {
  int memory = 15;
  std::vector<int> tries{16};
  KrylovMode mode = KrylovMode::Alt;

  /// `count` evenly spaced attempts per restart, the last at memory + 1.
  /// With memory 15: 1 -> {16}, 3 -> {6, 11, 16}.
  static KrylovConfig with_tries(int memory, int count, KrylovMode mode) {
    detail::require(count >= 1, "KrylovConfig: need at least one attempt");
    KrylovConfig cfg{memory, {}, mode};
    const int spacing = std::max(1, memory / count);
    for (int i = count - 1; i >= 0; --i) cfg.tries.push_back(memory + 1 - i * spacing);
    cfg.validate();
    return cfg;
  }

  bool is_attempt(int j) const { return std::find(tries.begin(), tries.end(), j) != tries.end(); }

  void validate() const {
    detail::require(memory >= 2, "KrylovConfig: memory must be >= 2");
    detail::require(!tries.empty(), "KrylovConfig: attempt set must be nonempty");
    detail::require(*std::max_element(tries.begin(), tries.end()) == memory + 1,
                    "KrylovConfig: largest attempt must be memory + 1");
    detail::require(*std::min_element(tries.begin(), tries.end()) >= 3,
                    "KrylovConfig: attempts must be >= 3");
  }
};

template <typename Scalar>
struct GivensRotation {
  Scalar c = 1;
  Scalar s = 0;
  Scalar r = 0;
};

/// Rotation with c·a + s·b = r ≥ 0 and −s·a + c·b = 0.
template <typename Scalar>
GivensRotation<Scalar> givens(Scalar a, Scalar b) {
  if (a == Scalar(0) && b == Scalar(0)) return {Scalar(1), Scalar(0), Scalar(0)};
  const Scalar r = std::hypot(a, b);
  return {a / r, b / r, r};
}

enum class ArnoldiStatus { Ok, Breakdown };

/// Orthonormal Krylov basis Q (d × (memory + 1)) with its Hessenberg matrix
/// H ((memory + 1) × memory), grown one column per Arnoldi step. A full state
/// spans a Krylov space of dimension `memory` plus the one extra vector the
/// least-squares right-hand side needs.
///
/// After a breakdown the new column is stored as zero with a zero subdiagonal
/// entry and the basis stops growing until restart; least-squares solves over
/// it stay well posed.
template <typename Scalar>
class ArnoldiState {
 public:
  static constexpr Scalar kInitBreakdown = Scalar(1e-14);
  static constexpr Scalar kStepBreakdown = Scalar(1e-12);

  ArnoldiState(Index dim, int memory)
      : q_(Matrix<Scalar>::Zero(dim, memory + 1)), h_(Matrix<Scalar>::Zero(memory + 1, memory)) {
    detail::require(memory >= 2, "ArnoldiState: memory must be >= 2");
  }

  Index dim() const { return q_.rows(); }
  int memory() const { return static_cast<int>(h_.cols()); }
  /// Columns of Q in use, counting a zero column left by breakdown.
  int size() const { return size_; }
  /// 1-based index of the next column to fill.
  int j() const { return size_ + 1; }
  bool broken_down() const { return broken_; }
  bool full() const { return size_ > memory(); }

  const Matrix<Scalar>& basis() const { return q_; }
  const Matrix<Scalar>& hessenberg() const { return h_; }
  Vector<Scalar> last_column() const {
    detail::require(size_ > 0, "ArnoldiState: empty basis");
    return q_.col(size_ - 1);
  }

  /// First basis vector r0/‖r0‖. Reports Breakdown, leaving the state empty,
  /// when ‖r0‖ ≤ 1e-14·d.
  ArnoldiStatus init_basis(const Vector<Scalar>& r0) {
    detail::require(r0.size() == dim(), "init_basis: dimension mismatch");
    restart();
    const Scalar norm = r0.norm();
    if (!(norm > kInitBreakdown * Scalar(dim()))) return ArnoldiStatus::Breakdown;
    q_.col(0) = r0 / norm;
    size_ = 1;
    return ArnoldiStatus::Ok;
  }

  /// Appends a column from `gq` = G_𝒥 q_last (obv orthogonalizes gq − q_last,
  /// alt orthogonalizes gq itself) by modified Gram-Schmidt with one
  /// reorthogonalization sweep.
  ArnoldiStatus extend(const Vector<Scalar>& gq, KrylovMode mode) {
    detail::require(gq.size() == dim(), "arnoldi_step: dimension mismatch");
    if (size_ == 0) throw std::logic_error("arnoldi_step: basis not initialised");
    if (full()) throw std::logic_error("arnoldi_step: memory full, restart first");
    if (broken_) return ArnoldiStatus::Breakdown;

    Vector<Scalar> w = gq;
    if (mode == KrylovMode::Obv) w -= q_.col(size_ - 1);
    const Scalar pre_norm = w.norm();
    const int col = size_ - 1;
    // Two MGS sweeps; the second restores orthogonality when the Krylov
    // space is close to invariant and the first leaves mostly cancellation.
    for (int pass = 0; pass < 2; ++pass) {
      for (int i = 0; i < size_; ++i) {
        const Scalar hij = q_.col(i).dot(w);
        w -= hij * q_.col(i);
        h_(i, col) = pass == 0 ? hij : h_(i, col) + hij;
      }
    }
    const Scalar norm = w.norm();
    ++size_;
    if (!(norm > kStepBreakdown * pre_norm)) {
      h_(size_ - 1, col) = Scalar(0);
      broken_ = true;
      return ArnoldiStatus::Breakdown;
    }
    h_(size_ - 1, col) = norm;
    q_.col(size_ - 1) = w / norm;
    return ArnoldiStatus::Ok;
  }

  void restart() {
    q_.setZero();
    h_.setZero();
    size_ = 0;
    broken_ = false;
  }

 private:
  Matrix<Scalar> q_;
  Matrix<Scalar> h_;
  int size_ = 0;
  bool broken_ = false;
};

template <typename Scalar, typename Op>
  requires PiecewiseAffineOperator<Op, Scalar>
ArnoldiStatus arnoldi_step(ArnoldiState<Scalar>& state, const Op& op, const ActiveSet& active,
                           KrylovMode mode) {
  return state.extend(op.apply_linearized(active, state.last_column()), mode);
}

enum class ProposalStatus { Ok, NotReady, SingularTriangle, RankDeficient };

template <typename Scalar>
struct KrylovProposal {
  ProposalStatus status = ProposalStatus::NotReady;
  Vector<Scalar> z;      // least-squares coefficients
  Vector<Scalar> u_kr;   // u_k + Q z
  Vector<Scalar> u_hat;  // T u_kr
};

/// Solves min_z ‖E z + rhs‖₂ for a j × (j−1) upper Hessenberg E by Givens
/// triangularization of a copy. Returns false when the triangle has a
/// diagonal entry below `tol` in magnitude.
template <typename Scalar>
bool hessenberg_least_squares(Matrix<Scalar> e, Vector<Scalar> rhs, Vector<Scalar>& z,
                              Scalar tol = Scalar(1e-14)) {
  const Index cols = e.cols();
  for (Index i = 0; i < cols; ++i) {
    const auto g = givens(e(i, i), e(i + 1, i));
    const Scalar c = g.c, s = g.s;
    for (Index k = i; k < cols; ++k) {
      const Scalar top = e(i, k), bot = e(i + 1, k);
      e(i, k) = c * top + s * bot;
      e(i + 1, k) = -s * top + c * bot;
    }
    const Scalar top = rhs(i), bot = rhs(i + 1);
    rhs(i) = c * top + s * bot;
    rhs(i + 1) = -s * top + c * bot;
  }
  for (Index i = 0; i < cols; ++i)
    if (!(std::abs(e(i, i)) >= tol)) return false;
  z = -e.topLeftCorner(cols, cols).template triangularView<Eigen::Upper>().solve(rhs.head(cols));
  return true;
}

/// Candidate from the current basis: z = argmin ‖E z + Qᵀ r_k‖ with
/// E = H̃ (obv) or H̃ − [I; 0] (alt), u_kr = u_k + Q z, û = T u_kr.
/// Uses all `size()` basis columns, i.e. the (size × size−1) Hessenberg block.
template <typename Scalar, typename Op>
  requires PiecewiseAffineOperator<Op, Scalar>
KrylovProposal<Scalar> propose(const ArnoldiState<Scalar>& state, const Op& op,
                               const Vector<Scalar>& u_k, const Vector<Scalar>& r_k,
                               KrylovMode mode) {
  detail::require(u_k.size() == state.dim() && r_k.size() == state.dim(),
                  "propose: dimension mismatch");
  KrylovProposal<Scalar> out;
  const int p = state.size();
  if (p < 2) return out;

  Matrix<Scalar> e = state.hessenberg().topLeftCorner(p, p - 1);
  if (mode == KrylovMode::Alt) e.diagonal().array() -= Scalar(1);
  const Vector<Scalar> rhs = state.basis().leftCols(p).transpose() * r_k;
  if (!hessenberg_least_squares<Scalar>(std::move(e), rhs, out.z)) {
    out.status = ProposalStatus::SingularTriangle;
    return out;
  }
  out.u_kr = u_k + state.basis().leftCols(p - 1) * out.z;
  out.u_hat = op.apply_t(out.u_kr).value;
  out.status = ProposalStatus::Ok;
  return out;
}

}  // namespace kqp

#endif  // KQP_KRYLOV_HPP
