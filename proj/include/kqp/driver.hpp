#ifndef KQP_DRIVER_HPP
#define KQP_DRIVER_HPP

#include "kqp/admm_operator.hpp"
#include "kqp/anderson.hpp"
#include "kqp/krylov.hpp"
#include "kqp/qp_model.hpp"

#include <functional>
#include <limits>
#include <optional>
#include <variant>
#include <vector>

namespace kqp {

struct NoAcceleration {};

using Accelerator = std::variant<NoAcceleration, AndersonConfig, KrylovConfig>;

struct SafeguardParams {
  double eta = 1.0;
  /// Bound c in ‖û − u_k‖_M ≤ c‖Tu_k − u_k‖_M; unchecked when empty.
  std::optional<double> step_bound;

  void validate() const {
    detail::require(eta > 0 && eta <= 1, "SafeguardParams: eta must lie in (0, 1]");
    detail::require(!step_bound || *step_bound > 0, "SafeguardParams: step bound must be positive");
  }
};

template <typename Scalar>
struct SafeguardResult {
  bool accept = false;
  Vector<Scalar> t_u_hat;
  Scalar candidate_residual = 0;  // ‖Tû − û‖_M
  Scalar reference_residual = 0;  // ‖Tu_k − u_k‖_M
};

/// Accepts û when ‖Tû − û‖_M ≤ η‖Tu_k − u_k‖_M (and the optional step bound
/// holds). `tu_k` is T u_k, already available to the caller. Costs one T
/// application.
template <typename Scalar>
SafeguardResult<Scalar> safeguard_check(const AdmmOperator<Scalar>& op, const Vector<Scalar>& u_k,
                                        const Vector<Scalar>& tu_k, const Vector<Scalar>& u_hat,
                                        const SafeguardParams& params) {
  SafeguardResult<Scalar> out;
  out.t_u_hat = op.apply_t(u_hat).value;
  out.reference_residual = op.m_norm(tu_k - u_k);
  out.candidate_residual = op.m_norm(out.t_u_hat - u_hat);
  out.accept = out.candidate_residual <= Scalar(params.eta) * out.reference_residual;
  if (out.accept && params.step_bound)
    out.accept = op.m_norm(u_hat - u_k) <= Scalar(*params.step_bound) * out.reference_residual;
  return out;
}

/// Same check, applying T to u_k as well.
template <typename Scalar>
SafeguardResult<Scalar> safeguard_check(const AdmmOperator<Scalar>& op, const Vector<Scalar>& u_k,
                                        const Vector<Scalar>& u_hat, const SafeguardParams& params) {
  return safeguard_check(op, u_k, op.apply_t(u_k).value, u_hat, params);
}

enum class SolveStatus { Solved, MaxIters };

template <typename Scalar>
struct ResidualSample {
  long iteration = 0;
  ResidualTriple<Scalar> residuals;
};

/// One accepted proposal: the fixed-point residual M-norm at u_k and at the
/// new iterate u_{k+1} = Tû.
template <typename Scalar>
struct AcceptedStep {
  long iteration = 0;
  Scalar before = 0;
  Scalar after = std::numeric_limits<Scalar>::quiet_NaN();
};

template <typename Scalar>
struct SolveReport {
  SolveStatus status = SolveStatus::MaxIters;
  long iterations = 0;
  long t_applications = 0;
  long accepted = 0;
  long rejected = 0;
  /// Proposals that could not be formed (singular triangle, rank deficiency).
  long skipped = 0;
  std::vector<ResidualSample<Scalar>> residual_trace;
  std::vector<AcceptedStep<Scalar>> accepted_steps;
  Iterate<Scalar> final;
  ResidualTriple<Scalar> final_residuals;
};

/// Optional hooks for instrumentation.
template <typename Scalar>
struct DriverObserver {
  std::function<void(long k, const ArnoldiState<Scalar>&, const ActiveSet&)> on_arnoldi_step;
  std::function<void(long k, const Vector<Scalar>& u)> on_iterate;
  std::function<void(long k, const KrylovProposal<Scalar>&)> on_krylov_proposal;
  std::function<void(long k, const AndersonProposal<Scalar>&)> on_anderson_proposal;
};

namespace detail {

template <typename Scalar>
class Loop {
 public:
  Loop(const AdmmOperator<Scalar>& op, const TerminationConfig& term, const SafeguardParams& sg,
       const DriverObserver<Scalar>& obs)
      : op_(op), term_(term), sg_(sg), obs_(obs), u_(Vector<Scalar>::Zero(op.dim())) {}

  SolveReport<Scalar> run(const Accelerator& accel) {
    std::visit([this](const auto& cfg) { solve(cfg); }, accel);
    if (pending_) {
      report_.accepted_steps[*pending_].after = op_.m_norm(op_.apply_t(u_).value - u_);
      pending_.reset();
    }
    report_.final = Iterate<Scalar>::from_flat(u_, op_.n());
    return std::move(report_);
  }

 private:
  // Residual check on u_k; true when the loop must stop.
  bool check(long k) {
    const bool due = k % term_.check_every == 0 || k >= term_.max_iters;
    if (due) {
      const auto res = residuals(op_.problem(), Iterate<Scalar>::from_flat(u_, op_.n()));
      report_.residual_trace.push_back({k, res});
      report_.final_residuals = res;
      if (is_solved(res, Scalar(term_.eps))) {
        report_.status = SolveStatus::Solved;
        report_.iterations = k;
        return true;
      }
    }
    if (k >= term_.max_iters) {
      report_.status = SolveStatus::MaxIters;
      report_.iterations = k;
      return true;
    }
    return false;
  }

  // Called with Tu_k for the current u_k on every pass.
  void saw_tu(const Vector<Scalar>& tu) {
    ++report_.t_applications;
    if (pending_) {
      report_.accepted_steps[*pending_].after = op_.m_norm(tu - u_);
      pending_.reset();
    }
  }

  // Safeguarded acceptance of û; returns the next iterate.
  Vector<Scalar> decide(long k, const Vector<Scalar>& tu, const Vector<Scalar>& u_hat) {
    auto sg = safeguard_check(op_, u_, tu, u_hat, sg_);
    ++report_.t_applications;
    if (!sg.accept) {
      ++report_.rejected;
      return tu;
    }
    ++report_.accepted;
    report_.accepted_steps.push_back({k, sg.reference_residual});
    pending_ = report_.accepted_steps.size() - 1;
    return std::move(sg.t_u_hat);
  }

  void advance(long k, Vector<Scalar> next) {
    u_ = std::move(next);
    if (obs_.on_iterate) obs_.on_iterate(k + 1, u_);
  }

  void solve(const NoAcceleration&) {
    for (long k = 0; !check(k); ++k) {
      auto s = op_.apply_t(u_);
      saw_tu(s.value);
      advance(k, std::move(s.value));
    }
  }

  void solve(const KrylovConfig& cfg) {
    cfg.validate();
    ArnoldiState<Scalar> arnoldi(op_.dim(), cfg.memory);
    int j = 1;
    for (long k = 0; !check(k); ++k, ++j) {
      if (cfg.is_attempt(j)) {
        // The Arnoldi step for this pass rides along with Tu_k, giving the
        // j × (j−1) Hessenberg system.
        Vector<Scalar> tu;
        if (arnoldi.size() > 0 && !arnoldi.broken_down() && !arnoldi.full()) {
          auto s = op_.apply_paired(u_, arnoldi.last_column());
          arnoldi.extend(s.gq, cfg.mode);
          if (obs_.on_arnoldi_step) obs_.on_arnoldi_step(k, arnoldi, s.active);
          tu = std::move(s.tu);
        } else {
          tu = op_.apply_t(u_).value;
        }
        saw_tu(tu);
        const Vector<Scalar> r = tu - u_;
        auto prop = propose(arnoldi, op_, u_, r, cfg.mode);
        if (obs_.on_krylov_proposal) obs_.on_krylov_proposal(k, prop);
        Vector<Scalar> next;
        if (prop.status == ProposalStatus::Ok) {
          ++report_.t_applications;
          next = decide(k, tu, prop.u_hat);
        } else {
          ++report_.skipped;
          next = std::move(tu);
        }
        if (j > cfg.memory) {
          arnoldi.restart();
          j = 0;
        }
        advance(k, std::move(next));
      } else if (arnoldi.size() == 0) {
        auto s = op_.apply_t(u_);
        saw_tu(s.value);
        // A vanishing residual leaves the basis empty; retry next pass.
        if (arnoldi.init_basis(s.value - u_) == ArnoldiStatus::Ok) {
          if (obs_.on_arnoldi_step) obs_.on_arnoldi_step(k, arnoldi, s.active);
        } else {
          j = 0;
        }
        advance(k, std::move(s.value));
      } else if (arnoldi.broken_down() || arnoldi.full()) {
        auto s = op_.apply_t(u_);
        saw_tu(s.value);
        advance(k, std::move(s.value));
      } else {
        auto s = op_.apply_paired(u_, arnoldi.last_column());
        saw_tu(s.tu);
        arnoldi.extend(s.gq, cfg.mode);
        if (obs_.on_arnoldi_step) obs_.on_arnoldi_step(k, arnoldi, s.active);
        advance(k, std::move(s.tu));
      }
    }
  }

  void solve(const AndersonConfig& cfg) {
    AndersonState<Scalar> aa(op_.dim(), cfg);
    Vector<Scalar> anchor = u_;
    int since_anchor = 0;
    for (long k = 0; !check(k); ++k) {
      auto s = op_.apply_t(u_);
      saw_tu(s.value);
      if (++since_anchor < cfg.interval) {
        advance(k, std::move(s.value));
        continue;
      }
      aa.update(anchor, s.value);
      Vector<Scalar> next;
      if (aa.columns() >= 1) {
        auto prop = aa.propose();
        if (obs_.on_anderson_proposal) obs_.on_anderson_proposal(k, prop);
        if (prop.status == ProposalStatus::Ok) {
          next = decide(k, s.value, prop.u_hat);
        } else {
          ++report_.skipped;
          next = std::move(s.value);
        }
      } else {
        next = std::move(s.value);
      }
      anchor = next;
      since_anchor = 0;
      advance(k, std::move(next));
    }
  }

  const AdmmOperator<Scalar>& op_;
  TerminationConfig term_;
  SafeguardParams sg_;
  const DriverObserver<Scalar>& obs_;
  Vector<Scalar> u_;
  SolveReport<Scalar> report_;
  std::optional<std::size_t> pending_;
};

}  // namespace detail

/// Safeguarded accelerated ADMM from the cold start u₀ = 0.
///
/// Every outer pass increments k. Plain passes cost one T application;
/// evaluating a proposal costs two more (Krylov: T u_kr and Tû) or one more
/// (Anderson: Tû). Arnoldi steps ride the paired kernels and cost nothing
/// extra. Residuals are checked every `check_every` passes and at max_iters.
template <typename Scalar>
SolveReport<Scalar> run(const AdmmOperator<Scalar>& op, const Accelerator& accel,
                        const TerminationConfig& term, const SafeguardParams& sg,
                        const DriverObserver<Scalar>& observer = {}) {
  term.validate();
  sg.validate();
  return detail::Loop<Scalar>(op, term, sg, observer).run(accel);
}

template <typename Scalar>
SolveReport<Scalar> run(const QpProblem<Scalar>& prob, const Accelerator& accel, Scalar rho,
                        const TerminationConfig& term, const SafeguardParams& sg,
                        const DriverObserver<Scalar>& observer = {}) {
  const auto op = AdmmOperator<Scalar>::build(prob, rho);
  return run(op, accel, term, sg, observer);
}

inline const char* to_string(SolveStatus s) {
  return s == SolveStatus::Solved ? "Solved" : "MaxIters";
}

}  // namespace kqp

#endif  // KQP_DRIVER_HPP
