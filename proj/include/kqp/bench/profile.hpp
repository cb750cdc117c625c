#ifndef KQP_BENCH_PROFILE_HPP
#define KQP_BENCH_PROFILE_HPP

#include "kqp/sparse.hpp"

#include <limits>
#include <vector>

namespace kqp::bench {

inline constexpr double kUnsolved = std::numeric_limits<double>::infinity();

/// Dolan–Moré relative performance profile.
struct PerfProfile {
  /// u(p, s) = t(p, s) / min_s t(p, s); +inf where s failed on p (and on
  /// every entry of a row nobody solved).
  Matrix<double> ratios;
  /// Problems solved by at least one solver.
  Index n_solved = 0;
  std::vector<double> tau;
  /// values(i, s) = P_s(tau[i]).
  Matrix<double> values;

  /// P_s(τ) = #{p : u(p, s) ≤ τ} / n_solved, or 0 when nothing was solved.
  double evaluate(Index solver, double tau) const;
};

/// `points` log-spaced samples from 1 to `max_tau` inclusive.
std::vector<double> log_tau_grid(double max_tau, int points);

/// `times` is problems × solvers of positive budgets, kUnsolved marking
/// failures. When `tau` is empty a 64-point log grid up to the largest
/// finite ratio is used.
PerfProfile performance_profile(const Matrix<double>& times, std::vector<double> tau = {});

}  // namespace kqp::bench

#endif  // KQP_BENCH_PROFILE_HPP
