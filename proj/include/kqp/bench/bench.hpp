#ifndef KQP_BENCH_BENCH_HPP
#define KQP_BENCH_BENCH_HPP

#include "kqp/bench/generators.hpp"
#include "kqp/bench/profile.hpp"
#include "kqp/driver.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace kqp::bench {

enum class BudgetMeasure { Iterations, TApplications, WallTime };

BudgetMeasure parse_measure(std::string_view name);
std::string to_string(BudgetMeasure m);

struct SolverSpec {
  std::string name;
  Accelerator accel;
};

/// admm, anderson-i1, anderson-i10, krylov-t1, krylov-t3 (alt mode, μ = 15).
std::vector<SolverSpec> default_solvers();

struct ProblemSpec {
  std::string name;
  ProblemKind kind;
  GeneratorParams params;
  std::uint64_t seed = 0;

  QpProblemd build() const { return generate(kind, params, seed); }
};

/// 20 random_qp, 5 equality_qp, 5 mpc_toy, 5 lasso, 5 huber; n + m ≤ 600.
std::vector<ProblemSpec> default_suite();

struct BenchConfig {
  double rho = 0.1;
  TerminationConfig term;
  SafeguardParams safeguard;
  /// Wall time is the best of this many runs; counts come from the first.
  int wall_repeats = 2;
  int jobs = 1;
};

struct RunRecord {
  std::string problem;
  std::string solver;
  SolveStatus status = SolveStatus::MaxIters;
  long iterations = 0;
  long t_applications = 0;
  double wall_ms = 0;
  ResidualTriple<double> residuals;
  long accepted = 0;
  long rejected = 0;
  long skipped = 0;
  /// Accepted steps whose residual grew beyond 1e-12.
  long monotonicity_violations = 0;
};

/// Runs every (problem, solver) cell. Cells may run on `jobs` threads;
/// results are ordered problem-major regardless.
std::vector<RunRecord> run_matrix(const std::vector<ProblemSpec>& problems,
                                  const std::vector<SolverSpec>& solvers, const BenchConfig& cfg);

/// problems × solvers budgets with kUnsolved for failures. Counts are
/// clamped to at least 1 so a solve at k = 0 still has a positive budget.
Matrix<double> budget_matrix(const std::vector<RunRecord>& records, std::size_t n_problems,
                             std::size_t n_solvers, BudgetMeasure measure);

void write_runs_csv(std::ostream& out, const std::vector<RunRecord>& records);
void write_profile_csv(std::ostream& out, const PerfProfile& prof,
                       const std::vector<SolverSpec>& solvers);

}  // namespace kqp::bench

#endif  // KQP_BENCH_BENCH_HPP
