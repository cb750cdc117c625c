#ifndef KQP_BENCH_MICROBENCH_HPP
#define KQP_BENCH_MICROBENCH_HPP

#include "kqp/sparse.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace kqp::bench {

/// Best-of-`reps` seconds for one- and two-channel kernels on one matrix.
struct MicroBenchRow {
  Index n = 0;
  Index nnz = 0;
  double spmv_single = 0;
  double spmv_paired = 0;
  double solve_single = 0;
  double solve_paired = 0;

  double spmv_ratio() const { return spmv_paired / spmv_single; }
  double solve_ratio() const { return solve_paired / solve_single; }
};

/// Random banded symmetric positive definite matrices (upper triangle
/// stored) with at least `nnz_min` nonzeros in the full symmetric pattern.
/// The band keeps LDLᵀ fill bounded at these sizes.
std::vector<CscMatrixd> microbench_matrices(Index nnz_min, int count, std::uint64_t seed);

/// SpMV runs on the expanded symmetric matrix; the solve uses its LDLᵀ
/// factor. The paired path is the interleaved two-channel kernel.
std::vector<MicroBenchRow> micro_bench(const std::vector<CscMatrixd>& upper_matrices, int reps);

void write_microbench_csv(std::ostream& out, const std::vector<MicroBenchRow>& rows);

}  // namespace kqp::bench

#endif  // KQP_BENCH_MICROBENCH_HPP
