#include "kqp/bench/microbench.hpp"

#include "kqp/spd_factor.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <ostream>
#include <random>
#include <stdexcept>

namespace kqp::bench {
namespace {

template <typename F>
double best_time(int reps, F&& f) {
  double best = std::numeric_limits<double>::infinity();
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
  }
  return best;
}

// Keeps results observable so the timed calls are not elided.
volatile double g_sink = 0;

}  // namespace

std::vector<CscMatrixd> microbench_matrices(Index nnz_min, int count, std::uint64_t seed) {
  if (nnz_min < 1 || count < 1) throw std::invalid_argument("microbench_matrices: bad sizes");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit;
  std::vector<CscMatrixd> out;
  for (int k = 0; k < count; ++k) {
    const Index band = 4 + static_cast<Index>(unit(rng) * 12);
    const double density = 0.3 + 0.4 * unit(rng);
    // Full pattern holds about n (1 + 2 band density) entries.
    const Index n = std::max<Index>(
        band + 1, static_cast<Index>(1.1 * double(nnz_min) / (1.0 + 2.0 * band * density)) + 1);
    std::vector<Eigen::Triplet<double, Index>> t;
    VectorXd row_abs = VectorXd::Zero(n);
    for (Index j = 0; j < n; ++j) {
      for (Index i = std::max<Index>(0, j - band); i < j; ++i) {
        if (unit(rng) < density) {
          const double v = 2.0 * unit(rng) - 1.0;
          t.emplace_back(i, j, v);
          row_abs(i) += std::abs(v);
          row_abs(j) += std::abs(v);
        }
      }
    }
    for (Index i = 0; i < n; ++i) t.emplace_back(i, i, row_abs(i) + 1.0);
    CscMatrixd upper = CscMatrixd::from_triplets(n, n, t);
    // Top up if the draw fell short of the requested size.
    if (2 * upper.nnz() - n < nnz_min) {
      --k;
      continue;
    }
    out.push_back(std::move(upper));
  }
  return out;
}

std::vector<MicroBenchRow> micro_bench(const std::vector<CscMatrixd>& upper_matrices, int reps) {
  if (reps < 1) throw std::invalid_argument("micro_bench: reps must be >= 1");
  std::vector<MicroBenchRow> rows;
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal;
  for (const auto& upper : upper_matrices) {
    const CscMatrixd full = upper.symmetric_from_upper();
    const auto factor = spd_factorize(upper);
    if (!factor) throw std::runtime_error("micro_bench: matrix is not positive definite");
    const Index n = full.ncols();

    VectorXd x(n);
    DualVectord xx(2, n);
    for (Index i = 0; i < n; ++i) {
      x(i) = normal(rng);
      xx(0, i) = x(i);
      xx(1, i) = normal(rng);
    }

    MicroBenchRow row;
    row.n = n;
    row.nnz = full.nnz();
    row.spmv_single = best_time(reps, [&] { g_sink = g_sink + spmv(full, x)(0); });
    row.spmv_paired = best_time(reps, [&] { g_sink = g_sink + spmv_paired(full, xx)(1, 0); });
    row.solve_single = best_time(reps, [&] { g_sink = g_sink + factor->solve(x)(0); });
    row.solve_paired = best_time(reps, [&] { g_sink = g_sink + factor->solve_paired(xx)(1, 0); });
    rows.push_back(row);
  }
  return rows;
}

void write_microbench_csv(std::ostream& out, const std::vector<MicroBenchRow>& rows) {
  out << "matrix,n,nnz,spmv_single_s,spmv_paired_s,spmv_ratio,solve_single_s,solve_paired_s,"
         "solve_ratio\n";
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& r = rows[k];
    out << k << ',' << r.n << ',' << r.nnz << ',' << r.spmv_single << ',' << r.spmv_paired << ','
        << r.spmv_ratio() << ',' << r.solve_single << ',' << r.solve_paired << ','
        << r.solve_ratio() << '\n';
  }
}

}  // namespace kqp::bench
