#include "kqp/bench/profile.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace kqp::bench {

double PerfProfile::evaluate(Index solver, double tau) const {
  if (n_solved == 0) return 0.0;
  Index hits = 0;
  for (Index p = 0; p < ratios.rows(); ++p)
    if (ratios(p, solver) <= tau) ++hits;
  return double(hits) / double(n_solved);
}

std::vector<double> log_tau_grid(double max_tau, int points) {
  if (points < 2) throw std::invalid_argument("log_tau_grid: need at least two points");
  max_tau = std::max(max_tau, 1.0);
  std::vector<double> grid(points);
  const double top = std::log(max_tau);
  for (int i = 0; i < points; ++i) grid[i] = std::exp(top * double(i) / double(points - 1));
  grid.front() = 1.0;
  grid.back() = max_tau;
  return grid;
}

PerfProfile performance_profile(const Matrix<double>& times, std::vector<double> tau) {
  PerfProfile prof;
  prof.ratios = Matrix<double>::Constant(times.rows(), times.cols(), kUnsolved);
  double max_ratio = 1.0;
  for (Index p = 0; p < times.rows(); ++p) {
    double best = kUnsolved;
    for (Index s = 0; s < times.cols(); ++s) {
      if (std::isnan(times(p, s)) || times(p, s) <= 0)
        throw std::invalid_argument("performance_profile: budgets must be positive or +inf");
      if (std::isfinite(times(p, s))) best = std::min(best, times(p, s));
    }
    if (!std::isfinite(best)) continue;
    ++prof.n_solved;
    for (Index s = 0; s < times.cols(); ++s) {
      if (!std::isfinite(times(p, s))) continue;
      prof.ratios(p, s) = times(p, s) / best;
      max_ratio = std::max(max_ratio, prof.ratios(p, s));
    }
  }
  prof.tau = tau.empty() ? log_tau_grid(max_ratio, 64) : std::move(tau);
  prof.values.resize(static_cast<Index>(prof.tau.size()), times.cols());
  for (Index i = 0; i < prof.values.rows(); ++i)
    for (Index s = 0; s < times.cols(); ++s) prof.values(i, s) = prof.evaluate(s, prof.tau[i]);
  return prof;
}

}  // namespace kqp::bench
