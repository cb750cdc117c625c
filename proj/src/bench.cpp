#include "kqp/bench/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace kqp::bench {

BudgetMeasure parse_measure(std::string_view name) {
  if (name == "iters") return BudgetMeasure::Iterations;
  if (name == "tapps") return BudgetMeasure::TApplications;
  if (name == "time") return BudgetMeasure::WallTime;
  throw std::invalid_argument("unknown budget measure: " + std::string(name));
}

std::string to_string(BudgetMeasure m) {
  switch (m) {
    case BudgetMeasure::Iterations: return "iters";
    case BudgetMeasure::TApplications: return "tapps";
    case BudgetMeasure::WallTime: return "time";
  }
  return "?";
}

std::vector<SolverSpec> default_solvers() {
  return {
      {"admm", NoAcceleration{}},
      {"anderson-i1", AndersonConfig{15, 1}},
      {"anderson-i10", AndersonConfig{15, 10}},
      {"krylov-t1", KrylovConfig::with_tries(15, 1, KrylovMode::Alt)},
      {"krylov-t3", KrylovConfig::with_tries(15, 3, KrylovMode::Alt)},
  };
}

std::vector<ProblemSpec> default_suite() {
  std::vector<ProblemSpec> suite;
  auto add = [&](ProblemKind kind, int count, std::uint64_t seed0, auto&& size) {
    for (int i = 0; i < count; ++i) {
      ProblemSpec p;
      p.kind = kind;
      p.seed = seed0 + std::uint64_t(i);
      size(p.params, i);
      p.name = to_string(kind) + "-" + std::to_string(i);
      suite.push_back(p);
    }
  };
  add(ProblemKind::RandomQp, 20, 1000, [](GeneratorParams& g, int i) {
    g.n = 10 + 10 * (i % 10);
    g.m = 2 * g.n;
    g.density = i < 10 ? 0.3 : 0.1;
  });
  add(ProblemKind::EqualityQp, 5, 2000, [](GeneratorParams& g, int i) {
    g.n = 20 + 20 * i;
    g.m = g.n / 2;
  });
  add(ProblemKind::MpcToy, 5, 3000, [](GeneratorParams& g, int i) { g.horizon = 5 + 5 * i; });
  add(ProblemKind::Lasso, 5, 4000, [](GeneratorParams& g, int i) {
    g.features = 10 + 10 * i;
    g.samples = 2 * g.features;
  });
  add(ProblemKind::Huber, 5, 5000, [](GeneratorParams& g, int i) {
    g.features = 5 + 5 * i;
    g.samples = 2 * g.features;
  });
  return suite;
}

namespace {

RunRecord run_cell(const QpProblemd& prob, const ProblemSpec& ps, const SolverSpec& ss,
                   const BenchConfig& cfg) {
  RunRecord rec;
  rec.problem = ps.name;
  rec.solver = ss.name;
  double best_ms = std::numeric_limits<double>::infinity();
  for (int rep = 0; rep < std::max(1, cfg.wall_repeats); ++rep) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto report = run(prob, ss.accel, cfg.rho, cfg.term, cfg.safeguard);
    const auto t1 = std::chrono::steady_clock::now();
    best_ms = std::min(best_ms, std::chrono::duration<double, std::milli>(t1 - t0).count());
    if (rep > 0) continue;
    rec.status = report.status;
    rec.iterations = report.iterations;
    rec.t_applications = report.t_applications;
    rec.residuals = report.final_residuals;
    rec.accepted = report.accepted;
    rec.rejected = report.rejected;
    rec.skipped = report.skipped;
    for (const auto& a : report.accepted_steps)
      if (!(a.after <= a.before + 1e-12)) ++rec.monotonicity_violations;
  }
  rec.wall_ms = best_ms;
  return rec;
}

}  // namespace

std::vector<RunRecord> run_matrix(const std::vector<ProblemSpec>& problems,
                                  const std::vector<SolverSpec>& solvers, const BenchConfig& cfg) {
  if (problems.empty() || solvers.empty())
    throw std::invalid_argument("run_matrix: problems and solvers must be nonempty");
  cfg.term.validate();
  cfg.safeguard.validate();
  std::vector<QpProblemd> built;
  built.reserve(problems.size());
  for (const auto& p : problems) built.push_back(p.build());

  const std::size_t cells = problems.size() * solvers.size();
  std::vector<RunRecord> out(cells);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t c = next++; c < cells; c = next++) {
      const std::size_t p = c / solvers.size(), s = c % solvers.size();
      out[c] = run_cell(built[p], problems[p], solvers[s], cfg);
    }
  };
  const int jobs = std::max(1, cfg.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
  }
  return out;
}

Matrix<double> budget_matrix(const std::vector<RunRecord>& records, std::size_t n_problems,
                             std::size_t n_solvers, BudgetMeasure measure) {
  if (records.size() != n_problems * n_solvers)
    throw std::invalid_argument("budget_matrix: record count does not match the grid");
  Matrix<double> t(static_cast<Index>(n_problems), static_cast<Index>(n_solvers));
  for (std::size_t c = 0; c < records.size(); ++c) {
    const auto& r = records[c];
    double v = kUnsolved;
    if (r.status == SolveStatus::Solved) {
      switch (measure) {
        case BudgetMeasure::Iterations: v = double(std::max(1L, r.iterations)); break;
        case BudgetMeasure::TApplications: v = double(std::max(1L, r.t_applications)); break;
        case BudgetMeasure::WallTime: v = std::max(r.wall_ms, 1e-6); break;
      }
    }
    t(Index(c / n_solvers), Index(c % n_solvers)) = v;
  }
  return t;
}

void write_runs_csv(std::ostream& out, const std::vector<RunRecord>& records) {
  out << "problem,solver,status,iterations,t_applications,wall_ms,r_p,r_d,pd,accepted,rejected,"
         "skipped\n";
  for (const auto& r : records) {
    out << r.problem << ',' << r.solver << ',' << to_string(r.status) << ',' << r.iterations << ','
        << r.t_applications << ',' << r.wall_ms << ',' << r.residuals.r_p << ','
        << r.residuals.r_d << ',' << r.residuals.pd << ',' << r.accepted << ',' << r.rejected
        << ',' << r.skipped << '\n';
  }
}

void write_profile_csv(std::ostream& out, const PerfProfile& prof,
                       const std::vector<SolverSpec>& solvers) {
  out << "tau";
  for (const auto& s : solvers) out << ',' << s.name;
  out << '\n';
  for (Index i = 0; i < prof.values.rows(); ++i) {
    out << prof.tau[std::size_t(i)];
    for (Index s = 0; s < prof.values.cols(); ++s) out << ',' << prof.values(i, s);
    out << '\n';
  }
}

}  // namespace kqp::bench
