// Acceptance checks. One PASS/FAIL line per criterion; exit status is nonzero
// only when a gating criterion fails.
#include "test_util.hpp"

#include "kqp/bench/bench.hpp"
#include "kqp/bench/microbench.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>
#include <thread>

using namespace kqp;
using namespace kqp::bench;
using namespace kqp::test;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double inf_norm(const VectorXd& v) { return v.lpNorm<Eigen::Infinity>(); }

// Equality-constrained instances with d = n + m <= 12.
std::vector<QpProblemd> equality_instances() {
  std::vector<QpProblemd> out;
  for (int i = 0; i < 20; ++i) {
    GeneratorParams g;
    g.n = 3 + i % 6;
    g.m = 1 + i % std::min<Index>(4, g.n);
    out.push_back(generate(ProblemKind::EqualityQp, g, 7000 + i));
  }
  return out;
}

// Runs Krylov with a single attempt at memory + 1 and returns the first
// proposal together with the plain iterates that preceded it.
struct FirstProposal {
  KrylovProposal<double> prop;
  std::vector<VectorXd> iterates;  // u_0 .. u_k
  int basis_dim = 0;               // Krylov dimension behind z
};

FirstProposal first_krylov_proposal(const AdmmOperatord& op, int memory, KrylovMode mode) {
  FirstProposal fp;
  fp.iterates.push_back(VectorXd::Zero(op.dim()));
  bool have = false;
  DriverObserver<double> obs;
  obs.on_iterate = [&](long, const VectorXd& u) {
    if (!have) fp.iterates.push_back(u);
  };
  obs.on_krylov_proposal = [&](long, const KrylovProposal<double>& p) {
    if (have) return;
    fp.prop = p;
    fp.basis_dim = int(p.z.size());
    have = true;
  };
  TerminationConfig term;
  term.eps = 1e-300;
  term.max_iters = memory + 1;
  term.check_every = 1000;
  run(op, Accelerator{KrylovConfig{memory, {memory + 1}, mode}}, term, SafeguardParams{}, obs);
  return fp;
}

Outcome kkt_agreement() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0;
  int bad = 0;
  for (int i = 0; i < 50; ++i) {
    GeneratorParams g;
    g.n = 2 + i % 5;
    g.m = 1 + i % 8;
    const auto prob = generate(ProblemKind::RandomQp, g, 6000 + i);
    const auto star = kkt_oracle(prob, 1e-10);
    TerminationConfig term;
    term.eps = 1e-8;
    term.max_iters = 1000000;
    const auto rep = run(prob, Accelerator{NoAcceleration{}}, 0.1, term, SafeguardParams{});
    const double err = inf_norm(rep.final.x - star.x) / (1 + inf_norm(star.x));
    worst = std::max(worst, err);
    if (rep.status != SolveStatus::Solved || err > 1e-3) ++bad;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {bad == 0 && secs < 60, fmt("50 instances, %d off, worst scaled error %.2e, %.2f s", bad, worst, secs)};
}

Outcome finite_termination() {
  double worst = 0;
  int bad = 0;
  for (const auto& prob : equality_instances()) {
    const auto op = AdmmOperatord::build(prob, 0.1);
    const int d = int(op.dim());
    const auto fp = first_krylov_proposal(op, d + 1, KrylovMode::Obv);
    if (fp.prop.status != ProposalStatus::Ok) {
      ++bad;
      continue;
    }
    const VectorXd& u = fp.prop.u_hat;
    const double ratio = op.m_norm(op.apply_t(u).value - u) / (1 + op.m_norm(u));
    worst = std::max(worst, ratio);
    if (ratio > 1e-8) ++bad;
  }
  return {bad == 0, fmt("20 instances, %d off, worst residual/(1+|u|_M) %.2e", bad, worst)};
}

// AA fed u_0..u_k matches the Krylov obv candidate over the same subspace.
double aa_vs_krylov(const AdmmOperatord& op, const FirstProposal& fp) {
  const int k = fp.basis_dim;
  if (fp.prop.status != ProposalStatus::Ok || int(fp.iterates.size()) < k + 1)
    return std::numeric_limits<double>::infinity();
  AndersonState<double> aa(op.dim(), {std::max(2, k + 1), 1});
  for (int i = 0; i <= k; ++i) aa.update(fp.iterates[i], op.apply_t(fp.iterates[i]).value);
  const auto pa = aa.propose();
  if (pa.status != ProposalStatus::Ok) return std::numeric_limits<double>::infinity();
  return inf_norm(pa.u_combined - fp.prop.u_kr) / std::max(1.0, inf_norm(fp.prop.u_kr));
}

Outcome aa_gmres_equivalence() {
  double worst_full = 0, worst_partial = 0;
  for (const auto& prob : equality_instances()) {
    const auto op = AdmmOperatord::build(prob, 0.1);
    const int d = int(op.dim());
    const auto full = first_krylov_proposal(op, d + 1, KrylovMode::Obv);
    worst_full = std::max(worst_full, aa_vs_krylov(op, full));
    // A subspace smaller than the exhausting one, where neither candidate is
    // the fixed point.
    const int k = std::max(2, full.basis_dim / 2);
    if (k < full.basis_dim)
      worst_partial = std::max(worst_partial, aa_vs_krylov(op, first_krylov_proposal(op, k, KrylovMode::Obv)));
  }
  return {worst_full <= 1e-6 && worst_partial <= 1e-6,
          fmt("worst relative gap %.2e (exhausted space), %.2e (partial space)", worst_full, worst_partial)};
}

Outcome monotonicity(const std::vector<RunRecord>& runs) {
  long steps = 0, violations = 0;
  for (const auto& r : runs) {
    steps += r.accepted;
    violations += r.monotonicity_violations;
  }
  return {violations == 0, fmt("%ld accepted steps over %zu runs, %ld violations", steps, runs.size(), violations)};
}

Outcome nonexpansive() {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> normal;
  double worst = -std::numeric_limits<double>::infinity();
  int bad = 0;
  const ProblemKind kinds[] = {ProblemKind::RandomQp, ProblemKind::EqualityQp, ProblemKind::MpcToy,
                               ProblemKind::Lasso, ProblemKind::Huber};
  for (int i = 0; i < 10; ++i) {
    GeneratorParams g;
    g.n = 12;
    g.m = 8;
    g.horizon = 5;
    g.features = 6;
    g.samples = 10;
    const auto prob = generate(kinds[i % 5], g, 8000 + i);
    const auto op = AdmmOperatord::build(prob, 0.1);
    const Index d = op.dim();
    for (int t = 0; t < 1000; ++t) {
      VectorXd u(d), v(d);
      const double scale = std::pow(10.0, t % 5 - 2);
      for (Index j = 0; j < d; ++j) {
        u(j) = scale * normal(rng);
        v(j) = scale * normal(rng);
      }
      const double gap = op.m_norm(op.apply_t(u).value - op.apply_t(v).value) - op.m_norm(u - v);
      worst = std::max(worst, gap);
      if (gap > 1e-10) ++bad;
    }
  }
  return {bad == 0, fmt("10000 pairs, %d off, max |Tu-Tv|_M - |u-v|_M = %.2e", bad, worst)};
}

Outcome linearization() {
  std::mt19937_64 rng(91);
  std::normal_distribution<double> normal;
  const double eps = 1e-7;
  int triples = 0, bad = 0, draws = 0;
  double worst = 0;
  while (triples < 100 && draws < 100000) {
    ++draws;
    GeneratorParams g;
    g.n = 4 + draws % 8;
    g.m = 3 + draws % 10;
    const auto prob = generate(ProblemKind::RandomQp, g, 9000 + draws);
    const auto op = AdmmOperatord::build(prob, 0.1);
    const Index d = op.dim();
    VectorXd u(d), q(d);
    for (Index j = 0; j < d; ++j) {
      u(j) = normal(rng);
      q(j) = normal(rng);
    }
    const auto base = op.apply_t(u);
    const auto moved = op.apply_t(VectorXd(u + eps * q));
    if (base.active != moved.active) continue;
    ++triples;
    const VectorXd fd = (moved.value - base.value) / eps;
    const double err = inf_norm(fd - op.apply_linearized(base.active, q)) / (1 + inf_norm(q));
    worst = std::max(worst, err);
    if (err > 1e-6) ++bad;
  }
  return {triples == 100 && bad == 0, fmt("%d stable triples, %d off, worst scaled error %.2e", triples, bad, worst)};
}

Outcome arnoldi_health() {
  double worst_orth = 0, worst_rel = 0;
  long steps = 0;
  auto probs = equality_instances();
  for (const auto& spec : default_suite())
    if (spec.kind == ProblemKind::EqualityQp) probs.push_back(spec.build());
  for (const auto& prob : probs) {
    const auto op = AdmmOperatord::build(prob, 0.1);
    for (auto mode : {KrylovMode::Obv, KrylovMode::Alt}) {
      for (int tries : {1, 3}) {
        DriverObserver<double> obs;
        obs.on_arnoldi_step = [&](long, const ArnoldiState<double>& s, const ActiveSet& js) {
          ++steps;
          const int p = s.broken_down() ? s.size() - 1 : s.size();
          const Matrix<double> q = s.basis().leftCols(p);
          worst_orth = std::max(worst_orth, (q.transpose() * q - Matrix<double>::Identity(p, p)).lpNorm<Eigen::Infinity>());
          const int cols = s.size() - 1;
          if (cols < 1) return;
          Matrix<double> lin = dense_linearization(op, js);
          if (mode == KrylovMode::Obv) lin -= Matrix<double>::Identity(op.dim(), op.dim());
          const Matrix<double> lhs = lin * s.basis().leftCols(cols);
          const Matrix<double> rhs = s.basis().leftCols(s.size()) * s.hessenberg().topLeftCorner(s.size(), cols);
          worst_rel = std::max(worst_rel, (lhs - rhs).lpNorm<Eigen::Infinity>());
        };
        run(op, Accelerator{KrylovConfig::with_tries(15, tries, mode)}, TerminationConfig{}, SafeguardParams{}, obs);
      }
    }
  }
  return {worst_orth <= 1e-10 && worst_rel <= 1e-8,
          fmt("%ld Arnoldi steps, max |Q'Q-I| %.2e, max relation error %.2e", steps, worst_orth, worst_rel)};
}

Outcome ordering(const std::vector<RunRecord>& runs, std::size_t n_problems, const std::vector<SolverSpec>& solvers) {
  const auto t = budget_matrix(runs, n_problems, solvers.size(), BudgetMeasure::TApplications);
  auto column = [&](const std::string& name) {
    for (std::size_t s = 0; s < solvers.size(); ++s)
      if (solvers[s].name == name) return Index(s);
    throw std::logic_error("no solver " + name);
  };
  auto median = [&](Index s) {
    std::vector<double> v(t.col(s).data(), t.col(s).data() + t.rows());
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
  };
  auto solved = [&](Index s) { return (t.col(s).array() < kUnsolved).count(); };
  const Index kr = column("krylov-t3"), aa = column("anderson-i1");
  const double mk = median(kr), ma = median(aa);
  const long sk = solved(kr), sa = solved(aa);
  return {mk <= ma && sk >= sa,
          fmt("median t_applications krylov-t3 %.1f vs anderson-i1 %.1f, solved %ld vs %ld", mk, ma, sk, sa)};
}

Outcome profile_example() {
  Matrix<double> t(2, 2);
  t << 1, 2, 4, 2;
  const auto p = performance_profile(t, {1.0, 2.0});
  Matrix<double> want(2, 2);
  want << 0.5, 0.5, 1.0, 1.0;
  return {p.values == want && p.n_solved == 2, "rho(1) = (0.5, 0.5), rho(2) = (1, 1)"};
}

Outcome paired_kernels() {
  const auto rows = micro_bench(microbench_matrices(100000, 5, 1), 50);
  int under = 0;
  std::string ratios;
  for (const auto& r : rows) {
    under += r.spmv_ratio() < 2.0;
    ratios += fmt(" %.2f", r.spmv_ratio());
  }
  return {under >= 3, fmt("%d of 5 paired/single SpMV ratios below 2:%s", under, ratios.c_str())};
}

}  // namespace

int main() {
  const auto suite = default_suite();
  const auto solvers = default_solvers();
  BenchConfig cfg;
  cfg.term.eps = 1e-6;
  cfg.wall_repeats = 1;
  cfg.jobs = int(std::max(1u, std::thread::hardware_concurrency()));
  const auto runs = run_matrix(suite, solvers, cfg);

  struct Criterion {
    const char* name;
    bool gating;
    std::function<Outcome()> check;
  };
  const std::vector<Criterion> criteria{
      {"kkt-oracle-agreement", true, kkt_agreement},
      {"gmres-finite-termination", true, finite_termination},
      {"anderson-gmres-equivalence", true, aa_gmres_equivalence},
      {"safeguard-monotonicity", true, [&] { return monotonicity(runs); }},
      {"nonexpansiveness", true, nonexpansive},
      {"linearization-exactness", true, linearization},
      {"arnoldi-health", true, arnoldi_health},
      {"iteration-count-ordering", true, [&] { return ordering(runs, suite.size(), solvers); }},
      {"profile-example", true, profile_example},
      {"paired-kernel-speed", false, paired_kernels},
  };
  int gating_failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass && criteria[i].gating) ++gating_failures;
    std::printf("%2zu %s %s%s: %s\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].name,
                criteria[i].gating ? "" : " (non-gating)", o.detail.c_str());
    std::fflush(stdout);
  }
  return gating_failures == 0 ? 0 : 1;
}
