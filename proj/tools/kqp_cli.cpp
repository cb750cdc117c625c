#include "kqp/bench/bench.hpp"
#include "kqp/bench/microbench.hpp"
#include "kqp/bench/problem_io.hpp"
#include "kqp/driver.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace kqp;

namespace {

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.precision(17);
  return out;
}

// Short form of eps for file names, e.g. 0.001 or 1e-06.
std::string eps_tag(double eps) {
  std::ostringstream s;
  s << eps;
  return s.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Krylov-accelerated ADMM for convex QPs: instance generation, solving, benchmarks"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a seeded QP instance as JSON");
  std::string kind_name;
  std::uint64_t seed = 0;
  bench::GeneratorParams gp;
  std::string gen_out;
  gen->add_option("--kind", kind_name, "random_qp|equality_qp|mpc_toy|lasso|huber")->required();
  gen->add_option("--seed", seed)->required();
  gen->add_option("--n", gp.n, "variables (random_qp, equality_qp)");
  gen->add_option("--m", gp.m, "constraint rows (random_qp, equality_qp)");
  gen->add_option("--density", gp.density);
  gen->add_option("--p-reg", gp.p_reg);
  gen->add_option("--horizon", gp.horizon, "mpc_toy horizon");
  gen->add_option("--features", gp.features, "lasso/huber features");
  gen->add_option("--samples", gp.samples, "lasso/huber samples");
  gen->add_option("--lambda", gp.lambda, "lasso weight relative to ||A'b||_inf");
  gen->add_option("--huber-m", gp.huber_m);
  gen->add_option("--out", gen_out)->required();

  // solve
  auto* solve = app.add_subcommand("solve", "Solve one instance");
  std::string solve_in, accel_name = "none", mode_name = "alt", report_path;
  int tries = 1, interval = 1, memory = 15;
  double rho = 0.1, eps = 1e-6;
  long max_iters = 20000;
  solve->add_option("problem", solve_in)->required()->check(CLI::ExistingFile);
  solve->add_option("--accel", accel_name)->check(CLI::IsMember({"none", "anderson", "krylov"}));
  solve->add_option("--mode", mode_name)->check(CLI::IsMember({"obv", "alt"}));
  solve->add_option("--tries", tries)->check(CLI::IsMember({1, 3}));
  solve->add_option("--interval", interval)->check(CLI::IsMember({1, 10}));
  solve->add_option("--memory", memory)->check(CLI::PositiveNumber);
  solve->add_option("--rho", rho)->check(CLI::PositiveNumber);
  solve->add_option("--eps", eps)->check(CLI::PositiveNumber);
  solve->add_option("--max-iters", max_iters)->check(CLI::PositiveNumber);
  solve->add_option("--report", report_path, "CSV with the residual trace");

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "Run the solver matrix and write profiles");
  std::string suite = "default", measure_name = "tapps", bench_out;
  std::vector<double> eps_list{1e-3, 1e-6};
  int jobs = 1;
  bench_cmd->add_option("--suite", suite)->check(CLI::IsMember({"default"}));
  bench_cmd->add_option("--eps", eps_list)->delimiter(',');
  bench_cmd->add_option("--measure", measure_name)->check(CLI::IsMember({"iters", "tapps", "time"}));
  bench_cmd->add_option("--out", bench_out)->required();
  bench_cmd->add_option("--jobs", jobs)->check(CLI::PositiveNumber);

  // microbench
  auto* micro = app.add_subcommand("microbench", "Time paired against single-channel kernels");
  long nnz_min = 100000;
  int reps = 50, count = 5;
  std::string micro_out;
  micro->add_option("--nnz-min", nnz_min)->check(CLI::PositiveNumber);
  micro->add_option("--reps", reps)->check(CLI::PositiveNumber);
  micro->add_option("--matrices", count)->check(CLI::PositiveNumber);
  micro->add_option("--out", micro_out)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      bench::write_problem(gen_out, bench::generate(bench::parse_kind(kind_name), gp, seed));
      return 0;
    }

    if (*solve) {
      const auto prob = bench::read_problem(solve_in);
      Accelerator accel = NoAcceleration{};
      const auto mode = mode_name == "obv" ? KrylovMode::Obv : KrylovMode::Alt;
      if (accel_name == "anderson") accel = AndersonConfig{memory, interval};
      if (accel_name == "krylov") accel = KrylovConfig::with_tries(memory, tries, mode);
      TerminationConfig term;
      term.eps = eps;
      term.max_iters = max_iters;
      const auto rep = run(prob, accel, rho, term, SafeguardParams{});
      const auto& r = rep.final_residuals;
      std::cout << "status " << to_string(rep.status) << "\niterations " << rep.iterations
                << "\nt_applications " << rep.t_applications << "\naccepted " << rep.accepted
                << "\nrejected " << rep.rejected << "\nskipped " << rep.skipped << "\nr_p " << r.r_p
                << "\nr_d " << r.r_d << "\npd " << r.pd << '\n';
      if (!report_path.empty()) {
        auto out = open_out(report_path);
        out << "iteration,r_p,r_d,pd\n";
        for (const auto& s : rep.residual_trace)
          out << s.iteration << ',' << s.residuals.r_p << ',' << s.residuals.r_d << ','
              << s.residuals.pd << '\n';
      }
      return rep.status == SolveStatus::Solved ? 0 : 2;
    }

    if (*bench_cmd) {
      const auto problems = bench::default_suite();
      const auto solvers = bench::default_solvers();
      const auto measure = bench::parse_measure(measure_name);
      for (double e : eps_list) {
        bench::BenchConfig cfg;
        cfg.term.eps = e;
        cfg.jobs = jobs;
        const auto records = bench::run_matrix(problems, solvers, cfg);
        const fs::path dir(bench_out);
        auto runs = open_out(dir / ("runs_eps" + eps_tag(e) + ".csv"));
        bench::write_runs_csv(runs, records);
        const auto prof = bench::performance_profile(
            bench::budget_matrix(records, problems.size(), solvers.size(), measure));
        auto pcsv = open_out(dir / ("profile_" + measure_name + "_eps" + eps_tag(e) + ".csv"));
        bench::write_profile_csv(pcsv, prof, solvers);
        std::cout << "eps " << e << ": wrote " << records.size() << " runs to " << dir << '\n';
      }
      return 0;
    }

    if (*micro) {
      const auto mats = bench::microbench_matrices(nnz_min, count, 42);
      const auto rows = bench::micro_bench(mats, reps);
      auto out = open_out(micro_out);
      bench::write_microbench_csv(out, rows);
      for (const auto& r : rows)
        std::cout << "nnz " << r.nnz << "  spmv ratio " << r.spmv_ratio() << "  solve ratio "
                  << r.solve_ratio() << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
