// srcid: source reconstruction benchmark driver.
//
//   srcid bench [--config run.json] [--levels 4,8,16,32] [--gamma bottom] ...
//   srcid solve --level 16 --observation z.csv [--out dir] ...
//   srcid check [--criterion 5]

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "srcid/experiment.hpp"
#include "srcid/field_io.hpp"
#include "srcid/kernels.hpp"
#include "srcid/primal_dual.hpp"
#include "srcid/verify.hpp"

namespace {

using namespace srcid;

// Flags shared by bench and solve. Optional members are only applied when given.
struct CommonFlags {
  std::string config;
  std::vector<int> levels;
  std::string gamma;
  std::optional<std::uint64_t> seed;
  std::optional<double> tau;
  std::optional<double> theta;
  std::optional<double> rho_coef;
  std::optional<double> noise_coef;
  std::optional<int> max_iter;
  std::vector<double> box;
  std::string out;
  std::vector<std::string> formats;
  bool isotropic_dual = false;
  bool track_b_norm = false;
  std::string truth_level;
  bool serial = false;
};

void add_common(CLI::App* app, CommonFlags& f, bool with_levels) {
  app->add_option("--config", f.config, "JSON configuration file; flags override its keys")->check(CLI::ExistingFile);
  if (with_levels) app->add_option("--levels", f.levels, "refinement levels, doubling (e.g. 4,8,16,32)")->delimiter(',');
  app->add_option("--gamma", f.gamma, "observed sides, comma separated (bottom,right,top,left)");
  app->add_option("--seed", f.seed, "noise seed");
  app->add_option("--tau", f.tau, "primal step size");
  app->add_option("--theta", f.theta, "dual weight");
  app->add_option("--rho-coef", f.rho_coef, "rho = coef * sqrt(h)");
  app->add_option("--noise-coef", f.noise_coef, "noise amplitude = coef * h * sqrt(rho)");
  app->add_option("--max-iter", f.max_iter, "iteration limit per level");
  app->add_option("--box", f.box, "source bounds lower,upper")->delimiter(',')->expected(2);
  app->add_option("--out", f.out, "output directory");
  app->add_option("--format", f.formats, "field export format (csv, vtk); repeatable")
      ->check(CLI::IsMember({"csv", "vtk"}));
  app->add_flag("--isotropic-dual", f.isotropic_dual, "project the dual variable onto the Euclidean ball");
  app->add_flag("--track-b-norm", f.track_b_norm, "record B-norms of successive differences");
  app->add_option("--truth-level", f.truth_level, "mesh for synthetic data: same or refined")
      ->check(CLI::IsMember({"same", "refined"}));
  app->add_flag("--serial", f.serial, "use the serial reference kernels");
}

ExperimentConfig resolve(const CommonFlags& f) {
  ExperimentConfig c = f.config.empty() ? ExperimentConfig{} : ExperimentConfig::load(f.config);
  if (!f.levels.empty()) c.levels = f.levels;
  if (!f.gamma.empty()) c.gamma = f.gamma;
  if (f.seed) c.seed = *f.seed;
  if (f.tau) c.tau = *f.tau;
  if (f.theta) c.theta = *f.theta;
  if (f.rho_coef) c.rho_coef = *f.rho_coef;
  if (f.noise_coef) c.noise_coef = *f.noise_coef;
  if (f.max_iter) c.max_iter = *f.max_iter;
  if (f.box.size() == 2) {
    c.box_lower = f.box[0];
    c.box_upper = f.box[1];
  }
  if (!f.out.empty()) c.out_dir = f.out;
  if (!f.formats.empty()) {
    c.formats.clear();
    for (const auto& s : f.formats) c.formats.push_back(parse_field_format(s));
  }
  if (f.isotropic_dual) c.isotropic_dual = true;
  if (f.track_b_norm) c.track_b_norm = true;
  if (!f.truth_level.empty()) c.truth_refined = f.truth_level == "refined";
  if (f.serial) kernels::set_parallel(false);
  return c;
}

int cmd_bench(const CommonFlags& flags) {
  const ExperimentConfig cfg = resolve(flags);
  cfg.validate();
  const BenchmarkResult res = run_benchmark(cfg);
  std::cout << format_table(res.rows, res.complete, res.failure);
  if (!cfg.out_dir.empty()) {
    const std::filesystem::path dir(cfg.out_dir);
    write_table(dir / "results.csv", res);
    write_text_file(dir / "config.json", cfg.to_json());
    export_level_fields(cfg, res);
  }
  if (!res.complete) {
    std::cerr << "error: " << res.failure << "\n";
    return 1;
  }
  return 0;
}

int cmd_solve(const CommonFlags& flags, int level, const std::string& obs_path, std::optional<double> rho) {
  ExperimentConfig cfg = resolve(flags);
  cfg.levels = {level};
  cfg.validate();
  const GammaSpec gamma = GammaSpec::parse(cfg.gamma);
  const BenchmarkProblem bp = build_benchmark_problem(level, gamma, {cfg.box_lower, cfg.box_upper});
  const PdeSolver pde(bp.problem);
  const Observation z = read_observation(obs_path, pde.mesh(), gamma);

  CouplingRules rules;
  rules.rho_coef = cfg.rho_coef;
  PdParams prm;
  prm.tau = cfg.tau;
  prm.theta = cfg.theta;
  prm.max_iter = cfg.max_iter;
  prm.isotropic_dual = cfg.isotropic_dual;
  prm.track_b_norm = cfg.track_b_norm;
  prm = rules.apply(prm, pde.mesh().mesh_size());
  if (rho) prm.rho = *rho;

  const PrimalDualSolver solver(pde, z, prm);
  const auto& cert = solver.certificate();
  if (!cert.valid) {
    std::cerr << fmt::format("error: step sizes fail the convergence condition: lhs {:.6e} <= rhs {:.6e}\n", cert.lhs,
                             cert.rhs);
    return 2;
  }
  const PdState s = solver.run();
  P1Field err(s.f.size());
  for (std::size_t i = 0; i < err.size(); ++i) err[i] = bp.f_interp[i] - s.f[i];
  std::cout << fmt::format("level {}  h {:.6e}  rho {:.6e}\n", level, pde.mesh().mesh_size(), prm.rho);
  std::cout << fmt::format("iterations {}  converged {}  tolerance {:.6e}\n", s.n, s.converged ? "yes" : "no",
                           s.history.back().tolerance);
  std::cout << fmt::format("objective {:.10e}  misfit {:.10e}\n", s.history.back().objective, pde.misfit(s.u, z));
  std::cout << fmt::format("distance to benchmark source {:.6e}\n", pde.l2_norm(err));
  if (!cfg.out_dir.empty()) {
    const std::filesystem::path dir(cfg.out_dir);
    write_text_file(dir / "history.csv", format_history(s.history));
    for (FieldFormat fmtk : cfg.formats) {
      const std::string ext(format_name(fmtk));
      export_field(s.f, pde.mesh(), dir / ("f." + ext), fmtk, "f");
      export_field(s.u, pde.mesh(), dir / ("u." + ext), fmtk, "u");
      export_field(s.p.field(), pde.mesh(), dir / ("p." + ext), fmtk, "p");
    }
  }
  return 0;
}

int cmd_check(const std::vector<int>& criteria, std::uint64_t seed) {
  VerifyOptions o;
  o.seed = seed;
  std::vector<int> ids = criteria;
  if (ids.empty())
    for (int k = 1; k <= kCriterionCount; ++k) ids.push_back(k);
  int failed = 0;
  for (int id : ids) {
    const CriterionResult r = check_criterion(id, o);
    std::cout << format_result(r) << std::endl;
    failed += r.passed ? 0 : 1;
  }
  std::cout << fmt::format("{} of {} criteria passed\n", ids.size() - failed, ids.size());
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Total-variation source reconstruction from partial boundary data"};
  app.require_subcommand(1);

  CommonFlags bench_flags;
  auto* bench = app.add_subcommand("bench", "multilevel benchmark run with error table");
  add_common(bench, bench_flags, true);

  CommonFlags solve_flags;
  int level = 0;
  std::string obs_path;
  std::optional<double> rho;
  auto* solve = app.add_subcommand("solve", "single-level reconstruction from an observation file");
  add_common(solve, solve_flags, false);
  solve->add_option("--level", level, "refinement level")->required()->check(CLI::PositiveNumber);
  solve->add_option("--observation", obs_path, "CSV with node_x1,node_x2,z_value")->required()->check(CLI::ExistingFile);
  solve->add_option("--rho", rho, "regularization parameter (default from --rho-coef)");

  std::vector<int> criteria;
  std::uint64_t check_seed = 1;
  auto* check = app.add_subcommand("check", "run the verification criteria");
  check->add_option("--criterion", criteria, "criterion number (repeatable; default all)")->check(CLI::Range(1, kCriterionCount));
  check->add_option("--seed", check_seed, "seed for random draws");

  CLI11_PARSE(app, argc, argv);
  try {
    if (bench->parsed()) return cmd_bench(bench_flags);
    if (solve->parsed()) return cmd_solve(solve_flags, level, obs_path, rho);
    if (check->parsed()) return cmd_check(criteria, check_seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
