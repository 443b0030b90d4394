#include "srcid/experiment.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "json.hpp"
#include "srcid/field_io.hpp"

namespace srcid {

namespace {
// Sampling points can land exactly on the subdomain interfaces; the sets are closed.
constexpr double kInterfaceSlack = 1e-12;
}  // namespace

FieldFormat parse_field_format(std::string_view text) {
  if (text == "csv") return FieldFormat::csv;
  if (text == "vtk") return FieldFormat::vtk;
  throw std::invalid_argument("unknown field format '" + std::string(text) + "' (expected csv or vtk)");
}

std::string_view format_name(FieldFormat format) { return format == FieldFormat::csv ? "csv" : "vtk"; }

void ExperimentConfig::validate() const {
  if (levels.empty()) throw std::invalid_argument("levels list is empty");
  if (levels.front() < 1) throw std::invalid_argument("levels must be positive");
  for (std::size_t k = 1; k < levels.size(); ++k)
    if (levels[k] != 2 * levels[k - 1]) throw std::invalid_argument("levels must double from one to the next");
  (void)GammaSpec::parse(gamma);
  if (!(noise_coef >= 0.0)) throw std::invalid_argument("noise coefficient must be nonnegative");
  if (!(rho_coef > 0.0)) throw std::invalid_argument("rho coefficient must be positive");
  if (!(tau > 0.0) || !(theta > 0.0)) throw std::invalid_argument("tau and theta must be positive");
  if (max_iter < 0) throw std::invalid_argument("max_iter must be nonnegative");
  if (!std::isfinite(box_lower) || !std::isfinite(box_upper) || !(box_lower < box_upper))
    throw std::invalid_argument("box bounds must be finite with lower < upper");
  if (!formats.empty() && out_dir.empty()) throw std::invalid_argument("field export needs an output directory");
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  static const char* const known[] = {"levels", "gamma", "seed", "noise_coef", "rho_coef", "tau", "theta",
                                      "max_iter", "box", "isotropic_dual", "track_b_norm", "truth_refined",
                                      "out", "formats"};
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw std::invalid_argument("unknown config key '" + key + "'");
  }
  ExperimentConfig c;
  c.levels = j.value("levels", c.levels);
  c.gamma = j.value("gamma", c.gamma);
  c.seed = j.value("seed", c.seed);
  c.noise_coef = j.value("noise_coef", c.noise_coef);
  c.rho_coef = j.value("rho_coef", c.rho_coef);
  c.tau = j.value("tau", c.tau);
  c.theta = j.value("theta", c.theta);
  c.max_iter = j.value("max_iter", c.max_iter);
  if (j.contains("box")) {
    const auto box = j.at("box").get<std::vector<double>>();
    if (box.size() != 2) throw std::invalid_argument("box must be [lower, upper]");
    c.box_lower = box[0];
    c.box_upper = box[1];
  }
  c.isotropic_dual = j.value("isotropic_dual", c.isotropic_dual);
  c.track_b_norm = j.value("track_b_norm", c.track_b_norm);
  c.truth_refined = j.value("truth_refined", c.truth_refined);
  c.out_dir = j.value("out", c.out_dir);
  if (j.contains("formats"))
    for (const auto& f : j.at("formats").get<std::vector<std::string>>()) c.formats.push_back(parse_field_format(f));
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return from_json(ss.str());
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

std::string ExperimentConfig::to_json() const {
  nlohmann::ordered_json j;
  j["levels"] = levels;
  j["gamma"] = gamma;
  j["seed"] = seed;
  j["noise_coef"] = noise_coef;
  j["rho_coef"] = rho_coef;
  j["tau"] = tau;
  j["theta"] = theta;
  j["max_iter"] = max_iter;
  j["box"] = {box_lower, box_upper};
  j["isotropic_dual"] = isotropic_dual;
  j["track_b_norm"] = track_b_norm;
  j["truth_refined"] = truth_refined;
  j["out"] = out_dir;
  std::vector<std::string> names;
  for (auto f : formats) names.emplace_back(format_name(f));
  j["formats"] = names;
  return j.dump(2) + "\n";
}

SymMat2 benchmark_alpha(const Vec2& x) {
  const double ax = std::abs(x[0]);
  const double ay = std::abs(x[1]);
  const bool in_square = ax <= 0.5 + kInterfaceSlack && ay <= 0.5 + kInterfaceSlack;
  const bool in_diamond = ax + ay <= 0.5 + kInterfaceSlack;
  const bool in_disk = x[0] * x[0] + x[1] * x[1] <= 0.25 + kInterfaceSlack;
  return {in_square ? 3.0 : 1.0, in_diamond ? 1.0 : 0.0, in_disk ? 4.0 : 2.0};
}

double benchmark_source(const Vec2& x) {
  const double base = -std::numbers::pi / 8.0;
  return x[0] * x[0] + x[1] * x[1] <= 0.25 + kInterfaceSlack ? 2.0 + base : base;
}

double benchmark_flux(const Vec2& x, Side side) {
  switch (side) {
    case Side::bottom: return x[0] > 0.0 ? 1.0 : -2.0;
    case Side::top: return x[0] > 0.0 ? 2.0 : -1.0;
    case Side::left: return x[1] > 0.0 ? -4.0 : 3.0;
    case Side::right: return x[1] > 0.0 ? -3.0 : 4.0;
  }
  return 0.0;
}

BenchmarkProblem build_benchmark_problem(int level, const GammaSpec& gamma, BoxBounds box) {
  BenchmarkProblem b;
  b.problem.mesh = TriMesh::structured(level);
  const TriMesh& mesh = b.problem.mesh;
  b.problem.coeffs = CoefficientSet::sampled(
      mesh, benchmark_alpha, [](const Vec2&) { return 0.0; }, [](const Vec2&) { return 0.0; },
      kBenchmarkAlphaLower);
  b.problem.neumann = NeumannData::sampled(mesh, benchmark_flux);
  b.problem.gamma = gamma;
  b.problem.box = box;
  b.problem.validate();

  b.f_interp = interpolate(mesh, benchmark_source);
  const auto mass = assemble_mass(mesh);
  const auto load = neumann_load(mesh, b.problem.neumann);
  double total_w = 0.0;
  double residual = 0.0;
  for (std::size_t i = 0; i < load.size(); ++i) {
    total_w += mass.lumped[i];
    residual += mass.lumped[i] * b.f_interp[i] + load[i];
  }
  b.f_true = b.f_interp;
  for (double& v : b.f_true.values) v -= residual / total_w;
  return b;
}

std::vector<double> uniform_noise(std::uint64_t seed, std::size_t count) {
  std::mt19937_64 gen(seed);
  std::vector<double> r(count);
  for (auto& v : r) {
    // 53 random bits at the cell midpoints of a 2^-53 grid on (0, 1), mapped to (-1, 1).
    const double u = (static_cast<double>(gen() >> 11) + 0.5) * 0x1.0p-53;
    v = 2.0 * u - 1.0;
  }
  return r;
}

Observation synthesize_observation(const PdeSolver& pde, const P1Field& f_true, double noise_scale,
                                   std::uint64_t seed, const PdeSolver* truth, const P1Field* truth_f) {
  if (!(noise_scale >= 0.0)) throw std::invalid_argument("noise scale must be nonnegative");
  Observation clean;
  if (truth == nullptr) {
    clean = pde.trace(pde.solve_state(f_true));
  } else {
    if (truth_f == nullptr) throw std::invalid_argument("refined truth needs its source field");
    const TriMesh& coarse = pde.mesh();
    const TriMesh& fine = truth->mesh();
    if (fine.level() % coarse.level() != 0) throw std::invalid_argument("truth mesh must refine the mesh");
    const int ratio = fine.level() / coarse.level();
    const P1Field u_fine = truth->solve_state(*truth_f);
    clean.nodes = pde.gamma_nodes();
    const int stride = coarse.level() + 1;
    for (Index i : clean.nodes) clean.values.push_back(u_fine[fine.vertex_index(ratio * (i % stride), ratio * (i / stride))]);
  }
  Observation z = clean;
  const auto r = uniform_noise(seed, z.values.size());
  for (std::size_t k = 0; k < r.size(); ++k) z.values[k] += noise_scale * r[k];
  std::vector<double> dz(pde.mesh().num_vertices(), 0.0);
  for (std::size_t k = 0; k < z.nodes.size(); ++k) dz[z.nodes[k]] = z.values[k] - clean.values[k];
  z.noise_level = std::sqrt(std::max(0.0, pde.boundary_mass().quadratic_form(dz)));
  return z;
}

DirichletPair dirichlet_pair(const PdeSolver& pde, const P1Field& f_source_true, const P1Field& u_true_state,
                             const P1Field& f, const P1Field& u_state) {
  const auto boundary = pde.mesh().boundary_nodes();
  const auto& gamma_nodes = pde.gamma_nodes();
  std::vector<char> on_gamma(pde.mesh().num_vertices(), 0);
  for (Index i : gamma_nodes) on_gamma[i] = 1;
  std::vector<double> g_true(boundary.size());
  std::vector<double> g_level(boundary.size());
  for (std::size_t k = 0; k < boundary.size(); ++k) {
    const Index i = boundary[k];
    g_true[k] = u_true_state[i];
    g_level[k] = on_gamma[i] ? u_state[i] : u_true_state[i];
  }
  return {pde.solve_dirichlet(f_source_true, g_true), pde.solve_dirichlet(f, g_level)};
}

BenchmarkResult run_benchmark(const ExperimentConfig& config) {
  config.validate();
  const GammaSpec gamma = GammaSpec::parse(config.gamma);
  const BoxBounds box{config.box_lower, config.box_upper};
  CouplingRules rules;
  rules.rho_coef = config.rho_coef;
  rules.noise_coef = config.noise_coef;
  PdParams base;
  base.tau = config.tau;
  base.theta = config.theta;
  base.max_iter = config.max_iter;
  base.isotropic_dual = config.isotropic_dual;
  base.track_b_norm = config.track_b_norm;

  std::map<int, BenchmarkProblem> problems;
  auto factory = [&](int level) {
    BenchmarkProblem bp = build_benchmark_problem(level, gamma, box);
    auto pde = std::make_shared<const PdeSolver>(bp.problem);
    const double h = pde->mesh().mesh_size();
    LevelProblem lp;
    lp.params = rules.apply(base, h);
    const double noise = rules.noise(h);
    const std::uint64_t seed = config.seed + static_cast<std::uint64_t>(level);
    if (config.truth_refined) {
      BenchmarkProblem fine = build_benchmark_problem(2 * level, gamma, box);
      const PdeSolver truth(fine.problem);
      lp.z = synthesize_observation(*pde, bp.f_true, noise, seed, &truth, &fine.f_true);
    } else {
      lp.z = synthesize_observation(*pde, bp.f_true, noise, seed);
    }
    lp.pde = std::move(pde);
    problems.emplace(level, std::move(bp));
    return lp;
  };

  BenchmarkResult result;
  auto on_level = [&](const LevelResult& r) {
    const PdeSolver& pde = *r.problem.pde;
    const BenchmarkProblem& bp = problems.at(r.level);
    const P1Field u_true = pde.solve_state(bp.f_true);
    const DirichletPair d = dirichlet_pair(pde, bp.f_true, u_true, r.state.f, r.state.u);
    P1Field ef(bp.f_interp.size());
    for (std::size_t i = 0; i < ef.size(); ++i) ef[i] = bp.f_interp[i] - r.state.f[i];
    P1Field eu(ef.size());
    for (std::size_t i = 0; i < eu.size(); ++i) eu[i] = d.u_dagger[i] - d.u_level[i];
    RunRecord row;
    row.level = r.level;
    row.h = pde.mesh().mesh_size();
    row.rho = r.problem.params.rho;
    row.delta = r.problem.z.noise_level;
    row.iterations = r.state.n;
    row.tolerance = r.state.history.back().tolerance;
    row.err_f = pde.l2_norm(ef);
    row.err_u_l2 = pde.l2_norm(eu);
    row.err_u_h1 = pde.h1_norm(eu);
    result.rows.push_back(row);
    if (!config.out_dir.empty())
      result.fields.push_back({r.level, pde.mesh(), r.state.f, bp.f_interp, r.state.p.field(), d.u_dagger, d.u_level,
                               r.problem.z, r.state.history});
  };

  try {
    (void)multilevel_run(config.levels, factory, on_level);
  } catch (const std::exception& e) {
    result.complete = false;
    result.failure = e.what();
  }
  return result;
}

std::string format_history(const std::vector<IterationRecord>& history) {
  std::string out = "n,objective,tolerance,b_norm_sq\n";
  for (const auto& h : history)
    out += fmt::format("{},{:.10e},{:.10e},{}\n", h.n, h.objective, h.tolerance,
                       std::isnan(h.b_norm_sq) ? std::string() : fmt::format("{:.10e}", h.b_norm_sq));
  return out;
}

std::string format_table(const std::vector<RunRecord>& rows, bool complete, const std::string& failure) {
  std::string out = "level,h,rho,delta,iterations,tolerance,err_f_l2,err_u_l2,err_u_h1\n";
  for (const auto& r : rows)
    out += fmt::format("{},{:.6e},{:.6e},{:.6e},{},{:.6e},{:.6e},{:.6e},{:.6e}\n", r.level, r.h, r.rho, r.delta,
                       r.iterations, r.tolerance, r.err_f, r.err_u_l2, r.err_u_h1);
  if (!complete) {
    std::string msg = failure;
    for (char& c : msg)
      if (c == '\n') c = ' ';
    out += "# incomplete: " + msg + "\n";
  }
  return out;
}

void write_table(const std::filesystem::path& path, const BenchmarkResult& result) {
  write_text_file(path, format_table(result.rows, result.complete, result.failure));
}

void export_level_fields(const ExperimentConfig& config, const BenchmarkResult& result) {
  if (config.out_dir.empty()) return;
  const std::filesystem::path dir(config.out_dir);
  for (const auto& lf : result.fields) {
    P1Field err(lf.f.size());
    for (std::size_t i = 0; i < err.size(); ++i) err[i] = lf.f_interp[i] - lf.f[i];
    write_observation(dir / fmt::format("level{}_observation.csv", lf.level), lf.z, lf.mesh);
    write_text_file(dir / fmt::format("level{}_history.csv", lf.level), format_history(lf.history));
    for (FieldFormat fmt : config.formats) {
      const std::string ext(format_name(fmt));
      auto name = [&](const char* what) { return dir / fmt::format("level{}_{}.{}", lf.level, what, ext); };
      export_field(lf.f, lf.mesh, name("f"), fmt, "f");
      export_field(lf.f_interp, lf.mesh, name("f_true"), fmt, "f_true");
      export_field(err, lf.mesh, name("f_error"), fmt, "f_error");
      export_field(lf.u_dagger, lf.mesh, name("u_dagger"), fmt, "u_dagger");
      export_field(lf.u_level, lf.mesh, name("u_level"), fmt, "u_level");
      export_field(lf.p, lf.mesh, name("p"), fmt, "p");
    }
  }
}

}  // namespace srcid
