#pragma once

// The benchmark on (-1, 1)^2: piecewise anisotropic diffusion, a disk-shaped
// source, piecewise-constant Neumann fluxes, noisy data on part of the boundary.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "srcid/fem.hpp"
#include "srcid/pde.hpp"
#include "srcid/primal_dual.hpp"

namespace srcid {

enum class FieldFormat { csv, vtk };

FieldFormat parse_field_format(std::string_view text);
std::string_view format_name(FieldFormat format);

struct ExperimentConfig {
  std::vector<int> levels{4, 8, 16, 32};
  std::string gamma = "bottom";
  std::uint64_t seed = 1;
  double noise_coef = 1.0;
  double rho_coef = 1e-3;
  double tau = 2e-4;
  double theta = 5e-2;
  int max_iter = 600;
  double box_lower = -1.0;
  double box_upper = 3.0;
  bool isotropic_dual = false;
  bool track_b_norm = false;
  /// Synthesize the data on the once-refined mesh instead of the reconstruction mesh.
  bool truth_refined = false;
  std::string out_dir;
  std::vector<FieldFormat> formats;

  /// Throws std::invalid_argument on an unusable configuration.
  void validate() const;
  /// JSON object whose keys mirror the fields; missing keys keep their defaults.
  static ExperimentConfig from_json(const std::string& text);
  static ExperimentConfig load(const std::filesystem::path& path);
  [[nodiscard]] std::string to_json() const;
};

struct RunRecord {
  int level = 0;
  double h = 0.0;
  double rho = 0.0;
  double delta = 0.0;
  int iterations = 0;
  double tolerance = 0.0;
  double err_f = 0.0;
  double err_u_l2 = 0.0;
  double err_u_h1 = 0.0;
};

SymMat2 benchmark_alpha(const Vec2& x);
/// The exact discontinuous source.
double benchmark_source(const Vec2& x);
double benchmark_flux(const Vec2& x, Side side);
inline constexpr double kBenchmarkAlphaLower = 0.1;

struct BenchmarkProblem {
  ProblemDef problem;
  /// Nodal interpolant of the exact source.
  P1Field f_interp;
  /// f_interp shifted by a constant so the discrete compatibility condition holds exactly.
  P1Field f_true;
};

BenchmarkProblem build_benchmark_problem(int level, const GammaSpec& gamma, BoxBounds box = {});

/// Uniform draws on (-1, 1) from mt19937_64 seeded with `seed`, 53-bit mantissa mapping.
std::vector<double> uniform_noise(std::uint64_t seed, std::size_t count);

/// Noisy trace of the state at f_true: z = g + noise_scale R, with delta = ||z - g||_Gamma.
/// With `truth` set, g is the trace of the state computed on that (finer) problem.
Observation synthesize_observation(const PdeSolver& pde, const P1Field& f_true, double noise_scale,
                                   std::uint64_t seed, const PdeSolver* truth = nullptr,
                                   const P1Field* truth_f = nullptr);

/// Per-node error fields of one level, kept for export.
struct LevelFields {
  int level = 0;
  TriMesh mesh;
  P1Field f;
  P1Field f_interp;
  P0VecField p;
  P1Field u_dagger;
  P1Field u_level;
  Observation z;
  std::vector<IterationRecord> history;
};

struct BenchmarkResult {
  std::vector<RunRecord> rows;
  std::vector<LevelFields> fields;
  bool complete = true;
  std::string failure;
};

BenchmarkResult run_benchmark(const ExperimentConfig& config);

std::string format_history(const std::vector<IterationRecord>& history);
std::string format_table(const std::vector<RunRecord>& rows, bool complete = true, const std::string& failure = {});
void write_table(const std::filesystem::path& path, const BenchmarkResult& result);
/// Writes observations and iteration histories of every level to config.out_dir
/// as CSV, plus the fields in each configured format.
void export_level_fields(const ExperimentConfig& config, const BenchmarkResult& result);

/// Dirichlet solutions used by the error columns: u_dagger has the data of
/// u_state(f_true) on the whole boundary, u_level the same data off Gamma and
/// the trace of u_state(f) on Gamma.
struct DirichletPair {
  P1Field u_dagger;
  P1Field u_level;
};
DirichletPair dirichlet_pair(const PdeSolver& pde, const P1Field& f_source_true, const P1Field& u_true_state,
                             const P1Field& f, const P1Field& u_state);

}  // namespace srcid
