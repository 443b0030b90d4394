#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "srcid/experiment.hpp"
#include "srcid/field_io.hpp"

using namespace srcid;

namespace {
std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "srcid_unit_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}
}  // namespace

TEST_CASE("uniform noise stays in the open interval and is reproducible") {
  const auto a = uniform_noise(7, 10000);
  const auto b = uniform_noise(7, 10000);
  CHECK(a == b);
  double mean = 0.0;
  for (double v : a) {
    CHECK(v > -1.0);
    CHECK(v < 1.0);
    mean += v / 10000.0;
  }
  CHECK(std::abs(mean) < 0.05);
  CHECK(uniform_noise(8, 10) != uniform_noise(7, 10));
}

TEST_CASE("observation synthesis") {
  const auto bp = build_benchmark_problem(4, GammaSpec::parse("bottom"));
  const PdeSolver pde(bp.problem);
  const auto clean = synthesize_observation(pde, bp.f_true, 0.0, 1);
  const auto g = pde.trace(pde.solve_state(bp.f_true));
  CHECK(clean.values == g.values);
  CHECK(clean.noise_level == 0.0);

  const double h = pde.mesh().mesh_size();
  const auto z = synthesize_observation(pde, bp.f_true, CouplingRules{}.noise(h), 5);
  CHECK(z.noise_level > 2e-3);
  CHECK(z.noise_level < 1e-1);
  // Edge-wise Simpson on the piecewise-linear difference.
  double simpson = 0.0;
  for (const auto& e : pde.mesh().boundary_edges()) {
    if (e.side != Side::bottom) continue;
    double d[2];
    for (int k = 0; k < 2; ++k) {
      const auto it = std::find(z.nodes.begin(), z.nodes.end(), e.v[k]);
      const auto idx = static_cast<std::size_t>(it - z.nodes.begin());
      d[k] = z.values[idx] - g.values[idx];
    }
    const double mid = 0.5 * (d[0] + d[1]);
    simpson += e.length / 6.0 * (d[0] * d[0] + 4.0 * mid * mid + d[1] * d[1]);
  }
  CHECK(std::abs(std::sqrt(simpson) - z.noise_level) <= 1e-10);

  // Data from the refined mesh differs from the same-mesh data by discretization error only.
  const auto fine = build_benchmark_problem(8, GammaSpec::parse("bottom"));
  const PdeSolver truth(fine.problem);
  const auto zr = synthesize_observation(pde, bp.f_true, 0.0, 1, &truth, &fine.f_true);
  CHECK(zr.nodes == clean.nodes);
  for (std::size_t k = 0; k < zr.values.size(); ++k) CHECK(std::abs(zr.values[k] - clean.values[k]) < 0.5);
}

TEST_CASE("config round trip and validation") {
  ExperimentConfig c;
  c.levels = {8, 16};
  c.gamma = "bottom,left";
  c.seed = 99;
  c.noise_coef = 0.5;
  c.formats = {FieldFormat::vtk};
  c.out_dir = "out";
  const auto back = ExperimentConfig::from_json(c.to_json());
  CHECK(back.levels == c.levels);
  CHECK(back.gamma == c.gamma);
  CHECK(back.seed == 99);
  CHECK(back.noise_coef == 0.5);
  CHECK(back.formats == c.formats);
  CHECK(back.to_json() == c.to_json());
  CHECK_THROWS(ExperimentConfig::from_json(R"({"levels": [4, 8], "bogus": 1})"));
  ExperimentConfig empty;
  empty.levels.clear();
  CHECK_THROWS(empty.validate());
  ExperimentConfig skip;
  skip.levels = {4, 16};
  CHECK_THROWS(skip.validate());
  CHECK_THROWS(run_benchmark(empty));
}

TEST_CASE("field export") {
  const auto m = TriMesh::structured(1);
  const auto csv = field_csv(P1Field(4, 1.0), m);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "x1,x2,value");
  int rows = 0;
  while (std::getline(in, line)) {
    CHECK(line.substr(line.size() - 2) == ",1");
    ++rows;
  }
  CHECK(rows == 4);
  const auto vtk = field_vtk(P1Field(4, 1.0), m);
  CHECK(vtk.find("CELLS 2 8\n") != std::string::npos);
  CHECK(vtk.find("POINT_DATA 4\n") != std::string::npos);
  CHECK(field_vtk(P0VecField(2, {0.5, -0.5}), m).find("CELL_DATA 2\n") != std::string::npos);

  const auto m4 = TriMesh::structured(4);
  P1Field f(m4.num_vertices());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::sin(1.0 + static_cast<double>(i)) / 3.0;
  const auto path = scratch("roundtrip.csv");
  export_field(f, m4, path, FieldFormat::csv);
  const auto rows4 = read_xyz_csv(path);
  REQUIRE(rows4.size() == f.size());
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(rows4[i][2] == f[i]);
  export_field(f, m4, scratch("again.csv"), FieldFormat::csv);
  CHECK(slurp(path) == slurp(scratch("again.csv")));
  CHECK_THROWS(export_field(f, m4, path / "y.csv", FieldFormat::csv));
}

TEST_CASE("observation files") {
  const auto bp = build_benchmark_problem(4, GammaSpec::parse("bottom,left"));
  const PdeSolver pde(bp.problem);
  const auto z = synthesize_observation(pde, bp.f_true, 0.01, 3);
  const auto path = scratch("obs.csv");
  write_observation(path, z, pde.mesh());
  CHECK(slurp(path).rfind("node_x1,node_x2,z_value\n", 0) == 0);
  const auto back = read_observation(path, pde.mesh(), GammaSpec::parse("bottom,left"));
  CHECK(back.nodes == z.nodes);
  CHECK(back.values == z.values);
  CHECK_THROWS(read_observation(path, pde.mesh(), GammaSpec::parse("bottom")));
}

TEST_CASE("benchmark table is deterministic") {
  ExperimentConfig c;
  c.levels = {4, 8};
  c.max_iter = 40;
  const auto a = run_benchmark(c);
  const auto b = run_benchmark(c);
  REQUIRE(a.complete);
  CHECK(a.rows.size() == 2);
  CHECK(format_table(a.rows) == format_table(b.rows));
  CHECK(format_table(a.rows).rfind("level,h,rho,delta,iterations,tolerance,err_f_l2,err_u_l2,err_u_h1\n", 0) == 0);
  CHECK(a.rows[0].iterations <= 40);
}

TEST_CASE("failed runs are flagged incomplete") {
  ExperimentConfig c;
  c.levels = {4};
  c.tau = 1.0;  // violates the step-size condition
  const auto r = run_benchmark(c);
  CHECK_FALSE(r.complete);
  CHECK(format_table(r.rows, r.complete, r.failure).find("# incomplete") != std::string::npos);
}
