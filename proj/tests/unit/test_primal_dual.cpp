#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "srcid/experiment.hpp"
#include "srcid/fem.hpp"
#include "srcid/primal_dual.hpp"
#include "support/oracles.hpp"

using namespace srcid;

namespace {

ProblemDef reaction_problem(int level, BoxBounds box) {
  ProblemDef p;
  p.mesh = TriMesh::structured(level);
  p.coeffs = CoefficientSet::uniform(p.mesh, SymMat2{}, 1.0, 0.0, 1.0);
  p.neumann = NeumannData::zero(p.mesh);
  p.gamma = GammaSpec::parse("bottom");
  p.box = box;
  return p;
}

PdParams params(double rho) {
  PdParams p;
  p.rho = rho;
  return p;
}

}  // namespace

TEST_CASE("coercivity and trace constants") {
  CHECK(std::abs(coercivity_c1(0.1, 2, 4.0) - 0.025) <= 1e-12);
  CHECK(std::abs(coercivity_c1(0.2, 2, 4.0) - 0.05) <= 1e-12);
  CHECK_THROWS(coercivity_c1(0.0, 2, 4.0));
  CHECK(std::abs(trace_constant(Rect{}) - std::sqrt(3.0)) <= 1e-12);
  CHECK(std::abs(trace_constant(Rect{-2, 2, -2, 2}) - std::sqrt(3.0)) <= 1e-12);
  CHECK_THROWS(trace_constant(Rect{0.5, 1.0, -1.0, 1.0}));
}

TEST_CASE("step-size certificate") {
  PdParams p = params(8.409e-4);
  const auto c = certify_steps(p, TriMesh::structured(4), 0.1);
  CHECK(c.lhs == doctest::Approx(50000.0).epsilon(1e-12));
  CHECK(c.rhs < c.lhs);
  CHECK(c.valid);
  p.tau = 1.0;
  const auto bad = certify_steps(p, TriMesh::structured(4), 0.1);
  CHECK_FALSE(bad.left_factor_positive);
  CHECK_FALSE(bad.valid);
}

TEST_CASE("parameter validation") {
  const PdeSolver pde(reaction_problem(2, {-1, 1}));
  const auto z = pde.trace(P1Field(pde.mesh().num_vertices(), 0.0));
  CHECK_THROWS_AS(PrimalDualSolver(pde, z, params(0.0)), std::invalid_argument);
  CHECK_THROWS_AS(PrimalDualSolver(pde, z, params(1.0)), std::invalid_argument);
  PdParams p = params(0.1);
  p.tau = 1.0;
  const PrimalDualSolver s(pde, z, p);
  CHECK_THROWS_AS((void)s.run(), std::invalid_argument);
}

TEST_CASE("primal step trivial cases") {
  const PdeSolver pde(reaction_problem(3, {-1, 2}));
  const auto n = pde.mesh().num_vertices();
  const PrimalDualSolver s(pde, pde.trace(P1Field(n, 0.0)), params(0.5));
  oracle::Rng rng(2);
  const auto f = rng.p1(n);
  const auto zero_p = DualBallField::constant(pde.mesh(), {0.0, 0.0});
  CHECK(s.primal_step(f, zero_p, P1Field(n, 0.0)).values == f.values);
  const auto top = s.primal_step(P1Field(n, 2.0), zero_p, P1Field(n, -1.0));
  for (double v : top.values) CHECK(v == 2.0);
}

TEST_CASE("extrapolation") {
  P1Field a(4, 1.0), b(4, 0.0);
  for (double v : PrimalDualSolver::extrapolate(a, b).values) CHECK(v == 2.0);
  for (double v : PrimalDualSolver::extrapolate(a, a).values) CHECK(v == 1.0);
  oracle::Rng rng(3);
  const auto x = rng.p1(30), y = rng.p1(30);
  const auto e = PrimalDualSolver::extrapolate(x, y);
  for (std::size_t i = 0; i < 30; ++i) CHECK(e[i] == 2.0 * x[i] - y[i]);
}

TEST_CASE("dual step trivial cases") {
  const PdeSolver pde(reaction_problem(2, {-1, 1}));
  const auto n = pde.mesh().num_vertices();
  PdParams prm = params(0.5);
  const PrimalDualSolver s(pde, pde.trace(P1Field(n, 0.0)), prm);
  const auto p = DualBallField::constant(pde.mesh(), {0.25, -0.5});
  const auto same = s.dual_step(p, P1Field(n, 3.0));
  CHECK(same.field().values == p.field().values);
  // (tau rho / theta) d1 f = 5 on every triangle.
  const double slope = 5.0 * prm.theta / (prm.tau * prm.rho);
  P1Field f(n);
  for (std::size_t i = 0; i < n; ++i) f[i] = slope * pde.mesh().vertices()[i][0];
  const auto q = s.dual_step(DualBallField::constant(pde.mesh(), {0.0, 0.0}), f);
  for (const auto& v : q.field().values) {
    CHECK(v[0] == 1.0);
    CHECK(v[1] == 0.0);
  }
}

TEST_CASE("compatible projection solves its KKT system") {
  const auto bp = build_benchmark_problem(4, GammaSpec::parse("bottom"));
  const PdeSolver pde(bp.problem);
  const PrimalDualSolver s(pde, pde.trace(pde.solve_state(bp.f_true)), params(8.4e-4));
  oracle::Rng rng(17);
  const auto& w = pde.mass().lumped;
  for (int k = 0; k < 20; ++k) {
    const auto y = rng.p1(pde.mesh().num_vertices(), -3.0, 5.0);
    const auto f = s.project_admissible(y);
    CHECK(std::abs(pde.compatibility_residual(f)) <= 1e-12);
    // f_i = clamp(y_i - lambda): the shift is common to all free nodes.
    double lambda = std::nan("");
    for (std::size_t i = 0; i < f.size(); ++i) {
      CHECK(f[i] >= -1.0);
      CHECK(f[i] <= 3.0);
      if (f[i] > -1.0 && f[i] < 3.0) {
        if (std::isnan(lambda)) lambda = y[i] - f[i];
        CHECK(std::abs((y[i] - f[i]) - lambda) <= 1e-12);
      }
    }
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (f[i] == -1.0) CHECK(y[i] - lambda <= -1.0 + 1e-12);
      if (f[i] == 3.0) CHECK(y[i] - lambda >= 3.0 - 1e-12);
    }
    // Nearest in the lumped metric among random admissible competitors.
    double best = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) best += w[i] * (f[i] - y[i]) * (f[i] - y[i]);
    for (int t = 0; t < 20; ++t) {
      auto g = f;
      const std::size_t a = static_cast<std::size_t>(rng.uniform(0, static_cast<double>(f.size()) - 1e-9));
      const std::size_t b = (a + 1 + t) % f.size();
      const double d = 0.05 * rng.uniform();
      g[a] += d / w[a];
      g[b] -= d / w[b];
      if (g[a] < -1.0 || g[a] > 3.0 || g[b] < -1.0 || g[b] > 3.0) continue;
      double dist = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) dist += w[i] * (g[i] - y[i]) * (g[i] - y[i]);
      CHECK(dist >= best - 1e-12);
    }
  }
}

TEST_CASE("B-norm") {
  const auto bp = build_benchmark_problem(4, GammaSpec::parse("bottom"));
  const PdeSolver pde(bp.problem);
  const PdParams prm = CouplingRules{}.apply(PdParams{}, pde.mesh().mesh_size());
  const PrimalDualSolver s(pde, pde.trace(pde.solve_state(bp.f_true)), prm);
  const auto n = pde.mesh().num_vertices();
  const auto nt = pde.mesh().num_triangles();
  CHECK(s.b_norm_sq(P1Field(n, 0.0), P0VecField(nt)) == 0.0);
  oracle::Rng rng(31);
  const auto dp = rng.p0(nt);
  CHECK(s.b_norm_sq(P1Field(n, 0.0), dp) ==
        doctest::Approx(prm.theta / prm.tau * p0_inner(pde.mesh(), dp, dp)).epsilon(1e-13));
  for (int k = 0; k < 20; ++k) {
    auto df = rng.p1(n);
    const double r = pde.compatibility_residual(df) - pde.neumann_total();
    for (double& v : df.values) v -= r / 4.0;
    const auto q = rng.p0(nt);
    const double b1 = s.b_norm_sq(df, q);
    CHECK(b1 > 0.0);
    CHECK(std::abs(b1 - s.b_norm_sq_adjoint_route(df, q)) <= 1e-8 * b1);
  }
}

TEST_CASE("noise-free run decreases the objective and keeps iterates feasible") {
  const auto bp = build_benchmark_problem(4, GammaSpec::parse("bottom"));
  const PdeSolver pde(bp.problem);
  PdParams prm = CouplingRules{}.apply(PdParams{}, pde.mesh().mesh_size());
  prm.track_b_norm = true;
  const PrimalDualSolver s(pde, pde.trace(pde.solve_state(bp.f_true)), prm);
  CHECK(s.certificate().valid);
  const auto st = s.run();
  CHECK(st.n <= prm.max_iter);
  CHECK(st.history.back().objective <= st.history.front().objective);
  CHECK(st.history.size() == static_cast<std::size_t>(st.n) + 1);
  for (double v : st.f.values) {
    CHECK(v >= -1.0);
    CHECK(v <= 3.0);
  }
  CHECK(st.p.field().max_abs() <= 1.0);
  for (std::size_t k = 2; k < st.history.size(); ++k)
    CHECK(st.history[k].b_norm_sq <= st.history[k - 1].b_norm_sq * (1.0 + 1e-8));
  // Termination by the tolerance rule or by the iteration limit.
  CHECK((st.converged ? st.history.back().tolerance <= 0.0 : st.n == prm.max_iter));
}

TEST_CASE("tolerance definition") {
  const auto bp = build_benchmark_problem(4, GammaSpec::parse("bottom"));
  const PdeSolver pde(bp.problem);
  const PdParams prm = CouplingRules{}.apply(PdParams{}, pde.mesh().mesh_size());
  CHECK(prm.tol_c1 == doctest::Approx(8.409e-6).epsilon(1e-4));
  CHECK(prm.tol_c2 == doctest::Approx(8.409e-5).epsilon(1e-4));
  const PrimalDualSolver s(pde, pde.trace(pde.solve_state(bp.f_true)), prm);
  CHECK(s.tolerance(2.0, 2.0) == doctest::Approx(2.0 * (1.0 - prm.tol_c2) - prm.tol_c1));
  CHECK(s.tolerance(0.0, 2.0) < 0.0);
  // The first recorded tolerance of the benchmark start is positive.
  PdParams one = prm;
  one.max_iter = 0;
  const auto st = PrimalDualSolver(pde, pde.trace(pde.solve_state(bp.f_true)), one).run();
  CHECK(st.history.front().tolerance > 0.0);
}

TEST_CASE("multilevel driver") {
  CHECK_THROWS(multilevel_run({}, [](int) { return LevelProblem{}; }));
  CHECK_THROWS(multilevel_run({4, 12}, [](int) { return LevelProblem{}; }));
  const CouplingRules rules;
  CHECK(rules.rho(benchmark_mesh_size(4)) == doctest::Approx(8.409e-4).epsilon(1e-4));
  CHECK(rules.rho(benchmark_mesh_size(8)) == doctest::Approx(5.946e-4).epsilon(1e-4));

  auto factory = [](int level) {
    const auto bp = build_benchmark_problem(level, GammaSpec::parse("bottom"));
    auto pde = std::make_shared<const PdeSolver>(bp.problem);
    LevelProblem lp;
    lp.params = CouplingRules{}.apply(PdParams{}, pde->mesh().mesh_size());
    lp.params.max_iter = 30;
    lp.params.track_b_norm = false;
    lp.z = pde->trace(pde->solve_state(bp.f_true));
    lp.pde = pde;
    return lp;
  };
  const auto single = multilevel_run({4}, factory);
  const auto lp = factory(4);
  const auto direct = PrimalDualSolver(*lp.pde, lp.z, lp.params).run();
  CHECK(single.front().state.f.values == direct.f.values);

  const auto two = multilevel_run({4, 8}, factory);
  CHECK(two.size() == 2);
  CHECK(two[1].state.f.size() == 81);
  CHECK(two[1].problem.params.rho == doctest::Approx(5.946e-4).epsilon(1e-4));
}
