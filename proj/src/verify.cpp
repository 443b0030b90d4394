#include "srcid/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "srcid/experiment.hpp"
#include "srcid/fem.hpp"
#include "srcid/pde.hpp"
#include "srcid/primal_dual.hpp"
#include "srcid/tv.hpp"

namespace srcid {

namespace {

constexpr int kLevels5[] = {4, 8, 16, 32, 64};
constexpr double kTableH[] = {0.7071, 0.3536, 0.1766, 8.8388e-2, 4.4194e-2};
constexpr double kTableRho[] = {8.4090e-4, 5.9460e-4, 4.2045e-4, 2.9730e-4, 2.1022e-4};
constexpr double kTableDelta[] = {2.3763e-2, 8.8717e-3, 2.5872e-3, 1.1817e-3, 5.6112e-4};
constexpr double kTableErrF32 = 0.1095;
constexpr double kTableErrU32 = 1.2926e-3;

// Random values on (-1, 1) with a stream per purpose.
struct Draws {
  std::vector<double> pool;
  std::size_t next = 0;
  Draws(std::uint64_t seed, std::size_t n) : pool(uniform_noise(seed, n)) {}
  double operator()() {
    if (next == pool.size()) throw std::logic_error("random pool exhausted");
    return pool[next++];
  }
};

P1Field random_p1(Draws& d, std::size_t n) {
  P1Field f(n);
  for (auto& v : f.values) v = d();
  return f;
}

P0VecField random_p0(Draws& d, std::size_t n, double scale) {
  P0VecField p(n);
  for (auto& v : p.values) v = {scale * d(), scale * d()};
  return p;
}

// Shift f by a constant so the pure Neumann compatibility condition holds.
void make_compatible(const PdeSolver& pde, P1Field& f) {
  const auto& w = pde.mass().lumped;
  double tw = 0.0;
  for (double x : w) tw += x;
  const double r = pde.compatibility_residual(f) / tw;
  for (double& v : f.values) v -= r;
}

// Agreement to 4 significant figures: within half a unit in the fourth digit of the reference.
bool agrees4(double x, double ref) {
  const double unit = std::pow(10.0, std::floor(std::log10(std::abs(ref))) - 3.0);
  return std::abs(x - ref) <= 0.5 * unit;
}

CriterionResult c1_table_columns() {
  CriterionResult r{1, "mesh size and regularization columns match the reference values", true, {}};
  std::ostringstream os;
  CouplingRules rules;
  for (int k = 0; k < 5; ++k) {
    const double h = TriMesh::structured(kLevels5[k]).mesh_size();
    const double rho = rules.rho(h);
    const bool ok_h = agrees4(h, kTableH[k]);
    const bool ok_rho = agrees4(rho, kTableRho[k]);
    r.passed = r.passed && ok_h && ok_rho;
    os << fmt::format("l={} h={:.5e} (ref {:.4e}{}) rho={:.5e} (ref {:.4e}{}); ", kLevels5[k], h, kTableH[k],
                      ok_h ? "" : " MISMATCH", rho, kTableRho[k], ok_rho ? "" : " MISMATCH");
  }
  r.detail = os.str();
  return r;
}

CriterionResult c2_benchmark_trend(const VerifyOptions& o) {
  CriterionResult r{2, "benchmark error decreases under refinement and matches the reference level-32 errors",
                    false, {}};
  ExperimentConfig cfg;
  cfg.levels = {4, 8, 16, 32};
  cfg.gamma = "bottom";
  cfg.seed = o.seed;
  const auto t0 = std::chrono::steady_clock::now();
  const BenchmarkResult res = run_benchmark(cfg);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::ostringstream os;
  for (const auto& row : res.rows)
    os << fmt::format("l={} iters={} |f-f_l|={:.4e} |u-u_l|={:.4e} |u-u_l|_1={:.4e}; ", row.level, row.iterations,
                      row.err_f, row.err_u_l2, row.err_u_h1);
  if (!res.complete) {
    r.detail = os.str() + "run failed: " + res.failure;
    return r;
  }
  bool decreasing = true;
  for (std::size_t k = 1; k < res.rows.size(); ++k) decreasing = decreasing && res.rows[k].err_f < res.rows[k - 1].err_f;
  const auto& last = res.rows.back();
  const double rf = last.err_f / kTableErrF32;
  const double ru = last.err_u_l2 / kTableErrU32;
  const bool f_ok = rf >= 0.5 && rf <= 2.0;
  const bool u_ok = ru >= 1.0 / 3.0 && ru <= 3.0;
  r.passed = decreasing && f_ok && u_ok && secs < 600.0;
  os << fmt::format("strictly decreasing: {}; l=32 f-error ratio {:.3f} (need [0.5, 2]); u-error ratio {:.3f} "
                    "(need [1/3, 3]); {:.1f} s",
                    decreasing ? "yes" : "no", rf, ru, secs);
  r.detail = os.str();
  return r;
}

CriterionResult c3_noise_magnitude(const VerifyOptions& o) {
  CriterionResult r{3, "noise level has the reference order of magnitude at every level", true, {}};
  std::ostringstream os;
  CouplingRules rules;
  for (int k = 0; k < 5; ++k) {
    const int level = kLevels5[k];
    const BenchmarkProblem bp = build_benchmark_problem(level, GammaSpec::parse("bottom"));
    const PdeSolver pde(bp.problem);
    const double h = pde.mesh().mesh_size();
    const Observation z = synthesize_observation(pde, bp.f_true, rules.noise(h), o.seed + level);
    const double ratio = z.noise_level / kTableDelta[k];
    const bool ok = ratio >= 0.2 && ratio <= 5.0;
    r.passed = r.passed && ok;
    os << fmt::format("l={} delta={:.4e} ratio {:.3f}{}; ", level, z.noise_level, ratio, ok ? "" : " OUT OF RANGE");
  }
  r.detail = os.str();
  return r;
}

CriterionResult c4_rate() {
  CriterionResult r{4, "successive B-norms are monotone with O(1/n) decay (level 8, noise-free)", false, {}};
  const BenchmarkProblem bp = build_benchmark_problem(8, GammaSpec::parse("bottom"));
  const PdeSolver pde(bp.problem);
  const Observation z = synthesize_observation(pde, bp.f_true, 0.0, 0);
  PdParams prm = CouplingRules{}.apply(PdParams{}, pde.mesh().mesh_size());
  prm.track_b_norm = true;
  const PrimalDualSolver solver(pde, z, prm);
  const PdState s = solver.run();
  const P1Field f0 = solver.project_admissible(P1Field(pde.mesh().num_vertices(), 1.0));
  const DualBallField p0 = DualBallField::constant(pde.mesh(), {0.5, 0.5});
  P1Field df(f0.size());
  for (std::size_t i = 0; i < df.size(); ++i) df[i] = f0[i] - s.f[i];
  P0VecField dp(p0.size());
  for (std::size_t t = 0; t < dp.size(); ++t) dp[t] = {p0[t][0] - s.p[t][0], p0[t][1] - s.p[t][1]};
  const double total = solver.b_norm_sq(df, dp);

  bool monotone = true;
  bool bounded = true;
  bool positive = true;
  double worst_growth = 0.0;
  double worst_rate = 0.0;
  for (std::size_t k = 1; k < s.history.size(); ++k) {
    const double b = s.history[k].b_norm_sq;
    positive = positive && b >= 0.0;
    if (k >= 2) {
      const double prev = s.history[k - 1].b_norm_sq;
      const double growth = (b - prev) / std::max(prev, 1e-300);
      worst_growth = std::max(worst_growth, growth);
      if (b > prev * (1.0 + 1e-8)) monotone = false;
    }
    // history[k] holds |mu_k - mu_{k-1}|^2, i.e. n = k - 1 in |mu_{n+1} - mu_n|^2.
    const int n = static_cast<int>(k) - 1;
    if (n >= 10) {
      const double rate = n * b / total;
      worst_rate = std::max(worst_rate, rate);
      if (n * b > 1.1 * total) bounded = false;
    }
  }
  r.passed = monotone && bounded && positive && s.n >= 2;
  r.detail = fmt::format("{} iterations (converged: {}); largest relative B-norm increase {:.3e} (limit 1e-8); "
                         "max n*|dmu_n|^2 / |mu_0 - mu_N|^2 = {:.4f} (limit 1.1); all positive: {}",
                         s.n, s.converged ? "yes" : "no", worst_growth, worst_rate, positive ? "yes" : "no");
  return r;
}

CriterionResult c5_adjoint(const VerifyOptions& o) {
  CriterionResult r{5, "adjoint identity and finite-difference gradient check", false, {}};
  const BenchmarkProblem bp = build_benchmark_problem(4, GammaSpec::parse("bottom"));
  SolverOptions so;
  so.cg_tol = 1e-14;
  const PdeSolver pde(bp.problem, so);
  const std::size_t n = pde.mesh().num_vertices();
  Draws d(o.seed * 7919 + 5, 200000);
  const Observation z0 = pde.trace(pde.solve_state(bp.f_true));
  Observation z = z0;
  for (double& v : z.values) v += 0.1 * d();

  double worst_identity = 0.0;
  for (int k = 0; k < 20; ++k) {
    P1Field f = random_p1(d, n);
    make_compatible(pde, f);
    const P1Field xi = random_p1(d, n);
    const P1Field u = pde.solve_state(f);
    const P1Field ua = pde.solve_adjoint(u, z);
    const P1Field ub = pde.solve_linearized_state(xi);
    const double lhs = pde.boundary_mass().bilinear_form(ub.values, pde.gamma_residual(u, z));
    const double rhs = pde.mass().consistent.bilinear_form(xi.values, ua.values);
    worst_identity = std::max(worst_identity, std::abs(lhs - rhs) / std::max(std::abs(lhs), std::abs(rhs)));
  }

  P1Field f = random_p1(d, n);
  make_compatible(pde, f);
  P1Field xi = random_p1(d, n);
  {
    // Compatible direction: zero lumped mean.
    double tw = 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      tw += pde.mass().lumped[i];
      s += pde.mass().lumped[i] * xi[i];
    }
    for (double& v : xi.values) v -= s / tw;
  }
  const P1Field ua = pde.solve_adjoint(pde.solve_state(f), z);
  const double exact = pde.mass().consistent.bilinear_form(xi.values, ua.values);
  auto misfit_at = [&](double eps) {
    P1Field g = f;
    for (std::size_t i = 0; i < n; ++i) g[i] += eps * xi[i];
    return pde.misfit(pde.solve_state(g), z);
  };
  double err[2];
  const double eps[2] = {1e-3, 1e-4};
  for (int k = 0; k < 2; ++k)
    err[k] = std::abs((misfit_at(eps[k]) - misfit_at(-eps[k])) / (2.0 * eps[k]) - exact) / std::abs(exact);
  const double order = std::log10(err[0] / err[1]);
  // The misfit is quadratic in f, so the central difference has no truncation
  // error; both errors then sit at the solver floor and the order is noise.
  const bool floor = std::max(err[0], err[1]) <= 1e-8;
  const bool fd_ok = order >= 1.9 || floor;
  r.passed = worst_identity <= 1e-8 && fd_ok;
  r.detail = fmt::format("worst relative identity gap {:.3e} over 20 pairs (limit 1e-8); FD relative errors "
                         "{:.3e} (eps 1e-3), {:.3e} (eps 1e-4), observed order {:.2f}{}",
                         worst_identity, err[0], err[1], order,
                         floor ? " (both at round-off: zero truncation error for a quadratic misfit)" : "");
  return r;
}

double fitted_order(const std::vector<double>& h, const std::vector<double>& e) {
  double mx = 0, my = 0;
  const double m = static_cast<double>(h.size());
  for (std::size_t k = 0; k < h.size(); ++k) {
    mx += std::log(h[k]) / m;
    my += std::log(e[k]) / m;
  }
  double sxy = 0, sxx = 0;
  for (std::size_t k = 0; k < h.size(); ++k) {
    sxy += (std::log(h[k]) - mx) * (std::log(e[k]) - my);
    sxx += (std::log(h[k]) - mx) * (std::log(h[k]) - mx);
  }
  return sxy / sxx;
}

CriterionResult c6_fem_convergence() {
  CriterionResult r{6, "finite element convergence orders and exact affine reproduction", false, {}};
  const double pi = std::numbers::pi;
  auto exact = [pi](const Vec2& x) { return std::cos(pi * x[0]) * std::cos(pi * x[1]); };
  auto grad = [pi](const Vec2& x) -> Vec2 {
    return {-pi * std::sin(pi * x[0]) * std::cos(pi * x[1]), -pi * std::cos(pi * x[0]) * std::sin(pi * x[1])};
  };
  std::vector<double> hs, el2, eh1;
  std::ostringstream os;
  for (int level : {4, 8, 16, 32}) {
    ProblemDef prob;
    prob.mesh = TriMesh::structured(level);
    prob.coeffs = CoefficientSet::uniform(prob.mesh, SymMat2{}, 1.0, 0.0, 1.0);
    prob.neumann = NeumannData::zero(prob.mesh);
    prob.gamma = GammaSpec::parse("bottom");
    const PdeSolver pde(prob);
    const P1Field f = interpolate(pde.mesh(), [&](const Vec2& x) { return (2.0 * pi * pi + 1.0) * exact(x); });
    const P1Field u = pde.solve_state(f);
    const ExactErrors e = exact_errors(pde.mesh(), u, exact, grad);
    hs.push_back(pde.mesh().mesh_size());
    el2.push_back(e.l2);
    eh1.push_back(e.h1);
    os << fmt::format("l={} L2={:.4e} H1={:.4e}; ", level, e.l2, e.h1);
  }
  const double p_l2 = fitted_order(hs, el2);
  const double p_h1 = fitted_order(hs, eh1);

  ProblemDef prob;
  prob.mesh = TriMesh::structured(8);
  prob.coeffs = CoefficientSet::uniform(prob.mesh, SymMat2{}, 0.0, 0.0, 1.0);
  prob.neumann = NeumannData::sampled(prob.mesh, [](const Vec2&, Side s) {
    return s == Side::right ? 1.0 : (s == Side::left ? -1.0 : 0.0);
  });
  prob.gamma = GammaSpec::parse("bottom");
  SolverOptions so;
  so.cg_tol = 1e-13;
  const PdeSolver pde(prob, so);
  const P1Field u = pde.solve_state(P1Field(pde.mesh().num_vertices(), 0.0));
  double affine_err = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) affine_err = std::max(affine_err, std::abs(u[i] - pde.mesh().vertices()[i][0]));

  r.passed = p_l2 >= 1.8 && p_h1 >= 0.9 && affine_err <= 1e-9;
  os << fmt::format("fitted orders L2 {:.3f} (need 1.8), H1 {:.3f} (need 0.9); affine max error {:.3e} (limit 1e-9)",
                    p_l2, p_h1, affine_err);
  r.detail = os.str();
  return r;
}

CriterionResult c7_tv_duality(const VerifyOptions& o) {
  CriterionResult r{7, "total variation equals its dual supremum", false, {}};
  const TriMesh mesh = TriMesh::structured(4);
  Draws d(o.seed * 104729 + 11, 100 * (mesh.num_vertices() + 1000 * 2 * mesh.num_triangles()) + 10);
  double worst_gap = 0.0;
  double worst_excess = -1e300;
  for (int k = 0; k < 100; ++k) {
    const P1Field f = random_p1(d, mesh.num_vertices());
    const double tv = tv_value(mesh, f);
    const P0VecField g = elem_gradient(mesh, f);
    const double witness = p0_inner(mesh, g, subgradient_witness(mesh, f).field());
    worst_gap = std::max(worst_gap, std::abs(witness - tv) / std::max(1.0, tv));
    for (int s = 0; s < 1000; ++s) {
      const P0VecField q = random_p0(d, mesh.num_triangles(), 1.0);
      worst_excess = std::max(worst_excess, p0_inner(mesh, g, q) - tv);
    }
  }
  r.passed = worst_gap <= 1e-12 && worst_excess <= 1e-12;
  r.detail = fmt::format("worst witness gap {:.3e} (limit 1e-12); largest sampled pairing minus TV {:.3e} (must be <= 0)",
                         worst_gap, worst_excess);
  return r;
}

CriterionResult c8_constants() {
  CriterionResult r{8, "coercivity, trace and step-size constants", false, {}};
  const double c1 = coercivity_c1(0.1, 2, 4.0);
  const double cg = trace_constant(Rect{});
  PdParams prm;
  prm.rho = 1e-3;
  const StepCertificate cert = certify_steps(prm, 1.0, 0.1, Rect{});
  r.passed = std::abs(c1 - 0.025) <= 1e-12 && std::abs(cg - std::sqrt(3.0)) <= 1e-12 &&
             std::abs(cert.lhs - 50000.0) <= 1e-12 * 50000.0;
  r.detail = fmt::format("c1 = {:.17g}, c_gamma = {:.17g}, lhs = {:.17g}", c1, cg, cert.lhs);
  return r;
}

// Minimizer over [lo, hi] of the 1D quadratic through three samples.
double argmin_quadratic(const std::function<double(double)>& phi, double lo, double hi) {
  const double fm = phi(-1.0), f0 = phi(0.0), fp = phi(1.0);
  const double a = 0.5 * (fp + fm) - f0;
  const double b = 0.5 * (fp - fm);
  if (!(a > 0.0)) throw std::logic_error("oracle objective is not strictly convex");
  return std::clamp(-b / (2.0 * a), lo, hi);
}

CriterionResult c9_prox_oracles(const VerifyOptions& o) {
  CriterionResult r{9, "proximal steps equal per-node and per-triangle brute-force optimizers", false, {}};
  ProblemDef prob;
  prob.mesh = TriMesh::structured(2);
  prob.coeffs = CoefficientSet::uniform(prob.mesh, SymMat2{}, 1.0, 0.0, 1.0);
  prob.neumann = NeumannData::zero(prob.mesh);
  prob.gamma = GammaSpec::parse("bottom");
  prob.box = {-0.5, 0.7};
  const PdeSolver pde(prob);
  const TriMesh& mesh = pde.mesh();
  Draws d(o.seed * 15485863 + 3, 100000);
  double worst_primal = 0.0;
  double worst_dual = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    PdParams prm;
    prm.rho = 0.5 * (d() + 1.0) * 0.9 + 0.05;
    prm.tau = 0.1 + 0.05 * (d() + 1.0);
    prm.theta = 0.2 + 0.1 * (d() + 1.0);
    prm.allow_invalid_certificate = true;
    Observation z = pde.trace(P1Field(mesh.num_vertices(), 0.0));
    const PrimalDualSolver solver(pde, z, prm, 1.0);
    P1Field fn = random_p1(d, mesh.num_vertices());
    for (double& v : fn.values) v = std::clamp(v, prob.box.lower, prob.box.upper);
    const P1Field ua = random_p1(d, mesh.num_vertices());
    const DualBallField pn = project_dual_ball(random_p0(d, mesh.num_triangles(), 1.5));

    const P1Field got = solver.primal_step(fn, pn, ua);
    auto primal_obj = [&](const P1Field& f) {
      double prox = 0.0;
      for (std::size_t i = 0; i < f.size(); ++i) prox += pde.mass().lumped[i] * (f[i] - fn[i]) * (f[i] - fn[i]);
      return pde.mass().consistent.bilinear_form(f.values, ua.values) +
             prm.rho * p0_inner(mesh, elem_gradient(mesh, f), pn.field()) + prox / (2.0 * prm.tau);
    };
    for (std::size_t i = 0; i < fn.size(); ++i) {
      P1Field trial_f = fn;
      const double best = argmin_quadratic(
          [&](double t) {
            trial_f[i] = t;
            return primal_obj(trial_f);
          },
          prob.box.lower, prob.box.upper);
      worst_primal = std::max(worst_primal, std::abs(best - got[i]));
    }

    const P1Field ft = random_p1(d, mesh.num_vertices());
    const DualBallField gotp = solver.dual_step(pn, ft);
    const P0VecField gft = elem_gradient(mesh, ft);
    auto dual_neg_obj = [&](const P0VecField& p) {
      double prox = 0.0;
      for (std::size_t t = 0; t < p.size(); ++t)
        for (int c = 0; c < 2; ++c) prox += mesh.triangles()[t].area * std::pow(p[t][c] - pn[t][c], 2);
      return -(prm.rho * p0_inner(mesh, gft, p) - prm.theta / (2.0 * prm.tau) * prox);
    };
    for (std::size_t t = 0; t < pn.size(); ++t)
      for (int c = 0; c < 2; ++c) {
        P0VecField trial_p = pn.field();
        const double best = argmin_quadratic(
            [&](double s) {
              trial_p[t][c] = s;
              return dual_neg_obj(trial_p);
            },
            -1.0, 1.0);
        worst_dual = std::max(worst_dual, std::abs(best - gotp[t][c]));
      }
  }
  r.passed = worst_primal <= 1e-10 && worst_dual <= 1e-10;
  r.detail = fmt::format("20 random instances on level 2: max primal deviation {:.3e}, max dual deviation {:.3e} "
                         "(limit 1e-10)",
                         worst_primal, worst_dual);
  return r;
}

}  // namespace

ExactErrors exact_errors(const TriMesh& mesh, const P1Field& u, const std::function<double(const Vec2&)>& exact,
                         const std::function<Vec2(const Vec2&)>& exact_grad) {
  // Degree-5 seven-point rule in barycentric coordinates.
  static const double a1 = 0.059715871789770, b1 = 0.470142064105115;
  static const double a2 = 0.797426985353087, b2 = 0.101286507323456;
  static const double w0 = 0.225, w1 = 0.132394152788506, w2 = 0.125939180544827;
  static const double bary[7][3] = {{1.0 / 3, 1.0 / 3, 1.0 / 3}, {a1, b1, b1}, {b1, a1, b1}, {b1, b1, a1},
                                    {a2, b2, b2},                {b2, a2, b2}, {b2, b2, a2}};
  static const double weight[7] = {w0, w1, w1, w1, w2, w2, w2};
  const auto g = elem_gradient(mesh, u);
  double l2 = 0.0, semi = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    for (int q = 0; q < 7; ++q) {
      Vec2 x{0.0, 0.0};
      double uh = 0.0;
      for (int k = 0; k < 3; ++k) {
        const auto& v = mesh.vertices()[tri.v[k]];
        x[0] += bary[q][k] * v[0];
        x[1] += bary[q][k] * v[1];
        uh += bary[q][k] * u[tri.v[k]];
      }
      const Vec2 ge = exact_grad(x);
      const double e = exact(x) - uh;
      l2 += weight[q] * tri.area * e * e;
      semi += weight[q] * tri.area * (std::pow(ge[0] - g[t][0], 2) + std::pow(ge[1] - g[t][1], 2));
    }
  }
  return {std::sqrt(l2), std::sqrt(l2 + semi)};
}

CriterionResult check_criterion(int id, const VerifyOptions& options) {
  switch (id) {
    case 1: return c1_table_columns();
    case 2: return c2_benchmark_trend(options);
    case 3: return c3_noise_magnitude(options);
    case 4: return c4_rate();
    case 5: return c5_adjoint(options);
    case 6: return c6_fem_convergence();
    case 7: return c7_tv_duality(options);
    case 8: return c8_constants();
    case 9: return c9_prox_oracles(options);
    default: throw std::invalid_argument(fmt::format("no criterion {}", id));
  }
}

std::string format_result(const CriterionResult& r) {
  return fmt::format("[{}] criterion {}: {} | {}", r.passed ? "PASS" : "FAIL", r.id, r.title, r.detail);
}

}  // namespace srcid
