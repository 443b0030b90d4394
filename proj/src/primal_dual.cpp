#include "srcid/primal_dual.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "srcid/fem.hpp"
#include "srcid/kernels.hpp"
#include "srcid/linalg.hpp"

namespace srcid {

void PdParams::validate() const {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw std::invalid_argument("tau must be positive");
  if (!(theta > 0.0) || !std::isfinite(theta)) throw std::invalid_argument("theta must be positive");
  if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("rho must lie in (0, 1)");
  if (max_iter < 0) throw std::invalid_argument("max_iter must be nonnegative");
}

double coercivity_c1(double alpha_lower, int d, double domain_volume) {
  if (!(alpha_lower > 0.0)) throw std::invalid_argument("alpha_lower must be positive");
  if (d <= 0) throw std::invalid_argument("dimension must be positive");
  if (!(domain_volume > 0.0)) throw std::invalid_argument("domain volume must be positive");
  const double k = std::pow(std::sqrt(1.5), (d + 2) / 2.0);
  return alpha_lower / (1.0 + k * std::pow(domain_volume, 1.0 / d));
}

double trace_constant(const Rect& box) {
  const double ends[] = {box.x1_min, box.x1_max, box.x2_min, box.x2_max};
  if (!(box.x1_min < 0.0 && box.x1_max > 0.0 && box.x2_min < 0.0 && box.x2_max > 0.0))
    throw std::invalid_argument("trace constant requires 0 inside the box");
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (double e : ends) {
    lo = std::min(lo, std::abs(e));
    hi = std::max(hi, std::abs(e));
  }
  return std::sqrt((2.0 + hi * hi) / lo);
}

StepCertificate certify_steps(const PdParams& params, double grad_norm, double alpha_lower, const Rect& domain) {
  StepCertificate c;
  c.c1 = coercivity_c1(alpha_lower, 2, domain.area());
  c.c_gamma = trace_constant(domain);
  c.grad_norm = grad_norm;
  const double left = 1.0 / params.tau - (c.c_gamma * c.c_gamma) / (c.c1 * c.c1);
  c.left_factor_positive = left > 0.0;
  c.lhs = left * params.theta / params.tau;
  c.rhs = params.rho * params.rho * grad_norm * grad_norm;
  c.valid = c.left_factor_positive && c.lhs > c.rhs;
  return c;
}

StepCertificate certify_steps(const PdParams& params, const TriMesh& mesh, double alpha_lower) {
  return certify_steps(params, grad_operator_norm(mesh), alpha_lower, mesh.domain());
}

PrimalDualSolver::PrimalDualSolver(const PdeSolver& pde, Observation z, PdParams params,
                                   std::optional<double> grad_norm)
    : pde_(pde), z_(std::move(z)), params_(params) {
  params_.validate();
  const double gn = grad_norm ? *grad_norm : grad_operator_norm(pde_.mesh());
  cert_ = certify_steps(params_, gn, pde_.problem().coeffs.alpha_lower, pde_.mesh().domain());
}

P1Field PrimalDualSolver::project_admissible(const P1Field& y) const {
  const BoxBounds& box = pde_.problem().box;
  P1Field f = y;
  if (!pde_.pure_neumann()) {
    for (double& v : f.values) v = std::clamp(v, box.lower, box.upper);
    return f;
  }
  // Pure Neumann: also enforce sum_i w_i f_i = target. The minimizer of the
  // weighted distance is f_i = clamp(y_i - lambda) for a scalar lambda.
  const auto& w = pde_.mass().lumped;
  const double total_w = std::accumulate(w.begin(), w.end(), 0.0);
  const double target = -pde_.neumann_total();
  const double slack = 1e-12 * total_w * std::max(std::abs(box.lower), std::abs(box.upper));
  if (target < box.lower * total_w - slack || target > box.upper * total_w + slack)
    throw std::invalid_argument("box bounds are incompatible with the Neumann data");
  auto mass_at = [&](double lambda) {
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * std::clamp(y[i] - lambda, box.lower, box.upper);
    return s;
  };
  const auto [ymin, ymax] = std::minmax_element(y.values.begin(), y.values.end());
  double lo = *ymin - box.upper;  // everything clamped to the upper bound
  double hi = *ymax - box.lower;  // everything clamped to the lower bound
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (mass_at(mid) > target)
      lo = mid;
    else
      hi = mid;
  }
  double lambda = 0.5 * (lo + hi);
  // The map is affine on the free set; solve it exactly there.
  double free_w = 0.0;
  double free_wy = 0.0;
  double fixed = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double v = y[i] - lambda;
    if (v <= box.lower)
      fixed += w[i] * box.lower;
    else if (v >= box.upper)
      fixed += w[i] * box.upper;
    else {
      free_w += w[i];
      free_wy += w[i] * y[i];
    }
  }
  if (free_w > 0.0) {
    const double exact = (free_wy + fixed - target) / free_w;
    if (exact >= lo && exact <= hi) lambda = exact;
  }
  for (std::size_t i = 0; i < w.size(); ++i) f[i] = std::clamp(y[i] - lambda, box.lower, box.upper);
  return f;
}

P1Field PrimalDualSolver::primal_step(const P1Field& f, const DualBallField& p, const P1Field& u_adjoint) const {
  const auto& mesh = pde_.mesh();
  const auto& w = pde_.mass().lumped;
  const auto mu = pde_.mass().consistent.multiply(u_adjoint.values);
  const auto div = div_adjoint(mesh, p.field());
  P1Field y(f.size());
  for (std::size_t i = 0; i < f.size(); ++i)
    y[i] = f[i] - params_.tau * (mu[i] + params_.rho * div[i]) / w[i];
  return project_admissible(y);
}

P1Field PrimalDualSolver::extrapolate(const P1Field& f_new, const P1Field& f_old) {
  if (f_new.size() != f_old.size()) throw std::invalid_argument("extrapolate: size mismatch");
  P1Field out(f_new.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = 2.0 * f_new[i] - f_old[i];
  return out;
}

DualBallField PrimalDualSolver::dual_step(const DualBallField& p, const P1Field& f_tilde) const {
  const P0VecField g = elem_gradient(pde_.mesh(), f_tilde);
  const double s = params_.tau * params_.rho / params_.theta;
  P0VecField q = p.field();
  for (std::size_t t = 0; t < q.size(); ++t) {
    q[t][0] += s * g[t][0];
    q[t][1] += s * g[t][1];
  }
  return params_.isotropic_dual ? project_dual_ball_isotropic(q) : project_dual_ball(q);
}

namespace {
double b_norm_parts(const TriMesh& mesh, const PdeSolver& pde, const PdParams& prm, const P1Field& df,
                    const P0VecField& dp, double coupling) {
  const double f_part = kernels::weighted_dot(pde.mass().lumped, df.values, df.values) / prm.tau;
  const double cross = p0_inner(mesh, elem_gradient(mesh, df), dp);
  const double p_part = p0_inner(mesh, dp, dp) * prm.theta / prm.tau;
  return f_part - coupling - 2.0 * prm.rho * cross + p_part;
}
}  // namespace

double PrimalDualSolver::b_norm_sq(const P1Field& df, const P0VecField& dp) const {
  const P1Field ub = pde_.solve_linearized_state(df);
  const double coupling = pde_.boundary_mass().quadratic_form(ub.values);
  return b_norm_parts(pde_.mesh(), pde_, params_, df, dp, coupling);
}

double PrimalDualSolver::b_norm_sq_adjoint_route(const P1Field& df, const P0VecField& dp) const {
  const P1Field ua = pde_.solve_linearized_adjoint(df);
  const double coupling = pde_.mass().consistent.bilinear_form(df.values, ua.values);
  return b_norm_parts(pde_.mesh(), pde_, params_, df, dp, coupling);
}

double PrimalDualSolver::objective(const P1Field& f, const P1Field& u_state) const {
  return pde_.misfit(u_state, z_) + params_.rho * tv_value(pde_.mesh(), f);
}

double PrimalDualSolver::gradient_mapping_norm(const P1Field& f, const DualBallField& p,
                                               const P1Field& u_adjoint) const {
  const P1Field next = primal_step(f, p, u_adjoint);
  P1Field g(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) g[i] = (f[i] - next[i]) / params_.tau;
  return pde_.l2_norm(g);
}

double PrimalDualSolver::tolerance(double g_norm, double g0_norm) const {
  return g_norm - params_.tol_c1 - params_.tol_c2 * g0_norm;
}

void PrimalDualSolver::check_feasible(const P1Field& f, const DualBallField& p, int n) const {
  const BoxBounds& box = pde_.problem().box;
  for (double v : f.values)
    if (!(v >= box.lower && v <= box.upper))
      throw std::logic_error("primal iterate left the box at iteration " + std::to_string(n));
  if (!(p.field().max_abs() <= 1.0))
    throw std::logic_error("dual iterate left the unit ball at iteration " + std::to_string(n));
}

PdState PrimalDualSolver::run(std::optional<P1Field> f0, std::optional<DualBallField> p0) const {
  if (!cert_.valid && !params_.allow_invalid_certificate)
    throw std::invalid_argument("step sizes violate the convergence condition (lhs " + std::to_string(cert_.lhs) +
                                ", rhs " + std::to_string(cert_.rhs) + ")");
  const auto& mesh = pde_.mesh();
  PdState s;
  s.f = project_admissible(f0 ? *f0 : P1Field(mesh.num_vertices(), 1.0));
  s.p = p0 ? *p0 : DualBallField::constant(mesh, {0.5, 0.5});
  if (s.f.size() != mesh.num_vertices() || s.p.size() != mesh.num_triangles())
    throw std::invalid_argument("initial iterate does not match the mesh");
  check_feasible(s.f, s.p, 0);

  P1Field ua;
  auto solve_pair = [&](int n, const P1Field* u_guess, const P1Field* ua_guess) {
    try {
      s.u = pde_.solve_state(s.f, std::nullopt, u_guess);
      ua = pde_.solve_adjoint(s.u, z_, std::nullopt, ua_guess);
    } catch (const SolveError& e) {
      throw SolveError("primal-dual iteration " + std::to_string(n) + ": " + e.what(), e.report());
    }
  };
  solve_pair(0, nullptr, nullptr);
  const double g0 = gradient_mapping_norm(s.f, s.p, ua);
  double tol = tolerance(g0, g0);
  s.history.push_back({0, objective(s.f, s.u), tol, std::numeric_limits<double>::quiet_NaN()});

  while (tol > 0.0 && s.n < params_.max_iter) {
    P1Field f_new = primal_step(s.f, s.p, ua);
    DualBallField p_new = dual_step(s.p, extrapolate(f_new, s.f));
    double b = std::numeric_limits<double>::quiet_NaN();
    if (params_.track_b_norm) {
      P1Field df(f_new.size());
      for (std::size_t i = 0; i < df.size(); ++i) df[i] = f_new[i] - s.f[i];
      P0VecField dp(p_new.size());
      for (std::size_t t = 0; t < dp.size(); ++t)
        dp[t] = {p_new[t][0] - s.p[t][0], p_new[t][1] - s.p[t][1]};
      b = b_norm_sq(df, dp);
    }
    s.f = std::move(f_new);
    s.p = std::move(p_new);
    ++s.n;
    check_feasible(s.f, s.p, s.n);
    const P1Field u_prev = s.u;
    const P1Field ua_prev = ua;
    solve_pair(s.n, &u_prev, &ua_prev);
    tol = tolerance(gradient_mapping_norm(s.f, s.p, ua), g0);
    s.history.push_back({s.n, objective(s.f, s.u), tol, b});
  }
  s.converged = tol <= 0.0;
  return s;
}

double benchmark_mesh_size(int level) {
  if (level < 1) throw std::invalid_argument("level must be positive");
  return std::sqrt(8.0) / level;
}

double CouplingRules::rho(double h) const { return rho_coef * std::sqrt(h); }

double CouplingRules::noise(double h) const { return noise_coef * h * std::sqrt(rho(h)); }

PdParams CouplingRules::apply(PdParams base, double h) const {
  base.rho = rho(h);
  base.tol_c1 = tol_c1_coef * std::sqrt(h);
  base.tol_c2 = tol_c2_coef * std::sqrt(h);
  return base;
}

std::vector<LevelResult> multilevel_run(const std::vector<int>& levels,
                                        const std::function<LevelProblem(int)>& factory,
                                        const std::function<void(const LevelResult&)>& on_level) {
  if (levels.empty()) throw std::invalid_argument("no levels given");
  for (std::size_t k = 1; k < levels.size(); ++k)
    if (levels[k] != 2 * levels[k - 1]) throw std::invalid_argument("levels must double");
  std::vector<LevelResult> out;
  for (int level : levels) {
    LevelResult r;
    r.level = level;
    r.problem = factory(level);
    const PrimalDualSolver solver(*r.problem.pde, r.problem.z, r.problem.params);
    r.certificate = solver.certificate();
    std::optional<P1Field> f0;
    std::optional<DualBallField> p0;
    if (!out.empty()) {
      const auto& prev = out.back();
      const TriMesh& coarse = prev.problem.pde->mesh();
      const TriMesh& fine = r.problem.pde->mesh();
      f0 = prolong_p1(prev.state.f, coarse, fine);
      p0 = DualBallField::certify(prolong_p0(prev.state.p.field(), coarse, fine));
    }
    try {
      r.state = solver.run(std::move(f0), std::move(p0));
    } catch (const SolveError& e) {
      throw SolveError("level " + std::to_string(level) + ": " + e.what(), e.report());
    }
    out.push_back(std::move(r));
    if (on_level) on_level(out.back());
  }
  return out;
}

}  // namespace srcid
