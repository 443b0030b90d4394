#include "srcid/pde.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "srcid/kernels.hpp"
#include "srcid/linalg.hpp"

namespace srcid {

void ProblemDef::validate() const {
  coeffs.validate(mesh);
  if (neumann.per_edge.size() != mesh.boundary_edges().size())
    throw std::invalid_argument("Neumann data does not match the mesh");
  if (gamma.empty()) throw std::invalid_argument("observation boundary is empty");
  if (!std::isfinite(box.lower) || !std::isfinite(box.upper) || !(box.lower < box.upper))
    throw std::invalid_argument("box bounds must be finite with lower < upper");
}

PdeSolver::PdeSolver(ProblemDef problem, SolverOptions options)
    : problem_(std::move(problem)), options_(options) {
  problem_.validate();
  pure_neumann_ = problem_.pure_neumann();
  stiffness_ = assemble_stiffness(problem_.mesh, problem_.coeffs);
  mass_ = assemble_mass(problem_.mesh);
  boundary_mass_ = assemble_boundary_mass(problem_.mesh, problem_.gamma);
  gradient_gram_ = assemble_gradient_gram(problem_.mesh);
  neumann_ = neumann_load(problem_.mesh, problem_.neumann);
  gamma_nodes_ = problem_.mesh.gamma_nodes(problem_.gamma);
  lumped_total_ = std::accumulate(mass_.lumped.begin(), mass_.lumped.end(), 0.0);
}

double PdeSolver::neumann_total() const { return std::accumulate(neumann_.begin(), neumann_.end(), 0.0); }

double PdeSolver::compatibility_residual(const P1Field& f) const {
  return kernels::dot(mass_.lumped, f.values) + neumann_total();
}

P1Field PdeSolver::solve(std::vector<double> load, bool strict, double tol, const P1Field* guess) const {
  CgOptions opt;
  opt.tol = tol;
  opt.max_iter = options_.max_iter;
  if (pure_neumann_) {
    const double total = std::accumulate(load.begin(), load.end(), 0.0);
    double l1 = 0.0;
    for (double v : load) l1 += std::abs(v);
    if (strict && std::abs(total) > options_.compat_tol * l1)
      throw CompatibilityError("pure Neumann load violates the compatibility condition (residual " +
                               std::to_string(total) + ")");
    for (std::size_t i = 0; i < load.size(); ++i) load[i] -= total * mass_.lumped[i] / lumped_total_;
    opt.deflate_mean = true;
    opt.weights = mass_.lumped;
    opt.compat_tol = 1e-10;
  }
  std::span<const double> x0;
  if (guess != nullptr) x0 = guess->values;
  return P1Field(cg_solve(stiffness_, load, opt, x0).x);
}

P1Field PdeSolver::solve_state(const P1Field& f, std::optional<double> tol, const P1Field* guess) const {
  if (f.size() != mesh().num_vertices()) throw std::invalid_argument("source does not match the mesh");
  std::vector<double> load = mass_.consistent.multiply(f.values);
  for (std::size_t i = 0; i < load.size(); ++i) load[i] += neumann_[i];
  return solve(std::move(load), true, tol.value_or(options_.cg_tol), guess);
}

P1Field PdeSolver::solve_linearized_state(const P1Field& xi) const {
  if (xi.size() != mesh().num_vertices()) throw std::invalid_argument("direction does not match the mesh");
  return solve(mass_.consistent.multiply(xi.values), false, options_.cg_tol, nullptr);
}

P1Field PdeSolver::solve_adjoint(const P1Field& u_state, const Observation& z, std::optional<double> tol,
                                 const P1Field* guess) const {
  const auto r = gamma_residual(u_state, z);
  return solve(boundary_mass_.multiply(r), false, tol.value_or(options_.cg_tol), guess);
}

P1Field PdeSolver::solve_linearized_adjoint(const P1Field& xi) const {
  const P1Field u_bar = solve_linearized_state(xi);
  return solve(boundary_mass_.multiply(u_bar.values), false, options_.cg_tol, nullptr);
}

P1Field PdeSolver::solve_dirichlet(const P1Field& f, const std::vector<double>& boundary_values,
                                   std::optional<double> tol) const {
  const auto boundary = mesh().boundary_nodes();
  if (boundary_values.size() != boundary.size())
    throw std::invalid_argument("Dirichlet data must give one value per boundary node");
  const auto n = mesh().num_vertices();
  std::vector<char> fixed(n, 0);
  std::vector<double> g(n, 0.0);
  for (std::size_t k = 0; k < boundary.size(); ++k) {
    fixed[boundary[k]] = 1;
    g[boundary[k]] = boundary_values[k];
  }
  std::vector<Index> interior;
  for (std::size_t i = 0; i < n; ++i)
    if (!fixed[i]) interior.push_back(static_cast<Index>(i));
  P1Field u(g);
  if (interior.empty()) return u;

  const auto mf = mass_.consistent.multiply(f.values);
  const auto kg = stiffness_.multiply(g);
  std::vector<double> rhs(interior.size());
  for (std::size_t r = 0; r < interior.size(); ++r) rhs[r] = mf[interior[r]] - kg[interior[r]];
  const CsrMatrix k_ii = stiffness_.principal_submatrix(interior);
  CgOptions opt;
  opt.tol = tol.value_or(options_.cg_tol);
  opt.max_iter = options_.max_iter;
  const auto x = cg_solve(k_ii, rhs, opt).x;
  for (std::size_t r = 0; r < interior.size(); ++r) u[interior[r]] = x[r];
  return u;
}

Observation PdeSolver::trace(const P1Field& u) const {
  Observation z;
  z.nodes = gamma_nodes_;
  for (Index i : gamma_nodes_) z.values.push_back(u[i]);
  return z;
}

std::vector<double> PdeSolver::gamma_residual(const P1Field& u, const Observation& z) const {
  if (z.nodes.size() != z.values.size()) throw std::invalid_argument("malformed observation");
  std::vector<double> r(mesh().num_vertices(), 0.0);
  for (std::size_t k = 0; k < z.nodes.size(); ++k) r[z.nodes[k]] = u[z.nodes[k]] - z.values[k];
  return r;
}

double PdeSolver::misfit(const P1Field& u, const Observation& z) const {
  return 0.5 * boundary_mass_.quadratic_form(gamma_residual(u, z));
}

double PdeSolver::l2_norm(const P1Field& f) const { return srcid::l2_norm(mass_, f); }

double PdeSolver::h1_norm(const P1Field& f) const {
  const double l2 = l2_norm(f);
  const double semi = h1_seminorm(gradient_gram_, f);
  return std::sqrt(l2 * l2 + semi * semi);
}

}  // namespace srcid
