#pragma once

// State, adjoint and Dirichlet solves for
//   -div(alpha grad u) + beta u = f  in the domain,
//   alpha grad u . n + sigma u = j   on the boundary,
// discretized with P1 elements. When beta and sigma vanish the problem is the
// pure Neumann one: solutions are normalized to zero mean and a source must
// satisfy (f, 1) + (j, 1)_boundary = 0.

#include <optional>
#include <stdexcept>
#include <vector>

#include "srcid/csr_matrix.hpp"
#include "srcid/fem.hpp"
#include "srcid/mesh.hpp"

namespace srcid {

struct BoxBounds {
  double lower = -1.0;
  double upper = 3.0;
};

struct ProblemDef {
  TriMesh mesh;
  CoefficientSet coeffs;
  NeumannData neumann;
  GammaSpec gamma;
  BoxBounds box;

  [[nodiscard]] bool pure_neumann() const { return coeffs.pure_neumann(); }
  void validate() const;
};

/// Boundary data z at the observation nodes, plus its noise level in L2(Gamma).
struct Observation {
  std::vector<Index> nodes;
  std::vector<double> values;
  double noise_level = 0.0;
};

/// Raised when a pure Neumann source violates the compatibility condition.
class CompatibilityError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct SolverOptions {
  double cg_tol = 1e-10;
  int max_iter = 20000;
  double compat_tol = 1e-8;
};

class PdeSolver {
 public:
  explicit PdeSolver(ProblemDef problem, SolverOptions options = {});

  [[nodiscard]] const ProblemDef& problem() const { return problem_; }
  [[nodiscard]] const TriMesh& mesh() const { return problem_.mesh; }
  [[nodiscard]] const SolverOptions& options() const { return options_; }
  [[nodiscard]] bool pure_neumann() const { return pure_neumann_; }
  [[nodiscard]] const CsrMatrix& stiffness() const { return stiffness_; }
  [[nodiscard]] const MassMatrices& mass() const { return mass_; }
  [[nodiscard]] const CsrMatrix& boundary_mass() const { return boundary_mass_; }
  [[nodiscard]] const CsrMatrix& gradient_gram() const { return gradient_gram_; }
  [[nodiscard]] const std::vector<double>& neumann_vector() const { return neumann_; }
  [[nodiscard]] const std::vector<Index>& gamma_nodes() const { return gamma_nodes_; }
  /// (f, 1) + sum over edges of j_e |e|; the value the source must cancel in the pure Neumann case.
  [[nodiscard]] double neumann_total() const;

  [[nodiscard]] double compatibility_residual(const P1Field& f) const;

  /// u with a(u, v) = (f, v) + [j, v] for all v. Throws CompatibilityError for
  /// an incompatible pure Neumann source.
  [[nodiscard]] P1Field solve_state(const P1Field& f, std::optional<double> tol = {},
                                    const P1Field* guess = nullptr) const;
  /// Derivative of the state in direction xi (zero Neumann data). In the pure
  /// Neumann case the load is projected onto the zero-mean complement.
  [[nodiscard]] P1Field solve_linearized_state(const P1Field& xi) const;
  /// u_a with a(u_a, v) = (u - z, v)_Gamma, load projected as above when singular.
  [[nodiscard]] P1Field solve_adjoint(const P1Field& u_state, const Observation& z,
                                      std::optional<double> tol = {}, const P1Field* guess = nullptr) const;
  /// a(w, v) = (solve_linearized_state(xi), v)_Gamma
  [[nodiscard]] P1Field solve_linearized_adjoint(const P1Field& xi) const;
  /// Dirichlet problem with the alpha-stiffness; boundary_values aligned with mesh().boundary_nodes().
  [[nodiscard]] P1Field solve_dirichlet(const P1Field& f, const std::vector<double>& boundary_values,
                                        std::optional<double> tol = {}) const;

  [[nodiscard]] Observation trace(const P1Field& u) const;
  /// Full-length vector holding u - z on Gamma nodes and zero elsewhere.
  [[nodiscard]] std::vector<double> gamma_residual(const P1Field& u, const Observation& z) const;
  /// 1/2 ||u - z||^2_Gamma
  [[nodiscard]] double misfit(const P1Field& u, const Observation& z) const;
  [[nodiscard]] double l2_norm(const P1Field& f) const;
  [[nodiscard]] double h1_norm(const P1Field& f) const;

 private:
  [[nodiscard]] P1Field solve(std::vector<double> load, bool strict, double tol, const P1Field* guess) const;

  ProblemDef problem_;
  SolverOptions options_;
  bool pure_neumann_;
  CsrMatrix stiffness_;
  MassMatrices mass_;
  CsrMatrix boundary_mass_;
  CsrMatrix gradient_gram_;
  std::vector<double> neumann_;
  std::vector<Index> gamma_nodes_;
  double lumped_total_;
};

}  // namespace srcid
