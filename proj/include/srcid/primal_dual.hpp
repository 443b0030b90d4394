#pragma once

// Linearized primal-dual iteration for
//   min_{f in F_ad} 1/2 ||u(f) - z||^2_Gamma + rho TV(f)
// with the box-constrained admissible set F_ad (intersected with the
// compatibility hyperplane in the pure Neumann case).

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "srcid/fields.hpp"
#include "srcid/mesh.hpp"
#include "srcid/pde.hpp"
#include "srcid/tv.hpp"

namespace srcid {

struct PdParams {
  double tau = 2e-4;
  double theta = 5e-2;
  double rho = 0.0;
  int max_iter = 600;
  double tol_c1 = 0.0;
  double tol_c2 = 0.0;
  bool isotropic_dual = false;
  /// Run even when the step-size certificate fails.
  bool allow_invalid_certificate = false;
  /// Record the B-norm of successive differences (one extra solve per iteration).
  bool track_b_norm = true;

  /// Throws std::invalid_argument unless tau, theta > 0, rho in (0, 1), max_iter >= 0.
  void validate() const;
};

struct StepCertificate {
  double c1 = 0.0;
  double c_gamma = 0.0;
  double grad_norm = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  /// False when 1/tau <= c_gamma^2 / c1^2.
  bool left_factor_positive = false;
  bool valid = false;
};

/// alpha_lower / (1 + sqrt(3/2)^((d+2)/2) |Omega|^(1/d))
double coercivity_c1(double alpha_lower, int d, double domain_volume);
/// sqrt((d + hbar_max^2) / hbar_min) over the endpoints of a box containing 0.
double trace_constant(const Rect& box);
StepCertificate certify_steps(const PdParams& params, double grad_norm, double alpha_lower, const Rect& domain);
StepCertificate certify_steps(const PdParams& params, const TriMesh& mesh, double alpha_lower);

struct IterationRecord {
  int n = 0;
  double objective = 0.0;
  double tolerance = 0.0;
  /// B-norm squared of (mu_n - mu_{n-1}); NaN for n = 0 or when not tracked.
  double b_norm_sq = 0.0;
};

struct PdState {
  P1Field f;
  DualBallField p;
  int n = 0;
  bool converged = false;
  std::vector<IterationRecord> history;
  P1Field u;  // state at f
};

class PrimalDualSolver {
 public:
  /// Validates parameters and certifies the step sizes (the gradient norm is
  /// computed unless supplied).
  PrimalDualSolver(const PdeSolver& pde, Observation z, PdParams params,
                   std::optional<double> grad_norm = std::nullopt);

  [[nodiscard]] const StepCertificate& certificate() const { return cert_; }
  [[nodiscard]] const PdParams& params() const { return params_; }
  [[nodiscard]] const Observation& observation() const { return z_; }

  /// Lumped-L2 projection onto F_ad.
  [[nodiscard]] P1Field project_admissible(const P1Field& y) const;
  /// Proximal step f_{n+1} = P(f_n - tau W^{-1}(M u_a + rho grad^T p_n)), the minimizer of
  /// (f, u_a) + rho (grad f, p_n) + |f - f_n|^2_W / (2 tau) over F_ad.
  [[nodiscard]] P1Field primal_step(const P1Field& f, const DualBallField& p, const P1Field& u_adjoint) const;
  [[nodiscard]] static P1Field extrapolate(const P1Field& f_new, const P1Field& f_old);
  [[nodiscard]] DualBallField dual_step(const DualBallField& p, const P1Field& f_tilde) const;
  /// (1/tau)|df|^2_W - |u'(df)|^2_Gamma - 2 rho (grad df, dp) + (theta/tau)|dp|^2
  [[nodiscard]] double b_norm_sq(const P1Field& df, const P0VecField& dp) const;
  /// Same value with the middle term evaluated as (df, M u_a'(df)) through an adjoint solve.
  [[nodiscard]] double b_norm_sq_adjoint_route(const P1Field& df, const P0VecField& dp) const;
  [[nodiscard]] double objective(const P1Field& f, const P1Field& u_state) const;
  /// L2 norm of (1/tau)(f - primal_step(f, p, u_a)).
  [[nodiscard]] double gradient_mapping_norm(const P1Field& f, const DualBallField& p,
                                             const P1Field& u_adjoint) const;
  [[nodiscard]] double tolerance(double g_norm, double g0_norm) const;

  /// Default start: f = 1 (projected onto F_ad), p = (1/2, 1/2).
  [[nodiscard]] PdState run(std::optional<P1Field> f0 = std::nullopt,
                            std::optional<DualBallField> p0 = std::nullopt) const;

 private:
  void check_feasible(const P1Field& f, const DualBallField& p, int n) const;

  const PdeSolver& pde_;
  Observation z_;
  PdParams params_;
  StepCertificate cert_;
};

/// Mesh size sqrt(8)/level of the structured mesh of (-1, 1)^2.
double benchmark_mesh_size(int level);

struct CouplingRules {
  double rho_coef = 1e-3;
  double noise_coef = 1.0;
  double tol_c1_coef = 1e-5;
  double tol_c2_coef = 1e-4;

  [[nodiscard]] double rho(double h) const;
  /// theta_l = c h rho^(1/2)
  [[nodiscard]] double noise(double h) const;
  /// Fills rho and the stopping constants for mesh size h.
  [[nodiscard]] PdParams apply(PdParams base, double h) const;
};

struct LevelProblem {
  std::shared_ptr<const PdeSolver> pde;
  Observation z;
  PdParams params;
};

struct LevelResult {
  int level = 0;
  LevelProblem problem;
  StepCertificate certificate;
  PdState state;
};

/// Runs the levels in order, warm-starting each from the prolonged final iterate
/// of the previous one. Levels must double. `on_level` sees each result as soon
/// as it is available.
std::vector<LevelResult> multilevel_run(const std::vector<int>& levels,
                                        const std::function<LevelProblem(int)>& factory,
                                        const std::function<void(const LevelResult&)>& on_level = {});

}  // namespace srcid
