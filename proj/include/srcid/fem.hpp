#pragma once

// P1/P0 finite element operators on a TriMesh.

#include <functional>
#include <vector>

#include "srcid/csr_matrix.hpp"
#include "srcid/mesh.hpp"

namespace srcid {

struct SymMat2 {
  double a11 = 1.0;
  double a12 = 0.0;
  double a22 = 1.0;

  [[nodiscard]] double min_eigenvalue() const;
};

/// Coefficients of a(u, v) = (alpha grad u, grad v) + (beta u, v) + (sigma u, v)_boundary.
/// alpha and beta are constant per triangle, sigma per boundary edge.
struct CoefficientSet {
  std::vector<SymMat2> alpha;
  std::vector<double> beta;
  std::vector<double> sigma;
  double alpha_lower = 1.0;

  /// Samples alpha and beta at triangle centroids and sigma at edge midpoints,
  /// then validates.
  static CoefficientSet sampled(const TriMesh& mesh, const std::function<SymMat2(const Vec2&)>& alpha,
                                const std::function<double(const Vec2&)>& beta,
                                const std::function<double(const Vec2&)>& sigma, double alpha_lower);
  static CoefficientSet uniform(const TriMesh& mesh, SymMat2 alpha, double beta, double sigma,
                                double alpha_lower);

  /// Throws std::invalid_argument on sizes or ellipticity/sign violations.
  void validate(const TriMesh& mesh) const;
  /// True when beta and sigma vanish identically.
  [[nodiscard]] bool pure_neumann() const;
};

/// Piecewise-constant Neumann flux j, one value per boundary edge.
struct NeumannData {
  std::vector<double> per_edge;

  static NeumannData zero(const TriMesh& mesh);
  /// Samples j at edge midpoints.
  static NeumannData sampled(const TriMesh& mesh, const std::function<double(const Vec2&, Side)>& j);
};

struct MassMatrices {
  CsrMatrix consistent;
  std::vector<double> lumped;  // row sums of `consistent`
};

CsrMatrix assemble_stiffness(const TriMesh& mesh, const CoefficientSet& coeffs);
/// (grad u, grad v) with the identity diffusion and no lower-order terms.
CsrMatrix assemble_gradient_gram(const TriMesh& mesh);
MassMatrices assemble_mass(const TriMesh& mesh);
CsrMatrix assemble_boundary_mass(const TriMesh& mesh, const GammaSpec& gamma);
std::vector<double> neumann_load(const TriMesh& mesh, const NeumannData& j);

P0VecField elem_gradient(const TriMesh& mesh, const P1Field& f);
/// v_i = (grad phi_i, p) so that v . G = (grad g, p) for every nodal vector G.
std::vector<double> div_adjoint(const TriMesh& mesh, const P0VecField& p);
/// (q, g) = sum_T |T| q_T . g_T
double p0_inner(const TriMesh& mesh, const P0VecField& q, const P0VecField& g);

/// sup over nonzero v of ||grad v|| / ||v|| in the lumped L2 inner product.
double grad_operator_norm(const TriMesh& mesh);

/// L2 and H1 norms of P1 fields with exact (consistent) quadrature.
double l2_norm(const MassMatrices& mass, const P1Field& f);
double h1_seminorm(const CsrMatrix& gradient_gram, const P1Field& f);

P1Field interpolate(const TriMesh& mesh, const std::function<double(const Vec2&)>& fn);

}  // namespace srcid
