#include "srcid/fem.hpp"

#include <cmath>
#include <stdexcept>

#include "srcid/kernels.hpp"
#include "srcid/linalg.hpp"

namespace srcid {

double SymMat2::min_eigenvalue() const {
  const double mean = 0.5 * (a11 + a22);
  const double half_diff = 0.5 * (a11 - a22);
  return mean - std::sqrt(half_diff * half_diff + a12 * a12);
}

CoefficientSet CoefficientSet::sampled(const TriMesh& mesh, const std::function<SymMat2(const Vec2&)>& alpha,
                                       const std::function<double(const Vec2&)>& beta,
                                       const std::function<double(const Vec2&)>& sigma, double alpha_lower) {
  CoefficientSet c;
  c.alpha_lower = alpha_lower;
  c.alpha.reserve(mesh.num_triangles());
  c.beta.reserve(mesh.num_triangles());
  for (Index t = 0; t < static_cast<Index>(mesh.num_triangles()); ++t) {
    const Vec2 x = mesh.centroid(t);
    c.alpha.push_back(alpha(x));
    c.beta.push_back(beta(x));
  }
  const auto& verts = mesh.vertices();
  for (const auto& e : mesh.boundary_edges()) {
    const Vec2 mid{0.5 * (verts[e.v[0]][0] + verts[e.v[1]][0]), 0.5 * (verts[e.v[0]][1] + verts[e.v[1]][1])};
    c.sigma.push_back(sigma(mid));
  }
  c.validate(mesh);
  return c;
}

CoefficientSet CoefficientSet::uniform(const TriMesh& mesh, SymMat2 alpha, double beta, double sigma,
                                       double alpha_lower) {
  CoefficientSet c;
  c.alpha.assign(mesh.num_triangles(), alpha);
  c.beta.assign(mesh.num_triangles(), beta);
  c.sigma.assign(mesh.boundary_edges().size(), sigma);
  c.alpha_lower = alpha_lower;
  c.validate(mesh);
  return c;
}

void CoefficientSet::validate(const TriMesh& mesh) const {
  if (alpha.size() != mesh.num_triangles() || beta.size() != mesh.num_triangles() ||
      sigma.size() != mesh.boundary_edges().size())
    throw std::invalid_argument("coefficient arrays do not match the mesh");
  if (!(alpha_lower > 0.0)) throw std::invalid_argument("ellipticity constant must be positive");
  for (const auto& a : alpha)
    if (a.min_eigenvalue() < alpha_lower * (1.0 - 1e-14))
      throw std::invalid_argument("diffusion matrix violates the ellipticity bound");
  for (double b : beta)
    if (!(b >= 0.0)) throw std::invalid_argument("reaction coefficient must be nonnegative");
  for (double s : sigma)
    if (!(s >= 0.0)) throw std::invalid_argument("Robin coefficient must be nonnegative");
}

bool CoefficientSet::pure_neumann() const {
  for (double b : beta)
    if (b != 0.0) return false;
  for (double s : sigma)
    if (s != 0.0) return false;
  return true;
}

NeumannData NeumannData::zero(const TriMesh& mesh) { return {std::vector<double>(mesh.boundary_edges().size(), 0.0)}; }

NeumannData NeumannData::sampled(const TriMesh& mesh, const std::function<double(const Vec2&, Side)>& j) {
  NeumannData d;
  const auto& verts = mesh.vertices();
  for (const auto& e : mesh.boundary_edges()) {
    const Vec2 mid{0.5 * (verts[e.v[0]][0] + verts[e.v[1]][0]), 0.5 * (verts[e.v[0]][1] + verts[e.v[1]][1])};
    const double value = j(mid, e.side);
    if (!std::isfinite(value)) throw std::invalid_argument("Neumann data must be finite");
    d.per_edge.push_back(value);
  }
  return d;
}

CsrMatrix assemble_stiffness(const TriMesh& mesh, const CoefficientSet& coeffs) {
  coeffs.validate(mesh);
  std::vector<CsrMatrix::Triplet> trip;
  trip.reserve(9 * mesh.num_triangles() + 2 * mesh.boundary_edges().size());
  const auto& tris = mesh.triangles();
  for (std::size_t t = 0; t < tris.size(); ++t) {
    const auto& tri = tris[t];
    const SymMat2& a = coeffs.alpha[t];
    for (int r = 0; r < 3; ++r) {
      const Vec2& gr = tri.grad[r];
      const Vec2 agr{a.a11 * gr[0] + a.a12 * gr[1], a.a12 * gr[0] + a.a22 * gr[1]};
      for (int s = 0; s < 3; ++s) {
        const Vec2& gs = tri.grad[s];
        trip.push_back({tri.v[r], tri.v[s], tri.area * (agr[0] * gs[0] + agr[1] * gs[1])});
      }
      if (coeffs.beta[t] != 0.0) trip.push_back({tri.v[r], tri.v[r], coeffs.beta[t] * tri.area / 3.0});
    }
  }
  const auto& edges = mesh.boundary_edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (coeffs.sigma[e] == 0.0) continue;
    for (Index v : edges[e].v) trip.push_back({v, v, coeffs.sigma[e] * edges[e].length / 2.0});
  }
  return CsrMatrix::from_triplets(static_cast<Index>(mesh.num_vertices()), std::move(trip));
}

CsrMatrix assemble_gradient_gram(const TriMesh& mesh) {
  return assemble_stiffness(mesh, CoefficientSet::uniform(mesh, SymMat2{}, 0.0, 0.0, 1.0));
}

MassMatrices assemble_mass(const TriMesh& mesh) {
  std::vector<CsrMatrix::Triplet> trip;
  trip.reserve(9 * mesh.num_triangles());
  for (const auto& tri : mesh.triangles())
    for (int r = 0; r < 3; ++r)
      for (int s = 0; s < 3; ++s) trip.push_back({tri.v[r], tri.v[s], tri.area * (r == s ? 2.0 : 1.0) / 12.0});
  MassMatrices m{CsrMatrix::from_triplets(static_cast<Index>(mesh.num_vertices()), std::move(trip)), {}};
  m.lumped = m.consistent.row_sums();
  return m;
}

CsrMatrix assemble_boundary_mass(const TriMesh& mesh, const GammaSpec& gamma) {
  if (gamma.empty()) throw std::invalid_argument("observation boundary is empty");
  std::vector<CsrMatrix::Triplet> trip;
  for (const auto& e : mesh.boundary_edges()) {
    if (!gamma.contains(e.side)) continue;
    for (int r = 0; r < 2; ++r)
      for (int s = 0; s < 2; ++s) trip.push_back({e.v[r], e.v[s], e.length * (r == s ? 2.0 : 1.0) / 6.0});
  }
  return CsrMatrix::from_triplets(static_cast<Index>(mesh.num_vertices()), std::move(trip));
}

std::vector<double> neumann_load(const TriMesh& mesh, const NeumannData& j) {
  const auto& edges = mesh.boundary_edges();
  if (j.per_edge.size() != edges.size()) throw std::invalid_argument("Neumann data does not match the mesh");
  std::vector<double> b(mesh.num_vertices(), 0.0);
  for (std::size_t e = 0; e < edges.size(); ++e)
    for (Index v : edges[e].v) b[v] += j.per_edge[e] * edges[e].length / 2.0;
  return b;
}

P0VecField elem_gradient(const TriMesh& mesh, const P1Field& f) {
  if (f.size() != mesh.num_vertices()) throw std::invalid_argument("P1 field does not match the mesh");
  P0VecField g(mesh.num_triangles());
  kernels::elem_gradient(mesh, f.values, g.values);
  return g;
}

std::vector<double> div_adjoint(const TriMesh& mesh, const P0VecField& p) {
  if (p.size() != mesh.num_triangles()) throw std::invalid_argument("P0 field does not match the mesh");
  std::vector<double> v(mesh.num_vertices());
  kernels::div_adjoint(mesh, p.values, v);
  return v;
}

double p0_inner(const TriMesh& mesh, const P0VecField& q, const P0VecField& g) {
  const auto& tris = mesh.triangles();
  double s = 0.0;
  for (std::size_t t = 0; t < tris.size(); ++t) s += tris[t].area * (q[t][0] * g[t][0] + q[t][1] * g[t][1]);
  return s;
}

double grad_operator_norm(const TriMesh& mesh) {
  const CsrMatrix k = assemble_gradient_gram(mesh);
  const MassMatrices m = assemble_mass(mesh);
  return std::sqrt(std::max(0.0, max_generalized_eigenvalue(k, m.lumped, 1e-6)));
}

double l2_norm(const MassMatrices& mass, const P1Field& f) {
  return std::sqrt(std::max(0.0, mass.consistent.quadratic_form(f.values)));
}

double h1_seminorm(const CsrMatrix& gradient_gram, const P1Field& f) {
  return std::sqrt(std::max(0.0, gradient_gram.quadratic_form(f.values)));
}

P1Field interpolate(const TriMesh& mesh, const std::function<double(const Vec2&)>& fn) {
  P1Field f(mesh.num_vertices());
  const auto& verts = mesh.vertices();
  for (std::size_t i = 0; i < verts.size(); ++i) f[i] = fn(verts[i]);
  return f;
}

}  // namespace srcid
