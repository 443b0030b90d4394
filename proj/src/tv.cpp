#include "srcid/tv.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "srcid/fem.hpp"

namespace srcid {

DualBallField DualBallField::certify(P0VecField p) {
  for (std::size_t t = 0; t < p.size(); ++t)
    for (double c : p[t])
      if (!(std::abs(c) <= 1.0))
        throw std::invalid_argument("dual field leaves the unit ball on triangle " + std::to_string(t));
  return DualBallField(std::move(p));
}

DualBallField DualBallField::constant(const TriMesh& mesh, Vec2 value) {
  return certify(P0VecField(mesh.num_triangles(), value));
}

double tv_value(const TriMesh& mesh, const P1Field& f) {
  const P0VecField g = elem_gradient(mesh, f);
  const auto& tris = mesh.triangles();
  double sum = 0.0;
  for (std::size_t t = 0; t < tris.size(); ++t) sum += tris[t].area * (std::abs(g[t][0]) + std::abs(g[t][1]));
  return sum;
}

DualBallField subgradient_witness(const TriMesh& mesh, const P1Field& f) {
  P0VecField g = elem_gradient(mesh, f);
  for (auto& v : g.values)
    for (double& c : v) c = c > 0.0 ? 1.0 : (c < 0.0 ? -1.0 : 0.0);
  return DualBallField::certify(std::move(g));
}

DualBallField project_dual_ball(const P0VecField& p) {
  P0VecField q = p;
  for (auto& v : q.values)
    for (double& c : v) c = std::clamp(c, -1.0, 1.0);
  return DualBallField(std::move(q));
}

DualBallField project_dual_ball_isotropic(const P0VecField& p) {
  P0VecField q = p;
  for (auto& v : q.values) {
    const double scale = std::max(1.0, std::hypot(v[0], v[1]));
    v[0] /= scale;
    v[1] /= scale;
    // Guard against 1 + ulp after division.
    v[0] = std::clamp(v[0], -1.0, 1.0);
    v[1] = std::clamp(v[1], -1.0, 1.0);
  }
  return DualBallField(std::move(q));
}

}  // namespace srcid
