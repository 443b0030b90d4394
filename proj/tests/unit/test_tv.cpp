#include <cmath>

#include "doctest.h"
#include "srcid/fem.hpp"
#include "srcid/tv.hpp"
#include "support/oracles.hpp"

using namespace srcid;

namespace {
P1Field affine(const TriMesh& m, double a, double b) {
  P1Field f(m.num_vertices());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = a * m.vertices()[i][0] + b * m.vertices()[i][1];
  return f;
}
}  // namespace

TEST_CASE("tv of simple fields") {
  for (int level : {1, 3, 8}) {
    const auto m = TriMesh::structured(level);
    CHECK(tv_value(m, P1Field(m.num_vertices(), 3.0)) == 0.0);
    CHECK(tv_value(m, affine(m, 1.0, 0.0)) == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(tv_value(m, affine(m, 1.0, 1.0)) == doctest::Approx(8.0).epsilon(1e-14));
  }
}

TEST_CASE("subgradient witness") {
  const auto m = TriMesh::structured(4);
  // The flat component may carry any sign in [-1, 1].
  const auto wx = subgradient_witness(m, affine(m, 1.0, 0.0));
  for (const auto& v : wx.field().values) {
    CHECK(v[0] == 1.0);
    CHECK(std::abs(v[1]) <= 1.0);
  }
  const auto wy = subgradient_witness(m, affine(m, 0.0, -1.0));
  for (const auto& v : wy.field().values) CHECK(v[1] == -1.0);
  oracle::Rng rng(1);
  for (int k = 0; k < 20; ++k) {
    const auto f = rng.p1(m.num_vertices());
    const double pairing = p0_inner(m, elem_gradient(m, f), subgradient_witness(m, f).field());
    CHECK(std::abs(pairing - tv_value(m, f)) <= 1e-12);
  }
}

TEST_CASE("dual ball projection") {
  P0VecField p(3);
  p[0] = {0.5, -1.0};
  p[1] = {2.5, -7.0};
  p[2] = {0.0, 1.0};
  const auto q = project_dual_ball(p);
  CHECK(q[0] == Vec2{0.5, -1.0});
  CHECK(q[1] == Vec2{1.0, -1.0});
  CHECK(q[2] == Vec2{0.0, 1.0});
  const auto iso = project_dual_ball_isotropic(p);
  CHECK(std::hypot(iso[1][0], iso[1][1]) == doctest::Approx(1.0));
  CHECK(iso[0][0] == doctest::Approx(0.5 / std::hypot(0.5, 1.0)));
  CHECK_THROWS(DualBallField::certify(p));
  CHECK_NOTHROW(DualBallField::certify(q.field()));
}

TEST_CASE("projection is the nearest point of the ball in the area-weighted metric") {
  const auto m = TriMesh::structured(3);
  oracle::Rng rng(6);
  const auto p = rng.p0(m.num_triangles(), 3.0);
  const auto q = project_dual_ball(p);
  for (std::size_t t = 0; t < p.size(); ++t)
    for (int c = 0; c < 2; ++c) {
      // Brute force over a grid of [-1, 1] per component.
      const double area = m.triangles()[t].area;
      double best = 0.0, best_val = 1e300;
      for (int s = 0; s <= 20000; ++s) {
        const double x = -1.0 + s * 1e-4;
        const double val = area * (x - p[t][c]) * (x - p[t][c]);
        if (val < best_val) {
          best_val = val;
          best = x;
        }
      }
      CHECK(std::abs(best - q[t][c]) <= 1e-4);
    }
}

TEST_CASE("tv duality and properties on random fields") {
  const auto m = TriMesh::structured(4);
  oracle::Rng rng(42);
  for (int k = 0; k < 100; ++k) {
    const auto f = rng.p1(m.num_vertices());
    const auto g = rng.p1(m.num_vertices());
    const double tv = tv_value(m, f);
    const auto grad = elem_gradient(m, f);
    const auto witness = subgradient_witness(m, f);
    for (int s = 0; s < 100; ++s) {
      const auto q = rng.p0(m.num_triangles());
      CHECK(p0_inner(m, grad, q) <= tv + 1e-12);
      // First-order condition of the witness.
      P0VecField d(q.size());
      for (std::size_t t = 0; t < q.size(); ++t) d[t] = {q[t][0] - witness[t][0], q[t][1] - witness[t][1]};
      CHECK(p0_inner(m, grad, d) <= 1e-12);
    }
    const double c = rng.uniform(-5.0, 5.0);
    P1Field cf = f;
    for (double& v : cf.values) v *= c;
    CHECK(std::abs(tv_value(m, cf) - std::abs(c) * tv) <= 1e-12 * (1.0 + std::abs(c) * tv));
    P1Field sum = f;
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += g[i];
    CHECK(tv_value(m, sum) <= tv + tv_value(m, g) + 1e-12);
  }
}
