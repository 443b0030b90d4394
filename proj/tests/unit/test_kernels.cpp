#include <cmath>

#include "doctest.h"
#include "srcid/fem.hpp"
#include "srcid/kernels.hpp"
#include "support/oracles.hpp"

using namespace srcid;

namespace {
struct ParallelGuard {
  bool saved = kernels::parallel_enabled();
  ~ParallelGuard() { kernels::set_parallel(saved); }
};
}  // namespace

TEST_CASE("omp kernels agree with the serial reference") {
  for (int level : {3, 17, 64}) {
    const auto m = TriMesh::structured(level);
    const auto k = assemble_stiffness(m, CoefficientSet::uniform(m, SymMat2{2.0, 0.3, 1.0}, 0.5, 0.1, 0.5));
    oracle::Rng rng(level);
    const auto x = rng.p1(m.num_vertices()).values;
    const auto y0 = rng.p1(m.num_vertices()).values;
    const auto w = rng.p1(m.num_vertices(), 0.1, 1.0).values;

    std::vector<double> s(x.size()), p(x.size());
    kernels::serial::spmv(k, x, s);
    kernels::omp::spmv(k, x, p);
    CHECK(s == p);  // row-parallel, same summation order per row

    CHECK(kernels::omp::dot(x, y0) == doctest::Approx(kernels::serial::dot(x, y0)).epsilon(1e-13));
    CHECK(kernels::omp::weighted_dot(w, x, y0) ==
          doctest::Approx(kernels::serial::weighted_dot(w, x, y0)).epsilon(1e-13));

    auto a1 = y0, a2 = y0;
    kernels::serial::axpy(0.7, x, a1);
    kernels::omp::axpy(0.7, x, a2);
    CHECK(a1 == a2);

    std::vector<Vec2> g1(m.num_triangles()), g2(m.num_triangles());
    kernels::serial::elem_gradient(m, x, g1);
    kernels::omp::elem_gradient(m, x, g2);
    CHECK(g1 == g2);

    const auto pf = rng.p0(m.num_triangles());
    std::vector<double> d1(x.size()), d2(x.size());
    kernels::serial::div_adjoint(m, pf.values, d1);
    kernels::omp::div_adjoint(m, pf.values, d2);
    for (std::size_t i = 0; i < d1.size(); ++i) CHECK(std::abs(d1[i] - d2[i]) <= 1e-14 * (1.0 + std::abs(d1[i])));
  }
}

TEST_CASE("parallel reductions do not depend on the thread count") {
  const auto m = TriMesh::structured(90);
  oracle::Rng rng(1);
  const auto x = rng.p1(m.num_vertices()).values;
  const auto y = rng.p1(m.num_vertices()).values;
  const double d1 = kernels::omp::dot(x, y);
  const double d2 = kernels::omp::dot(x, y);
  CHECK(d1 == d2);
}

TEST_CASE("dispatch switch") {
  ParallelGuard guard;
  kernels::set_parallel(false);
  CHECK_FALSE(kernels::parallel_enabled());
  kernels::set_parallel(true);
  CHECK(kernels::parallel_enabled());
}
