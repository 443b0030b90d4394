// Serial reference kernels against their OpenMP counterparts on the
// structured meshes used by the benchmark.

#include <benchmark/benchmark.h>

#include <vector>

#include "srcid/fem.hpp"
#include "srcid/kernels.hpp"
#include "srcid/mesh.hpp"

namespace {

using namespace srcid;

struct Fixture {
  TriMesh mesh;
  CsrMatrix k;
  std::vector<double> x, y;
  std::vector<Vec2> p;

  explicit Fixture(int level) : mesh(TriMesh::structured(level)), k(assemble_gradient_gram(mesh)) {
    x.resize(mesh.num_vertices());
    y.resize(mesh.num_vertices());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = 0.001 * static_cast<double>(i % 997);
    p.assign(mesh.num_triangles(), Vec2{0.3, -0.2});
  }
};

template <bool Parallel>
void BM_spmv(benchmark::State& state) {
  Fixture fx(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    if constexpr (Parallel)
      kernels::omp::spmv(fx.k, fx.x, fx.y);
    else
      kernels::serial::spmv(fx.k, fx.x, fx.y);
    benchmark::DoNotOptimize(fx.y.data());
  }
}

template <bool Parallel>
void BM_dot(benchmark::State& state) {
  Fixture fx(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    double d = Parallel ? kernels::omp::dot(fx.x, fx.x) : kernels::serial::dot(fx.x, fx.x);
    benchmark::DoNotOptimize(d);
  }
}

template <bool Parallel>
void BM_div_adjoint(benchmark::State& state) {
  Fixture fx(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    if constexpr (Parallel)
      kernels::omp::div_adjoint(fx.mesh, fx.p, fx.y);
    else
      kernels::serial::div_adjoint(fx.mesh, fx.p, fx.y);
    benchmark::DoNotOptimize(fx.y.data());
  }
}

template <bool Parallel>
void BM_elem_gradient(benchmark::State& state) {
  Fixture fx(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    if constexpr (Parallel)
      kernels::omp::elem_gradient(fx.mesh, fx.x, fx.p);
    else
      kernels::serial::elem_gradient(fx.mesh, fx.x, fx.p);
    benchmark::DoNotOptimize(fx.p.data());
  }
}

}  // namespace

BENCHMARK(BM_spmv<false>)->Arg(32)->Arg(128)->Arg(512);
BENCHMARK(BM_spmv<true>)->Arg(32)->Arg(128)->Arg(512);
BENCHMARK(BM_dot<false>)->Arg(32)->Arg(128)->Arg(512);
BENCHMARK(BM_dot<true>)->Arg(32)->Arg(128)->Arg(512);
BENCHMARK(BM_div_adjoint<false>)->Arg(32)->Arg(128)->Arg(512);
BENCHMARK(BM_div_adjoint<true>)->Arg(32)->Arg(128)->Arg(512);
BENCHMARK(BM_elem_gradient<false>)->Arg(32)->Arg(128)->Arg(512);
BENCHMARK(BM_elem_gradient<true>)->Arg(32)->Arg(128)->Arg(512);

BENCHMARK_MAIN();
