#include "srcid/kernels.hpp"

#include <algorithm>
#include <atomic>
#include <vector>

namespace srcid::kernels {

namespace {
std::atomic<bool> g_parallel{true};
constexpr std::ptrdiff_t kBlock = 2048;
}  // namespace

void set_parallel(bool enabled) { g_parallel.store(enabled); }
bool parallel_enabled() { return g_parallel.load(); }

namespace serial {

void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y) {
  const auto& off = a.row_offsets();
  const auto& col = a.col_indices();
  const auto& val = a.values();
  for (Index i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (Index k = off[i]; k < off[i + 1]; ++k) s += val[k] * x[col[k]];
    y[i] = s;
  }
}

double dot(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

double weighted_dot(std::span<const double> w, std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * x[i] * y[i];
  return s;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

void elem_gradient(const TriMesh& mesh, std::span<const double> f, std::span<Vec2> out) {
  const auto& tris = mesh.triangles();
  for (std::size_t t = 0; t < tris.size(); ++t) {
    Vec2 g{0.0, 0.0};
    for (int k = 0; k < 3; ++k) {
      const double fv = f[tris[t].v[k]];
      g[0] += fv * tris[t].grad[k][0];
      g[1] += fv * tris[t].grad[k][1];
    }
    out[t] = g;
  }
}

void div_adjoint(const TriMesh& mesh, std::span<const Vec2> p, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  const auto& tris = mesh.triangles();
  for (std::size_t t = 0; t < tris.size(); ++t)
    for (int k = 0; k < 3; ++k)
      out[tris[t].v[k]] += tris[t].area * (tris[t].grad[k][0] * p[t][0] + tris[t].grad[k][1] * p[t][1]);
}

}  // namespace serial

namespace omp {

void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y) {
  const auto& off = a.row_offsets();
  const auto& col = a.col_indices();
  const auto& val = a.values();
  const Index n = a.rows();
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < n; ++i) {
    double s = 0.0;
    for (Index k = off[i]; k < off[i + 1]; ++k) s += val[k] * x[col[k]];
    y[i] = s;
  }
}

namespace {

template <typename Term>
double blocked_sum(std::ptrdiff_t n, Term term) {
  const std::ptrdiff_t blocks = (n + kBlock - 1) / kBlock;
  std::vector<double> partial(static_cast<std::size_t>(blocks), 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < blocks; ++b) {
    double s = 0.0;
    const std::ptrdiff_t end = std::min(n, (b + 1) * kBlock);
    for (std::ptrdiff_t i = b * kBlock; i < end; ++i) s += term(i);
    partial[b] = s;
  }
  double total = 0.0;
  for (double s : partial) total += s;
  return total;
}

}  // namespace

double dot(std::span<const double> x, std::span<const double> y) {
  return blocked_sum(static_cast<std::ptrdiff_t>(x.size()), [&](std::ptrdiff_t i) { return x[i] * y[i]; });
}

double weighted_dot(std::span<const double> w, std::span<const double> x, std::span<const double> y) {
  return blocked_sum(static_cast<std::ptrdiff_t>(x.size()),
                     [&](std::ptrdiff_t i) { return w[i] * x[i] * y[i]; });
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  const auto n = static_cast<std::ptrdiff_t>(x.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void elem_gradient(const TriMesh& mesh, std::span<const double> f, std::span<Vec2> out) {
  const auto& tris = mesh.triangles();
  const auto nt = static_cast<std::ptrdiff_t>(tris.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t t = 0; t < nt; ++t) {
    Vec2 g{0.0, 0.0};
    for (int k = 0; k < 3; ++k) {
      const double fv = f[tris[t].v[k]];
      g[0] += fv * tris[t].grad[k][0];
      g[1] += fv * tris[t].grad[k][1];
    }
    out[t] = g;
  }
}

void div_adjoint(const TriMesh& mesh, std::span<const Vec2> p, std::span<double> out) {
  const auto& tris = mesh.triangles();
  const auto& off = mesh.incidence_offsets();
  const auto& inc = mesh.incidence();
  const auto nv = static_cast<std::ptrdiff_t>(mesh.num_vertices());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < nv; ++i) {
    double s = 0.0;
    for (Index k = off[i]; k < off[i + 1]; ++k) {
      const auto [t, slot] = inc[k];
      s += tris[t].area * (tris[t].grad[slot][0] * p[t][0] + tris[t].grad[slot][1] * p[t][1]);
    }
    out[i] = s;
  }
}

}  // namespace omp

void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y) {
  parallel_enabled() ? omp::spmv(a, x, y) : serial::spmv(a, x, y);
}
double dot(std::span<const double> x, std::span<const double> y) {
  return parallel_enabled() ? omp::dot(x, y) : serial::dot(x, y);
}
double weighted_dot(std::span<const double> w, std::span<const double> x, std::span<const double> y) {
  return parallel_enabled() ? omp::weighted_dot(w, x, y) : serial::weighted_dot(w, x, y);
}
void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  parallel_enabled() ? omp::axpy(alpha, x, y) : serial::axpy(alpha, x, y);
}
void elem_gradient(const TriMesh& mesh, std::span<const double> f, std::span<Vec2> out) {
  parallel_enabled() ? omp::elem_gradient(mesh, f, out) : serial::elem_gradient(mesh, f, out);
}
void div_adjoint(const TriMesh& mesh, std::span<const Vec2> p, std::span<double> out) {
  parallel_enabled() ? omp::div_adjoint(mesh, p, out) : serial::div_adjoint(mesh, p, out);
}

}  // namespace srcid::kernels
