#pragma once

// Data-parallel inner loops. Every kernel has a plain serial reference in
// `kernels::serial` and an OpenMP version in `kernels::omp`; the unqualified
// entry points dispatch on a process-wide switch (parallel by default).
//
// The OpenMP reductions use fixed-size blocks combined in block order, so
// results do not depend on the thread count.

#include <span>

#include "srcid/csr_matrix.hpp"
#include "srcid/mesh.hpp"

namespace srcid::kernels {

void set_parallel(bool enabled);
[[nodiscard]] bool parallel_enabled();

namespace serial {
void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y);
double dot(std::span<const double> x, std::span<const double> y);
double weighted_dot(std::span<const double> w, std::span<const double> x, std::span<const double> y);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void elem_gradient(const TriMesh& mesh, std::span<const double> f, std::span<Vec2> out);
void div_adjoint(const TriMesh& mesh, std::span<const Vec2> p, std::span<double> out);
}  // namespace serial

namespace omp {
void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y);
double dot(std::span<const double> x, std::span<const double> y);
double weighted_dot(std::span<const double> w, std::span<const double> x, std::span<const double> y);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void elem_gradient(const TriMesh& mesh, std::span<const double> f, std::span<Vec2> out);
/// Gathers over the node-to-triangle incidence instead of scattering.
void div_adjoint(const TriMesh& mesh, std::span<const Vec2> p, std::span<double> out);
}  // namespace omp

void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y);
double dot(std::span<const double> x, std::span<const double> y);
double weighted_dot(std::span<const double> w, std::span<const double> x, std::span<const double> y);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void elem_gradient(const TriMesh& mesh, std::span<const double> f, std::span<Vec2> out);
void div_adjoint(const TriMesh& mesh, std::span<const Vec2> p, std::span<double> out);

}  // namespace srcid::kernels
