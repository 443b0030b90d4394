#pragma once

// Independent reference computations for the unit tests: dense linear algebra
// through Eigen and a fixed-seed random source.

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <vector>

#include "srcid/csr_matrix.hpp"
#include "srcid/fields.hpp"
#include "srcid/mesh.hpp"

namespace oracle {

inline Eigen::MatrixXd dense(const srcid::CsrMatrix& a) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(a.rows(), a.rows());
  for (srcid::Index i = 0; i < a.rows(); ++i)
    for (srcid::Index k = a.row_offsets()[i]; k < a.row_offsets()[i + 1]; ++k)
      m(i, a.col_indices()[k]) += a.values()[k];
  return m;
}

inline Eigen::VectorXd vec(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform(double lo = -1.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
  srcid::P1Field p1(std::size_t n, double lo = -1.0, double hi = 1.0) {
    srcid::P1Field f(n);
    for (auto& v : f.values) v = uniform(lo, hi);
    return f;
  }
  srcid::P0VecField p0(std::size_t n, double scale = 1.0) {
    srcid::P0VecField p(n);
    for (auto& v : p.values) v = {scale * uniform(), scale * uniform()};
    return p;
  }

 private:
  std::mt19937_64 gen_;
};

/// Hand-rolled gradient of a P1 field on one triangle from its vertex coordinates.
inline srcid::Vec2 triangle_gradient(const srcid::Vec2& a, const srcid::Vec2& b, const srcid::Vec2& c, double fa,
                                     double fb, double fc) {
  const double det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
  const double gx = ((fb - fa) * (c[1] - a[1]) - (fc - fa) * (b[1] - a[1])) / det;
  const double gy = ((fc - fa) * (b[0] - a[0]) - (fb - fa) * (c[0] - a[0])) / det;
  return {gx, gy};
}

}  // namespace oracle
