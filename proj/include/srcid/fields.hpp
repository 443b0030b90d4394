#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace srcid {

using Index = int;
using Vec2 = std::array<double, 2>;

/// Nodal coefficients of a continuous piecewise-linear function.
struct P1Field {
  std::vector<double> values;

  P1Field() = default;
  explicit P1Field(std::size_t n, double value = 0.0) : values(n, value) {}
  explicit P1Field(std::vector<double> v) : values(std::move(v)) {}

  [[nodiscard]] std::size_t size() const { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
  [[nodiscard]] std::span<const double> view() const { return values; }
  [[nodiscard]] std::span<double> view() { return values; }
};

/// Per-triangle constant 2-vectors.
struct P0VecField {
  std::vector<Vec2> values;

  P0VecField() = default;
  explicit P0VecField(std::size_t n, Vec2 value = {0.0, 0.0}) : values(n, value) {}
  explicit P0VecField(std::vector<Vec2> v) : values(std::move(v)) {}

  [[nodiscard]] std::size_t size() const { return values.size(); }
  Vec2& operator[](std::size_t i) { return values[i]; }
  const Vec2& operator[](std::size_t i) const { return values[i]; }

  /// max over triangles and components of |p_j|.
  [[nodiscard]] double max_abs() const;
};

}  // namespace srcid
