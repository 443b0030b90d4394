#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "srcid/fields.hpp"

namespace srcid {

enum class Side : std::uint8_t { bottom = 0, right = 1, top = 2, left = 3 };

std::string_view side_name(Side side);

/// Axis-aligned rectangle (a1, b1) x (a2, b2).
struct Rect {
  double x1_min = -1.0;
  double x1_max = 1.0;
  double x2_min = -1.0;
  double x2_max = 1.0;

  [[nodiscard]] double area() const { return (x1_max - x1_min) * (x2_max - x2_min); }
};

struct Triangle {
  std::array<Index, 3> v;       // counterclockwise
  double area;
  std::array<Vec2, 3> grad;     // constant gradients of the barycentric coordinates
};

struct BoundaryEdge {
  std::array<Index, 2> v;
  double length;
  Side side;
  Index triangle;
};

/// Set of rectangle sides on which the state is observed.
class GammaSpec {
 public:
  GammaSpec() = default;
  GammaSpec(std::initializer_list<Side> sides);

  /// Parses a comma-separated list such as "bottom,left".
  static GammaSpec parse(std::string_view text);

  [[nodiscard]] bool contains(Side side) const { return (mask_ >> static_cast<int>(side)) & 1U; }
  [[nodiscard]] bool empty() const { return mask_ == 0; }
  [[nodiscard]] std::string to_string() const;

 private:
  std::uint8_t mask_ = 0;
};

/// Structured triangulation of a rectangle: `level` cells per axis, each cell
/// split along its bottom-left to top-right diagonal. Immutable once built.
class TriMesh {
 public:
  /// Empty mesh; use structured() to build one.
  TriMesh() = default;
  static TriMesh structured(int level, const Rect& domain = Rect{});

  [[nodiscard]] const std::vector<Vec2>& vertices() const { return vertices_; }
  [[nodiscard]] const std::vector<Triangle>& triangles() const { return triangles_; }
  [[nodiscard]] const std::vector<BoundaryEdge>& boundary_edges() const { return edges_; }
  [[nodiscard]] std::size_t num_vertices() const { return vertices_.size(); }
  [[nodiscard]] std::size_t num_triangles() const { return triangles_.size(); }

  [[nodiscard]] int level() const { return level_; }
  /// Triangle diameter (the cell diagonal).
  [[nodiscard]] double mesh_size() const { return mesh_size_; }
  [[nodiscard]] const Rect& domain() const { return domain_; }

  [[nodiscard]] Index vertex_index(int i, int j) const { return i + j * (level_ + 1); }
  /// Lower triangle of cell (i, j) lies below the diagonal, upper above it.
  [[nodiscard]] Index cell_triangle(int i, int j, bool upper) const {
    return 2 * (i + j * level_) + (upper ? 1 : 0);
  }
  [[nodiscard]] Vec2 centroid(Index t) const;
  /// Triangle containing the point (ties resolved toward the lower-left cell).
  [[nodiscard]] Index locate(const Vec2& x) const;

  /// Node-to-triangle incidence: entries [offsets[i], offsets[i+1]) hold
  /// (triangle, local vertex slot) pairs touching vertex i.
  [[nodiscard]] const std::vector<Index>& incidence_offsets() const { return inc_offsets_; }
  [[nodiscard]] const std::vector<std::array<Index, 2>>& incidence() const { return incidence_; }

  [[nodiscard]] std::vector<Index> boundary_nodes() const;
  /// Sorted vertices lying on a side in gamma.
  [[nodiscard]] std::vector<Index> gamma_nodes(const GammaSpec& gamma) const;

 private:
  int level_ = 0;
  double mesh_size_ = 0.0;
  Rect domain_;
  std::vector<Vec2> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<BoundaryEdge> edges_;
  std::vector<Index> inc_offsets_;
  std::vector<std::array<Index, 2>> incidence_;
};

inline TriMesh build_structured(int level) { return TriMesh::structured(level); }

/// Nodal interpolation from a mesh onto its uniform refinement (level doubled).
P1Field prolong_p1(const P1Field& coarse, const TriMesh& coarse_mesh, const TriMesh& fine_mesh);

/// Each fine triangle takes the value of the coarse triangle containing its centroid.
P0VecField prolong_p0(const P0VecField& coarse, const TriMesh& coarse_mesh, const TriMesh& fine_mesh);

}  // namespace srcid
