#include "srcid/mesh.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace srcid {

double P0VecField::max_abs() const {
  double m = 0.0;
  for (const auto& p : values) m = std::max({m, std::abs(p[0]), std::abs(p[1])});
  return m;
}

std::string_view side_name(Side side) {
  switch (side) {
    case Side::bottom: return "bottom";
    case Side::right: return "right";
    case Side::top: return "top";
    case Side::left: return "left";
  }
  return "?";
}

GammaSpec::GammaSpec(std::initializer_list<Side> sides) {
  for (Side s : sides) mask_ |= static_cast<std::uint8_t>(1U << static_cast<int>(s));
}

GammaSpec GammaSpec::parse(std::string_view text) {
  GammaSpec g;
  std::string item;
  std::istringstream in{std::string(text)};
  while (std::getline(in, item, ',')) {
    item.erase(std::remove_if(item.begin(), item.end(), [](unsigned char c) { return std::isspace(c); }),
               item.end());
    if (item.empty()) continue;
    bool found = false;
    for (Side s : {Side::bottom, Side::right, Side::top, Side::left}) {
      if (item == side_name(s)) {
        g.mask_ |= static_cast<std::uint8_t>(1U << static_cast<int>(s));
        found = true;
      }
    }
    if (!found) throw std::invalid_argument("unknown boundary side '" + item + "'");
  }
  if (g.empty()) throw std::invalid_argument("observation boundary must name at least one side");
  return g;
}

std::string GammaSpec::to_string() const {
  std::string out;
  for (Side s : {Side::bottom, Side::right, Side::top, Side::left}) {
    if (!contains(s)) continue;
    if (!out.empty()) out += ',';
    out += side_name(s);
  }
  return out;
}

TriMesh TriMesh::structured(int level, const Rect& domain) {
  if (level < 1) throw std::invalid_argument("mesh level must be >= 1");
  if (!(domain.x1_max > domain.x1_min) || !(domain.x2_max > domain.x2_min))
    throw std::invalid_argument("degenerate mesh domain");

  TriMesh m;
  m.level_ = level;
  m.domain_ = domain;
  const int n = level + 1;
  const double dx = (domain.x1_max - domain.x1_min) / level;
  const double dy = (domain.x2_max - domain.x2_min) / level;
  m.mesh_size_ = std::hypot(dx, dy);

  m.vertices_.reserve(static_cast<std::size_t>(n) * n);
  for (int j = 0; j < n; ++j) {
    // Endpoints are set exactly so boundary coordinates compare equal.
    const double x2 = (j == level) ? domain.x2_max : domain.x2_min + j * dy;
    for (int i = 0; i < n; ++i) {
      const double x1 = (i == level) ? domain.x1_max : domain.x1_min + i * dx;
      m.vertices_.push_back({x1, x2});
    }
  }

  auto make_triangle = [&](Index a, Index b, Index c) {
    const Vec2& p0 = m.vertices_[a];
    const Vec2& p1 = m.vertices_[b];
    const Vec2& p2 = m.vertices_[c];
    const double det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
    Triangle t{{a, b, c}, 0.5 * det, {}};
    const double inv = 1.0 / det;
    t.grad[0] = {(p1[1] - p2[1]) * inv, (p2[0] - p1[0]) * inv};
    t.grad[1] = {(p2[1] - p0[1]) * inv, (p0[0] - p2[0]) * inv};
    t.grad[2] = {(p0[1] - p1[1]) * inv, (p1[0] - p0[0]) * inv};
    return t;
  };

  m.triangles_.reserve(2 * static_cast<std::size_t>(level) * level);
  for (int j = 0; j < level; ++j) {
    for (int i = 0; i < level; ++i) {
      const Index v00 = m.vertex_index(i, j);
      const Index v10 = m.vertex_index(i + 1, j);
      const Index v11 = m.vertex_index(i + 1, j + 1);
      const Index v01 = m.vertex_index(i, j + 1);
      m.triangles_.push_back(make_triangle(v00, v10, v11));
      m.triangles_.push_back(make_triangle(v00, v11, v01));
    }
  }

  for (int i = 0; i < level; ++i)
    m.edges_.push_back({{m.vertex_index(i, 0), m.vertex_index(i + 1, 0)}, dx, Side::bottom,
                        m.cell_triangle(i, 0, false)});
  for (int j = 0; j < level; ++j)
    m.edges_.push_back({{m.vertex_index(level, j), m.vertex_index(level, j + 1)}, dy, Side::right,
                        m.cell_triangle(level - 1, j, false)});
  for (int i = level - 1; i >= 0; --i)
    m.edges_.push_back({{m.vertex_index(i + 1, level), m.vertex_index(i, level)}, dx, Side::top,
                        m.cell_triangle(i, level - 1, true)});
  for (int j = level - 1; j >= 0; --j)
    m.edges_.push_back({{m.vertex_index(0, j + 1), m.vertex_index(0, j)}, dy, Side::left,
                        m.cell_triangle(0, j, true)});

  m.inc_offsets_.assign(m.vertices_.size() + 1, 0);
  for (const auto& t : m.triangles_)
    for (Index v : t.v) ++m.inc_offsets_[v + 1];
  for (std::size_t i = 0; i < m.vertices_.size(); ++i) m.inc_offsets_[i + 1] += m.inc_offsets_[i];
  m.incidence_.resize(m.inc_offsets_.back());
  std::vector<Index> fill(m.inc_offsets_.begin(), m.inc_offsets_.end() - 1);
  for (Index t = 0; t < static_cast<Index>(m.triangles_.size()); ++t)
    for (Index k = 0; k < 3; ++k) m.incidence_[fill[m.triangles_[t].v[k]]++] = {t, k};

  return m;
}

Vec2 TriMesh::centroid(Index t) const {
  const auto& tri = triangles_[t];
  Vec2 c{0.0, 0.0};
  for (Index v : tri.v) {
    c[0] += vertices_[v][0];
    c[1] += vertices_[v][1];
  }
  return {c[0] / 3.0, c[1] / 3.0};
}

Index TriMesh::locate(const Vec2& x) const {
  const double dx = (domain_.x1_max - domain_.x1_min) / level_;
  const double dy = (domain_.x2_max - domain_.x2_min) / level_;
  const double s = (x[0] - domain_.x1_min) / dx;
  const double t = (x[1] - domain_.x2_min) / dy;
  const int i = std::clamp(static_cast<int>(std::floor(s)), 0, level_ - 1);
  const int j = std::clamp(static_cast<int>(std::floor(t)), 0, level_ - 1);
  return cell_triangle(i, j, (t - j) > (s - i));
}

std::vector<Index> TriMesh::boundary_nodes() const {
  std::set<Index> nodes;
  for (const auto& e : edges_) nodes.insert(e.v.begin(), e.v.end());
  return {nodes.begin(), nodes.end()};
}

std::vector<Index> TriMesh::gamma_nodes(const GammaSpec& gamma) const {
  std::set<Index> nodes;
  for (const auto& e : edges_)
    if (gamma.contains(e.side)) nodes.insert(e.v.begin(), e.v.end());
  return {nodes.begin(), nodes.end()};
}

namespace {

void check_nesting(const TriMesh& coarse, const TriMesh& fine) {
  if (fine.level() != 2 * coarse.level())
    throw std::invalid_argument("prolongation requires fine level = 2 x coarse level");
  const Rect& a = coarse.domain();
  const Rect& b = fine.domain();
  if (a.x1_min != b.x1_min || a.x1_max != b.x1_max || a.x2_min != b.x2_min || a.x2_max != b.x2_max)
    throw std::invalid_argument("prolongation requires meshes of the same domain");
}

}  // namespace

P1Field prolong_p1(const P1Field& coarse, const TriMesh& coarse_mesh, const TriMesh& fine_mesh) {
  check_nesting(coarse_mesh, fine_mesh);
  if (coarse.size() != coarse_mesh.num_vertices())
    throw std::invalid_argument("coarse field does not match coarse mesh");
  const int lf = fine_mesh.level();
  P1Field fine(fine_mesh.num_vertices());
  auto cv = [&](int i, int j) { return coarse[coarse_mesh.vertex_index(i, j)]; };
  for (int J = 0; J <= lf; ++J) {
    for (int I = 0; I <= lf; ++I) {
      double value;
      if (I % 2 == 0 && J % 2 == 0) {
        value = cv(I / 2, J / 2);
      } else if (J % 2 == 0) {
        value = 0.5 * (cv((I - 1) / 2, J / 2) + cv((I + 1) / 2, J / 2));
      } else if (I % 2 == 0) {
        value = 0.5 * (cv(I / 2, (J - 1) / 2) + cv(I / 2, (J + 1) / 2));
      } else {
        // midpoint of a coarse diagonal
        value = 0.5 * (cv((I - 1) / 2, (J - 1) / 2) + cv((I + 1) / 2, (J + 1) / 2));
      }
      fine[fine_mesh.vertex_index(I, J)] = value;
    }
  }
  return fine;
}

P0VecField prolong_p0(const P0VecField& coarse, const TriMesh& coarse_mesh, const TriMesh& fine_mesh) {
  check_nesting(coarse_mesh, fine_mesh);
  if (coarse.size() != coarse_mesh.num_triangles())
    throw std::invalid_argument("coarse field does not match coarse mesh");
  P0VecField fine(fine_mesh.num_triangles());
  for (Index t = 0; t < static_cast<Index>(fine_mesh.num_triangles()); ++t)
    fine[t] = coarse[coarse_mesh.locate(fine_mesh.centroid(t))];
  return fine;
}

}  // namespace srcid
