#include "srcid/field_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

namespace srcid {

namespace {

// Shortest round-trip representation, identical on every platform.
std::string num(double v) { return fmt::format("{}", v); }

std::string vtk_geometry(const TriMesh& mesh) {
  std::string out = "# vtk DataFile Version 3.0\nsrcid field\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out += fmt::format("POINTS {} double\n", mesh.num_vertices());
  for (const auto& x : mesh.vertices()) out += num(x[0]) + " " + num(x[1]) + " 0\n";
  const auto nt = mesh.num_triangles();
  out += fmt::format("CELLS {} {}\n", nt, 4 * nt);
  for (const auto& t : mesh.triangles()) out += fmt::format("3 {} {} {}\n", t.v[0], t.v[1], t.v[2]);
  out += fmt::format("CELL_TYPES {}\n", nt);
  for (std::size_t t = 0; t < nt; ++t) out += "5\n";
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r' && c != ' ' && c != '\t') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, const std::filesystem::path& path, int line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw std::runtime_error(fmt::format("{}:{}: cannot parse number '{}'", path.string(), line, s));
  return v;
}

std::vector<std::array<double, 3>> read_triples(const std::filesystem::path& path, const std::string& header) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || split(line) != split(header))
    throw std::runtime_error(path.string() + ": expected header '" + header + "'");
  std::vector<std::array<double, 3>> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto cells = split(line);
    if (cells.size() != 3) throw std::runtime_error(fmt::format("{}:{}: expected 3 columns", path.string(), lineno));
    rows.push_back({parse_double(cells[0], path, lineno), parse_double(cells[1], path, lineno),
                    parse_double(cells[2], path, lineno)});
  }
  return rows;
}

}  // namespace

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw std::runtime_error("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  out.close();
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string field_csv(const P1Field& field, const TriMesh& mesh) {
  if (field.size() != mesh.num_vertices()) throw std::invalid_argument("field does not match the mesh");
  std::string out = "x1,x2,value\n";
  for (std::size_t i = 0; i < field.size(); ++i) {
    const auto& x = mesh.vertices()[i];
    out += num(x[0]) + "," + num(x[1]) + "," + num(field[i]) + "\n";
  }
  return out;
}

std::string field_vtk(const P1Field& field, const TriMesh& mesh, const std::string& name) {
  if (field.size() != mesh.num_vertices()) throw std::invalid_argument("field does not match the mesh");
  std::string out = vtk_geometry(mesh);
  out += fmt::format("POINT_DATA {}\nSCALARS {} double 1\nLOOKUP_TABLE default\n", field.size(), name);
  for (double v : field.values) out += num(v) + "\n";
  return out;
}

std::string field_csv(const P0VecField& field, const TriMesh& mesh) {
  if (field.size() != mesh.num_triangles()) throw std::invalid_argument("field does not match the mesh");
  std::string out = "x1,x2,value_1,value_2\n";
  for (std::size_t t = 0; t < field.size(); ++t) {
    const Vec2 c = mesh.centroid(static_cast<Index>(t));
    out += num(c[0]) + "," + num(c[1]) + "," + num(field[t][0]) + "," + num(field[t][1]) + "\n";
  }
  return out;
}

std::string field_vtk(const P0VecField& field, const TriMesh& mesh, const std::string& name) {
  if (field.size() != mesh.num_triangles()) throw std::invalid_argument("field does not match the mesh");
  std::string out = vtk_geometry(mesh);
  out += fmt::format("CELL_DATA {}\n", field.size());
  for (int comp = 0; comp < 2; ++comp) {
    out += fmt::format("SCALARS {}_{} double 1\nLOOKUP_TABLE default\n", name, comp + 1);
    for (const auto& v : field.values) out += num(v[comp]) + "\n";
  }
  return out;
}

void export_field(const P1Field& field, const TriMesh& mesh, const std::filesystem::path& path, FieldFormat format,
                  const std::string& name) {
  write_text_file(path, format == FieldFormat::csv ? field_csv(field, mesh) : field_vtk(field, mesh, name));
}

void export_field(const P0VecField& field, const TriMesh& mesh, const std::filesystem::path& path,
                  FieldFormat format, const std::string& name) {
  write_text_file(path, format == FieldFormat::csv ? field_csv(field, mesh) : field_vtk(field, mesh, name));
}

std::vector<std::array<double, 3>> read_xyz_csv(const std::filesystem::path& path) {
  return read_triples(path, "x1,x2,value");
}

void write_observation(const std::filesystem::path& path, const Observation& z, const TriMesh& mesh) {
  std::string out = "node_x1,node_x2,z_value\n";
  for (std::size_t k = 0; k < z.nodes.size(); ++k) {
    const auto& x = mesh.vertices()[z.nodes[k]];
    out += num(x[0]) + "," + num(x[1]) + "," + num(z.values[k]) + "\n";
  }
  write_text_file(path, out);
}

Observation read_observation(const std::filesystem::path& path, const TriMesh& mesh, const GammaSpec& gamma) {
  const auto rows = read_triples(path, "node_x1,node_x2,z_value");
  Observation z;
  z.nodes = mesh.gamma_nodes(gamma);
  z.values.assign(z.nodes.size(), std::nan(""));
  const double snap = 1e-6 * mesh.mesh_size();
  std::map<Index, std::size_t> slot;
  for (std::size_t k = 0; k < z.nodes.size(); ++k) slot[z.nodes[k]] = k;
  for (const auto& r : rows) {
    const Index t = mesh.locate({r[0], r[1]});
    Index best = -1;
    for (Index v : mesh.triangles()[t].v) {
      const auto& x = mesh.vertices()[v];
      if (std::hypot(x[0] - r[0], x[1] - r[1]) <= snap) best = v;
    }
    const auto it = best < 0 ? slot.end() : slot.find(best);
    if (it == slot.end())
      throw std::runtime_error(
          fmt::format("{}: point ({}, {}) is not an observation node of this mesh", path.string(), r[0], r[1]));
    if (!std::isnan(z.values[it->second]))
      throw std::runtime_error(fmt::format("{}: node ({}, {}) listed twice", path.string(), r[0], r[1]));
    z.values[it->second] = r[2];
  }
  for (std::size_t k = 0; k < z.values.size(); ++k)
    if (std::isnan(z.values[k]))
      throw std::runtime_error(fmt::format("{}: missing value for observation node {}", path.string(), z.nodes[k]));
  return z;
}

}  // namespace srcid
