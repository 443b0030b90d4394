#pragma once

#include <filesystem>
#include <string>

#include "srcid/experiment.hpp"
#include "srcid/fields.hpp"
#include "srcid/mesh.hpp"
#include "srcid/pde.hpp"

namespace srcid {

/// CSV rows `x1,x2,value` per node, or a legacy ASCII VTK unstructured grid.
void export_field(const P1Field& field, const TriMesh& mesh, const std::filesystem::path& path, FieldFormat format,
                  const std::string& name = "value");
/// P0 vector fields: CSV rows per centroid with columns x1,x2,value_1,value_2; VTK CELL_DATA.
void export_field(const P0VecField& field, const TriMesh& mesh, const std::filesystem::path& path,
                  FieldFormat format, const std::string& name = "value");

std::string field_csv(const P1Field& field, const TriMesh& mesh);
std::string field_vtk(const P1Field& field, const TriMesh& mesh, const std::string& name = "value");
std::string field_csv(const P0VecField& field, const TriMesh& mesh);
std::string field_vtk(const P0VecField& field, const TriMesh& mesh, const std::string& name = "value");

/// Parses `x1,x2,value` rows (header required) and returns the values in file order.
std::vector<std::array<double, 3>> read_xyz_csv(const std::filesystem::path& path);

/// Observation files use the header `node_x1,node_x2,z_value`.
void write_observation(const std::filesystem::path& path, const Observation& z, const TriMesh& mesh);
/// Matches rows to Gamma nodes by coordinates; every Gamma node must appear exactly once.
Observation read_observation(const std::filesystem::path& path, const TriMesh& mesh, const GammaSpec& gamma);

void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace srcid
