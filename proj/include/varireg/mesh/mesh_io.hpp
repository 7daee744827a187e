#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string_view>

#include "varireg/mesh/mesh.hpp"

namespace varireg {

enum class MeshFormat { obj, ply_ascii, off };

// Guesses the format from the file extension (.obj, .ply, .off).
std::optional<MeshFormat> format_from_path(const std::filesystem::path& path);
std::optional<MeshFormat> parse_format(std::string_view name);

// Polygons with more than three corners are fan-triangulated (convex planar faces
// assumed). Normals, texture coordinates and other attributes are ignored.
TriMesh load_mesh(const std::filesystem::path& path, MeshFormat format);
TriMesh load_mesh(const std::filesystem::path& path);
TriMesh read_mesh(std::istream& in, MeshFormat format);

// Coordinates are written with 9 significant digits.
void save_mesh(const TriMesh& mesh, const std::filesystem::path& path, MeshFormat format);
void save_mesh(const TriMesh& mesh, const std::filesystem::path& path);
void write_mesh(const TriMesh& mesh, std::ostream& out, MeshFormat format);

}  // namespace varireg
