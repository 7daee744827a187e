#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "varireg/common/types.hpp"

namespace varireg {

// Indexed triangle mesh. Faces are counter-clockwise index triples into vertices.
struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;

  std::size_t num_vertices() const { return vertices.size(); }
  std::size_t num_faces() const { return faces.size(); }
  bool empty() const { return vertices.empty() || faces.empty(); }
};

// Per-face Dirac data: barycenter, unit normal and area.
struct FaceGeometry {
  std::vector<Vec3> centers;
  std::vector<Vec3> normals;
  std::vector<double> areas;

  std::size_t size() const { return areas.size(); }
};

struct MeshStats {
  double max_edge_length = 0.0;         // eta
  double min_face_angle = 0.0;          // theta, radians
  double total_area = 0.0;
  double mean_triangle_diameter = 0.0;  // mean over faces of the longest edge
  double bbox_diagonal = 0.0;
  std::size_t num_vertices = 0;
  std::size_t num_faces = 0;
};

enum class DefectKind { index_out_of_range, repeated_index, non_finite, degenerate_face };

struct Defect {
  DefectKind kind;
  std::size_t element;  // vertex index for non_finite, face index otherwise
  std::string message;
};

std::string to_string(DefectKind kind);

// Diagnostics only; never throws. Empty iff every invariant holds.
std::vector<Defect> validate(const TriMesh& mesh);

// Throws Error(empty_mesh | index_out_of_range | parse) on structural problems:
// indices, repeated indices and non-finite coordinates. Degenerate faces pass.
void require_valid(const TriMesh& mesh);

double bbox_diagonal(const TriMesh& mesh);

// A face is degenerate when |(q-p)x(r-p)| <= 1e-12 * bbox_diagonal^2.
double degeneracy_threshold(const TriMesh& mesh);
inline constexpr double kDegeneracyFactor = 1e-12;

// Throws Error(degenerate_face) if any face is below the degeneracy threshold.
FaceGeometry face_geometry(const TriMesh& mesh);

// Same as face_geometry but silently skips degenerate faces; `kept` receives the
// original face index of every returned entry.
FaceGeometry face_geometry_nondegenerate(const TriMesh& mesh, std::vector<std::size_t>* kept = nullptr);

MeshStats mesh_stats(const TriMesh& mesh);

// Unique undirected edges (i < j), sorted.
std::vector<std::array<std::int32_t, 2>> mesh_edges(const TriMesh& mesh);

// Sorted unique 1-ring vertex neighbors.
std::vector<std::vector<std::int32_t>> vertex_neighbors(const TriMesh& mesh);

// Signed volume enclosed by a closed, consistently oriented mesh.
double enclosed_volume(const TriMesh& mesh);

double total_area(const TriMesh& mesh);

// Reversed winding for every face.
TriMesh flipped(const TriMesh& mesh);

}  // namespace varireg
