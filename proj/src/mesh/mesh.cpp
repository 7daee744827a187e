#include "varireg/mesh/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "varireg/common/error.hpp"

namespace varireg {

std::string to_string(DefectKind kind) {
  switch (kind) {
    case DefectKind::index_out_of_range: return "index_out_of_range";
    case DefectKind::repeated_index: return "repeated_index";
    case DefectKind::non_finite: return "non_finite";
    case DefectKind::degenerate_face: return "degenerate_face";
  }
  return "unknown";
}

namespace {

bool finite(const Vec3& v) { return std::isfinite(v.x()) && std::isfinite(v.y()) && std::isfinite(v.z()); }

Vec3 unnormalized_normal(const TriMesh& m, const Face& f) {
  const Vec3& p = m.vertices[f[0]];
  const Vec3& q = m.vertices[f[1]];
  const Vec3& r = m.vertices[f[2]];
  return (q - p).cross(r - p);
}

}  // namespace

std::vector<Defect> validate(const TriMesh& mesh) {
  std::vector<Defect> defects;
  const auto n = static_cast<std::int64_t>(mesh.vertices.size());
  bool coords_ok = true;
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    if (!finite(mesh.vertices[i])) {
      coords_ok = false;
      defects.push_back({DefectKind::non_finite, i, "vertex " + std::to_string(i) + " has a non-finite coordinate"});
    }
  }
  const double threshold = coords_ok ? degeneracy_threshold(mesh) : 0.0;
  for (std::size_t fi = 0; fi < mesh.faces.size(); ++fi) {
    const Face& f = mesh.faces[fi];
    bool indices_ok = true;
    for (auto idx : f) {
      if (idx < 0 || idx >= n) {
        indices_ok = false;
        defects.push_back({DefectKind::index_out_of_range, fi,
                           "face " + std::to_string(fi) + " references vertex " + std::to_string(idx)});
        break;
      }
    }
    if (!indices_ok) continue;
    if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2]) {
      defects.push_back({DefectKind::repeated_index, fi, "face " + std::to_string(fi) + " repeats a vertex index"});
      continue;
    }
    if (!coords_ok) continue;
    if (unnormalized_normal(mesh, f).norm() <= threshold) {
      defects.push_back({DefectKind::degenerate_face, fi, "face " + std::to_string(fi) + " has (near) zero area"});
    }
  }
  return defects;
}

void require_valid(const TriMesh& mesh) {
  if (mesh.empty()) throw Error(Errc::empty_mesh, "mesh has no vertices or no faces");
  for (const auto& d : validate(mesh)) {
    switch (d.kind) {
      case DefectKind::index_out_of_range: throw Error(Errc::index_out_of_range, d.message);
      case DefectKind::repeated_index: throw Error(Errc::invalid_argument, d.message);
      case DefectKind::non_finite: throw Error(Errc::non_finite, d.message);
      case DefectKind::degenerate_face: break;
    }
  }
}

double bbox_diagonal(const TriMesh& mesh) {
  if (mesh.vertices.empty()) return 0.0;
  Vec3 lo = mesh.vertices.front();
  Vec3 hi = lo;
  for (const auto& v : mesh.vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  return (hi - lo).norm();
}

double degeneracy_threshold(const TriMesh& mesh) {
  const double d = bbox_diagonal(mesh);
  return kDegeneracyFactor * d * d;
}

FaceGeometry face_geometry(const TriMesh& mesh) {
  require_valid(mesh);
  const double threshold = degeneracy_threshold(mesh);
  FaceGeometry g;
  const std::size_t nf = mesh.faces.size();
  g.centers.resize(nf);
  g.normals.resize(nf);
  g.areas.resize(nf);
  for (std::size_t i = 0; i < nf; ++i) {
    const Face& f = mesh.faces[i];
    const Vec3 w = unnormalized_normal(mesh, f);
    const double len = w.norm();
    if (len <= threshold) throw Error(Errc::degenerate_face, "face " + std::to_string(i) + " is degenerate");
    g.centers[i] = (mesh.vertices[f[0]] + mesh.vertices[f[1]] + mesh.vertices[f[2]]) / 3.0;
    g.normals[i] = w / len;
    g.areas[i] = 0.5 * len;
  }
  return g;
}

FaceGeometry face_geometry_nondegenerate(const TriMesh& mesh, std::vector<std::size_t>* kept) {
  require_valid(mesh);
  const double threshold = degeneracy_threshold(mesh);
  FaceGeometry g;
  if (kept) kept->clear();
  for (std::size_t i = 0; i < mesh.faces.size(); ++i) {
    const Face& f = mesh.faces[i];
    const Vec3 w = unnormalized_normal(mesh, f);
    const double len = w.norm();
    if (len <= threshold) continue;
    g.centers.push_back((mesh.vertices[f[0]] + mesh.vertices[f[1]] + mesh.vertices[f[2]]) / 3.0);
    g.normals.push_back(w / len);
    g.areas.push_back(0.5 * len);
    if (kept) kept->push_back(i);
  }
  return g;
}

MeshStats mesh_stats(const TriMesh& mesh) {
  require_valid(mesh);
  MeshStats s;
  s.num_vertices = mesh.vertices.size();
  s.num_faces = mesh.faces.size();
  s.bbox_diagonal = bbox_diagonal(mesh);
  s.min_face_angle = std::numbers::pi;
  double diameter_sum = 0.0;
  for (const Face& f : mesh.faces) {
    const Vec3& p = mesh.vertices[f[0]];
    const Vec3& q = mesh.vertices[f[1]];
    const Vec3& r = mesh.vertices[f[2]];
    const std::array<Vec3, 3> e = {q - p, r - q, p - r};
    const double longest = std::max({e[0].norm(), e[1].norm(), e[2].norm()});
    s.max_edge_length = std::max(s.max_edge_length, longest);
    diameter_sum += longest;
    s.total_area += 0.5 * e[0].cross(-e[2]).norm();
    for (int k = 0; k < 3; ++k) {
      // angle between the two edges leaving corner k
      const Vec3 a = e[k];
      const Vec3 b = -e[(k + 2) % 3];
      const double angle = std::atan2(a.cross(b).norm(), a.dot(b));
      s.min_face_angle = std::min(s.min_face_angle, angle);
    }
  }
  s.mean_triangle_diameter = diameter_sum / static_cast<double>(mesh.faces.size());
  return s;
}

std::vector<std::array<std::int32_t, 2>> mesh_edges(const TriMesh& mesh) {
  std::vector<std::array<std::int32_t, 2>> edges;
  edges.reserve(mesh.faces.size() * 3);
  for (const Face& f : mesh.faces) {
    for (int k = 0; k < 3; ++k) {
      auto a = f[k];
      auto b = f[(k + 1) % 3];
      edges.push_back({std::min(a, b), std::max(a, b)});
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

std::vector<std::vector<std::int32_t>> vertex_neighbors(const TriMesh& mesh) {
  std::vector<std::vector<std::int32_t>> rings(mesh.vertices.size());
  for (const auto& e : mesh_edges(mesh)) {
    rings[e[0]].push_back(e[1]);
    rings[e[1]].push_back(e[0]);
  }
  for (auto& r : rings) std::sort(r.begin(), r.end());
  return rings;
}

double enclosed_volume(const TriMesh& mesh) {
  double six_v = 0.0;
  for (const Face& f : mesh.faces) {
    six_v += mesh.vertices[f[0]].dot(mesh.vertices[f[1]].cross(mesh.vertices[f[2]]));
  }
  return six_v / 6.0;
}

double total_area(const TriMesh& mesh) {
  double a = 0.0;
  for (const Face& f : mesh.faces) a += 0.5 * unnormalized_normal(mesh, f).norm();
  return a;
}

TriMesh flipped(const TriMesh& mesh) {
  TriMesh out = mesh;
  for (auto& f : out.faces) std::swap(f[1], f[2]);
  return out;
}

}  // namespace varireg
