#include "varireg/mesh/smoothing.hpp"

#include "varireg/common/error.hpp"

namespace varireg {

std::vector<Vec3> uniform_laplacian(const TriMesh& mesh, const std::vector<std::vector<std::int32_t>>& rings) {
  std::vector<Vec3> lap(mesh.vertices.size(), Vec3::Zero());
  for (std::size_t v = 0; v < rings.size(); ++v) {
    if (rings[v].empty()) continue;
    Vec3 mean = Vec3::Zero();
    for (auto w : rings[v]) mean += mesh.vertices[w];
    lap[v] = mean / static_cast<double>(rings[v].size()) - mesh.vertices[v];
  }
  return lap;
}

namespace {

void step(TriMesh& m, const std::vector<std::vector<std::int32_t>>& rings, double factor) {
  const auto lap = uniform_laplacian(m, rings);
  for (std::size_t v = 0; v < m.vertices.size(); ++v) m.vertices[v] += factor * lap[v];
}

}  // namespace

TriMesh taubin_smooth(const TriMesh& mesh, double lambda, double mu, int iterations) {
  require_valid(mesh);
  if (!(lambda > 0.0)) throw Error(Errc::invalid_argument, "taubin lambda must be positive");
  if (!(mu < 0.0)) throw Error(Errc::invalid_argument, "taubin mu must be negative");
  if (iterations < 1) throw Error(Errc::invalid_argument, "taubin needs at least one iteration");
  TriMesh out = mesh;
  const auto rings = vertex_neighbors(mesh);
  for (int it = 0; it < iterations; ++it) {
    step(out, rings, lambda);
    step(out, rings, mu);
  }
  return out;
}

TriMesh laplacian_smooth(const TriMesh& mesh, double lambda, int steps) {
  require_valid(mesh);
  if (steps < 1) throw Error(Errc::invalid_argument, "laplacian smoothing needs at least one step");
  TriMesh out = mesh;
  const auto rings = vertex_neighbors(mesh);
  for (int s = 0; s < steps; ++s) step(out, rings, lambda);
  return out;
}

}  // namespace varireg
