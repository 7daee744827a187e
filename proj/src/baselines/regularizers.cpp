#include "varireg/baselines/regularizers.hpp"

#include "varireg/common/error.hpp"
#include "varireg/mesh/smoothing.hpp"

namespace varireg {

RegularizerEval edge_loss_gradient(const TriMesh& xhat, const TriMesh& tmpl) {
  if (xhat.faces != tmpl.faces || xhat.vertices.size() != tmpl.vertices.size())
    throw Error(Errc::connectivity_mismatch, "edge loss needs meshes with identical connectivity");
  require_valid(xhat);
  const auto edges = mesh_edges(xhat);
  RegularizerEval out;
  out.gradient.assign(xhat.vertices.size(), Vec3::Zero());
  const double inv_e = 1.0 / static_cast<double>(edges.size());
  for (const auto& [i, j] : edges) {
    const Vec3 d = xhat.vertices[i] - xhat.vertices[j];
    const double len = d.norm();
    const double len0 = (tmpl.vertices[i] - tmpl.vertices[j]).norm();
    const double diff = len - len0;
    out.value += diff * diff;
    if (len > 0.0) {
      const Vec3 g = 2.0 * diff * inv_e * d / len;
      out.gradient[i] += g;
      out.gradient[j] -= g;
    }
  }
  out.value *= inv_e;
  return out;
}

double edge_loss(const TriMesh& xhat, const TriMesh& tmpl) { return edge_loss_gradient(xhat, tmpl).value; }

RegularizerEval laplacian_magnitude_gradient(const TriMesh& xhat) {
  require_valid(xhat);
  const auto rings = vertex_neighbors(xhat);
  const auto lap = uniform_laplacian(xhat, rings);
  const double inv_n = 1.0 / static_cast<double>(xhat.vertices.size());
  RegularizerEval out;
  out.gradient.assign(xhat.vertices.size(), Vec3::Zero());
  for (std::size_t v = 0; v < lap.size(); ++v) {
    out.value += lap[v].squaredNorm();
    if (rings[v].empty()) continue;
    const Vec3 g = 2.0 * inv_n * lap[v];
    out.gradient[v] -= g;
    const double inv_d = 1.0 / static_cast<double>(rings[v].size());
    for (auto w : rings[v]) out.gradient[w] += inv_d * g;
  }
  out.value *= inv_n;
  return out;
}

double laplacian_magnitude(const TriMesh& xhat) { return laplacian_magnitude_gradient(xhat).value; }

}  // namespace varireg
