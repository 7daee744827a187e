#pragma once

#include <vector>

#include "varireg/mesh/mesh.hpp"

namespace varireg {

// Mean over unique edges of (|e| - |e_template|)^2. Both meshes must share the same
// face list; throws Error(connectivity_mismatch) otherwise.
double edge_loss(const TriMesh& xhat, const TriMesh& tmpl);

// Mean over vertices of |L(x)|^2 with the uniform Laplacian L(x) = mean(1-ring) - x.
double laplacian_magnitude(const TriMesh& xhat);

// Value plus gradient with respect to the vertices of xhat.
struct RegularizerEval {
  double value = 0.0;
  std::vector<Vec3> gradient;
};

RegularizerEval edge_loss_gradient(const TriMesh& xhat, const TriMesh& tmpl);
RegularizerEval laplacian_magnitude_gradient(const TriMesh& xhat);

}  // namespace varireg
