#pragma once

#include <cstddef>
#include <vector>

#include "varireg/mesh/mesh.hpp"

namespace varireg {

// Weighted Dirac atoms on R^3 x S^2: one per non-degenerate face, located at the
// face barycenter with the face unit normal, weighted by the face area.
struct DiscreteVarifold {
  std::vector<Vec3> centers;
  std::vector<Vec3> normals;
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }
  bool empty() const { return weights.empty(); }
  double mass() const;
};

// Degenerate faces are dropped; their count is written to `dropped`.
// Throws Error(empty_mesh) if nothing is left.
DiscreteVarifold varifold_of_mesh(const TriMesh& mesh, std::size_t* dropped = nullptr);

// Builds a varifold from explicit atoms. Normals are checked for unit length
// (1 +- 1e-9) and weights for positivity.
DiscreteVarifold make_varifold(std::vector<Vec3> centers, std::vector<Vec3> normals, std::vector<double> weights);

}  // namespace varireg
