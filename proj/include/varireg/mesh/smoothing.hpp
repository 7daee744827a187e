#pragma once

#include "varireg/mesh/mesh.hpp"

namespace varireg {

// Taubin lambda/mu smoothing with the uniform Laplacian L(x) = mean(1-ring) - x.
// Each iteration applies x += lambda L(x) followed by x += mu L(x). Requires
// lambda > 0, mu < 0, iterations >= 1. Vertices without neighbors stay fixed.
TriMesh taubin_smooth(const TriMesh& mesh, double lambda = 0.5, double mu = -0.53, int iterations = 10);

// Plain x += lambda L(x), repeated `steps` times.
TriMesh laplacian_smooth(const TriMesh& mesh, double lambda, int steps);

// Uniform Laplacian vectors (zero for isolated vertices).
std::vector<Vec3> uniform_laplacian(const TriMesh& mesh, const std::vector<std::vector<std::int32_t>>& rings);

}  // namespace varireg
