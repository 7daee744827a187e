#pragma once

#include "varireg/mesh/mesh.hpp"

namespace varireg {

// Regular icosahedron with circumradius `radius`, outward-facing.
TriMesh icosahedron(double radius = 1.0);

// Icosahedron refined `level` times by 1-to-4 splits, every new vertex pushed back
// onto the sphere. Level k has 20 * 4^k faces.
TriMesh icosphere(int level, double radius = 1.0);

// Torus around the z axis sampled on a regular (u, v) grid; every vertex lies on the
// surface. u runs along the major circle, v along the tube.
TriMesh torus(double major_radius, double minor_radius, int nu, int nv);

// Flat triangulated grid on [0, nx] x [0, ny] in the z = 0 plane, unit spacing,
// each cell split along the same diagonal.
TriMesh grid(int nx, int ny, double spacing = 1.0);

}  // namespace varireg
