#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "varireg/mesh/mesh.hpp"

namespace varireg {

// Flat 1-to-4 split through edge midpoints. Positions are not smoothed; shared edges
// share their midpoint vertex, which is appended after the original vertices.
TriMesh subdivide_midpoint(const TriMesh& mesh);

struct DecimateOptions {
  // Collapses whose incident faces would rotate their normal by more than
  // acos(min_normal_cos) are rejected as fold-overs.
  double min_normal_cos = 0.2;
  // Seeds the tie-break between edges of identical length.
  std::uint64_t seed = 42;
  // Vertices flagged here never move and never disappear (size 0 or n_vertices).
  std::vector<bool> locked;
  // Stop quietly when no legal collapse is left instead of throwing.
  bool allow_partial = false;
};

// Shortest-edge collapse with midpoint placement until |F| <= target_faces.
// Boundary vertices are kept fixed. Throws Error(unreachable_target) when no legal
// collapse remains above the target (unless allow_partial).
TriMesh decimate_edge_collapse(const TriMesh& mesh, std::size_t target_faces, const DecimateOptions& opts = {});

enum class Axis { x = 0, y = 1, z = 2 };

struct VariableRemeshInfo {
  std::size_t faces_above = 0;  // face centers above the split after remeshing
  std::size_t faces_below = 0;
};

// Coarsens the part above `split_value` along `axis` (to half its face count) and
// refines the part below 1-to-4. The refinement is applied to the whole mesh first
// and the coarsening only touches vertices strictly inside the upper region, so the
// seam stays conforming.
TriMesh remesh_variable(const TriMesh& mesh, Axis axis, double split_value, VariableRemeshInfo* info = nullptr,
                        std::uint64_t seed = 42);

// Subdivide, then collapse back to twice the original face count.
TriMesh remesh_updown(const TriMesh& mesh, std::uint64_t seed = 42);

// Stand-in for isotropic remeshing: subdivide, then collapse back to the original
// face count. Shortest-first collapses equalize edge lengths.
TriMesh remesh_iso(const TriMesh& mesh, std::uint64_t seed = 42);

}  // namespace varireg
