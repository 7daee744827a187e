#pragma once

#include <Eigen/Core>

#include "varireg/mesh/mesh.hpp"

namespace varireg {

// x -> scale * rotation * x + translation
struct SimilarityTransform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Vec3 translation = Vec3::Zero();
  double scale = 1.0;

  Vec3 apply(const Vec3& x) const { return scale * (rotation * x) + translation; }
  TriMesh apply(const TriMesh& mesh) const;
  SimilarityTransform inverse() const;
  // (*this)(other(x))
  SimilarityTransform compose(const SimilarityTransform& other) const;

  static SimilarityTransform identity() { return {}; }
};

struct AlignmentTrace {
  std::vector<double> rms;  // symmetric RMS correspondence distance per iteration
};

// Scaled ICP between vertex sets. Starts from centroid and RMS-radius alignment
// (rotation identity), then alternates symmetric nearest-vertex correspondences
// with a closed-form similarity fit. Returns the transform that maps `target` into
// the frame of `source`. Throws Error(degenerate_configuration) when either vertex
// set is (nearly) collinear.
SimilarityTransform similarity_align(const TriMesh& source, const TriMesh& target, int iterations,
                                     AlignmentTrace* trace = nullptr);

}  // namespace varireg
