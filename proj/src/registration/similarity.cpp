#include "varireg/registration/similarity.hpp"

#include <cmath>

#include <Eigen/Geometry>
#include <Eigen/SVD>

#include "varireg/baselines/point_metrics.hpp"
#include "varireg/common/error.hpp"

namespace varireg {

TriMesh SimilarityTransform::apply(const TriMesh& mesh) const {
  TriMesh out = mesh;
  for (auto& v : out.vertices) v = apply(v);
  return out;
}

SimilarityTransform SimilarityTransform::inverse() const {
  SimilarityTransform inv;
  inv.rotation = rotation.transpose();
  inv.scale = 1.0 / scale;
  inv.translation = -inv.scale * (inv.rotation * translation);
  return inv;
}

SimilarityTransform SimilarityTransform::compose(const SimilarityTransform& other) const {
  SimilarityTransform out;
  out.rotation = rotation * other.rotation;
  out.scale = scale * other.scale;
  out.translation = scale * (rotation * other.translation) + translation;
  return out;
}

namespace {

using Points = Eigen::Matrix<double, 3, Eigen::Dynamic>;

Points to_matrix(const std::vector<Vec3>& pts) {
  Points m(3, static_cast<Eigen::Index>(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) m.col(static_cast<Eigen::Index>(i)) = pts[i];
  return m;
}

void require_spread(const std::vector<Vec3>& pts, const char* which) {
  if (pts.size() < 3) throw Error(Errc::degenerate_configuration, std::string(which) + " has fewer than 3 points");
  Points m = to_matrix(pts);
  const Vec3 c = m.rowwise().mean();
  m.colwise() -= c;
  Eigen::JacobiSVD<Points> svd(m);
  const auto sv = svd.singularValues();
  if (!(sv(1) > 1e-9 * sv(0))) {
    throw Error(Errc::degenerate_configuration,
                std::string(which) + " points are collinear; rotation is under-determined");
  }
}

SimilarityTransform from_homogeneous(const Eigen::Matrix4d& h) {
  SimilarityTransform t;
  const Eigen::Matrix3d sr = h.topLeftCorner<3, 3>();
  t.scale = std::cbrt(sr.determinant());
  t.rotation = sr / t.scale;
  t.translation = h.topRightCorner<3, 1>();
  return t;
}

}  // namespace

SimilarityTransform similarity_align(const TriMesh& source, const TriMesh& target, int iterations,
                                     AlignmentTrace* trace) {
  if (source.vertices.empty() || target.vertices.empty()) throw Error(Errc::empty_mesh, "alignment of an empty mesh");
  if (iterations < 1) throw Error(Errc::invalid_argument, "alignment needs at least one iteration");
  require_spread(source.vertices, "source");
  require_spread(target.vertices, "target");

  const std::vector<Vec3>& src = source.vertices;
  const std::vector<Vec3>& tgt = target.vertices;
  const PointIndex src_index(src);

  auto centroid = [](const std::vector<Vec3>& p) {
    Vec3 c = Vec3::Zero();
    for (const auto& v : p) c += v;
    return Vec3(c / static_cast<double>(p.size()));
  };
  auto rms_radius = [](const std::vector<Vec3>& p, const Vec3& c) {
    double s = 0.0;
    for (const auto& v : p) s += (v - c).squaredNorm();
    return std::sqrt(s / static_cast<double>(p.size()));
  };
  const Vec3 cs = centroid(src), ct = centroid(tgt);
  SimilarityTransform current;
  current.scale = rms_radius(src, cs) / rms_radius(tgt, ct);
  current.translation = cs - current.scale * ct;

  std::vector<std::size_t> prev_src_match, prev_tgt_match;
  std::vector<Vec3> moved(tgt.size());
  for (int it = 0; it < iterations; ++it) {
    for (std::size_t j = 0; j < tgt.size(); ++j) moved[j] = current.apply(tgt[j]);
    const PointIndex moved_index(moved);
    // target -> nearest source vertex, and source -> nearest moved target vertex
    std::vector<std::size_t> src_match(tgt.size()), tgt_match(src.size());
    double err = 0.0;
    for (std::size_t j = 0; j < tgt.size(); ++j) {
      auto [i, d2] = src_index.nearest(moved[j]);
      src_match[j] = i;
      err += d2;
    }
    for (std::size_t i = 0; i < src.size(); ++i) {
      auto [j, d2] = moved_index.nearest(src[i]);
      tgt_match[i] = j;
      err += d2;
    }
    if (trace) trace->rms.push_back(std::sqrt(err / static_cast<double>(tgt.size() + src.size())));
    if (src_match == prev_src_match && tgt_match == prev_tgt_match) break;  // fixed point

    Points from(3, static_cast<Eigen::Index>(tgt.size() + src.size()));
    Points to(3, from.cols());
    Eigen::Index k = 0;
    for (std::size_t j = 0; j < tgt.size(); ++j, ++k) {
      from.col(k) = tgt[j];
      to.col(k) = src[src_match[j]];
    }
    for (std::size_t i = 0; i < src.size(); ++i, ++k) {
      from.col(k) = tgt[tgt_match[i]];
      to.col(k) = src[i];
    }
    current = from_homogeneous(Eigen::umeyama(from, to, true));
    prev_src_match = std::move(src_match);
    prev_tgt_match = std::move(tgt_match);
  }
  return current;
}

}  // namespace varireg
