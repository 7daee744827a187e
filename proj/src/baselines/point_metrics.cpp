#include "varireg/baselines/point_metrics.hpp"

#include <algorithm>
#include <vector>

#include <boost/geometry.hpp>
#include <boost/geometry/index/rtree.hpp>

#include "varireg/common/error.hpp"

namespace bg = boost::geometry;
namespace bgi = boost::geometry::index;

namespace varireg {

using BoostPoint = bg::model::point<double, 3, bg::cs::cartesian>;
using Entry = std::pair<BoostPoint, std::size_t>;

struct PointIndex::Impl {
  std::vector<Vec3> points;
  bgi::rtree<Entry, bgi::rstar<16>> tree;
};

PointIndex::PointIndex(std::span<const Vec3> points) : impl_(std::make_unique<Impl>()) {
  if (points.empty()) throw Error(Errc::empty_mesh, "cannot index an empty point set");
  impl_->points.assign(points.begin(), points.end());
  std::vector<Entry> entries;
  entries.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i)
    entries.emplace_back(BoostPoint(points[i].x(), points[i].y(), points[i].z()), i);
  impl_->tree = bgi::rtree<Entry, bgi::rstar<16>>(entries.begin(), entries.end());
}

PointIndex::~PointIndex() = default;
PointIndex::PointIndex(PointIndex&&) noexcept = default;
PointIndex& PointIndex::operator=(PointIndex&&) noexcept = default;

std::size_t PointIndex::size() const { return impl_->points.size(); }

std::pair<std::size_t, double> PointIndex::nearest(const Vec3& q) const {
  const BoostPoint bq(q.x(), q.y(), q.z());
  std::size_t best = 0;
  double best_d2 = 0.0;
  bool first = true;
  // ask for a couple of candidates so ties at rounding level resolve by our own
  // distance formula rather than the R-tree's
  for (auto it = impl_->tree.qbegin(bgi::nearest(bq, 2)); it != impl_->tree.qend(); ++it) {
    const double d2 = squared_distance(q, impl_->points[it->second]);
    if (first || d2 < best_d2 || (d2 == best_d2 && it->second < best)) {
      best = it->second;
      best_d2 = d2;
      first = false;
    }
  }
  return {best, best_d2};
}

double mse(const TriMesh& x, const TriMesh& xhat) {
  if (x.vertices.size() != xhat.vertices.size())
    throw Error(Errc::size_mismatch, "MSE needs index-matched vertices (" + std::to_string(x.vertices.size()) +
                                         " vs " + std::to_string(xhat.vertices.size()) + ")");
  if (x.vertices.empty()) throw Error(Errc::empty_mesh, "MSE of empty meshes");
  double sum = 0.0;
  for (std::size_t i = 0; i < x.vertices.size(); ++i) sum += squared_distance(x.vertices[i], xhat.vertices[i]);
  return sum / static_cast<double>(x.vertices.size());
}

namespace {

// sum over `from` of squared distance to the nearest point of `to`, plus the max.
std::pair<double, double> directed_sums(std::span<const Vec3> from, const PointIndex& to) {
  double sum = 0.0;
  double worst = 0.0;
  for (const auto& p : from) {
    const double d2 = to.nearest(p).second;
    sum += d2;
    worst = std::max(worst, d2);
  }
  return {sum, worst};
}

void require_points(std::span<const Vec3> a, std::span<const Vec3> b) {
  if (a.empty() || b.empty()) throw Error(Errc::empty_mesh, "point metric of an empty set");
}

}  // namespace

double hausdorff(std::span<const Vec3> x, std::span<const Vec3> xhat) {
  require_points(x, xhat);
  const PointIndex ix(x), ixhat(xhat);
  const double a = directed_sums(x, ixhat).second;
  const double b = directed_sums(xhat, ix).second;
  return std::sqrt(std::max(a, b));
}

double hausdorff(const TriMesh& x, const TriMesh& xhat) { return hausdorff(x.vertices, xhat.vertices); }

ChamferDistance chamfer(std::span<const Vec3> x, std::span<const Vec3> xhat) {
  require_points(x, xhat);
  const PointIndex ix(x), ixhat(xhat);
  ChamferDistance c;
  c.directed = directed_sums(xhat, ix).first / static_cast<double>(x.size());
  c.symmetric = c.directed + directed_sums(x, ixhat).first / static_cast<double>(xhat.size());
  return c;
}

ChamferDistance chamfer(const TriMesh& x, const TriMesh& xhat) { return chamfer(x.vertices, xhat.vertices); }

}  // namespace varireg
