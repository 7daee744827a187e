#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <utility>

#include "varireg/mesh/mesh.hpp"

namespace varireg {

// Exact nearest-neighbor queries over a fixed point set (R-tree backed).
class PointIndex {
 public:
  explicit PointIndex(std::span<const Vec3> points);
  ~PointIndex();
  PointIndex(PointIndex&&) noexcept;
  PointIndex& operator=(PointIndex&&) noexcept;

  // (index, squared distance) of the nearest point to q.
  std::pair<std::size_t, double> nearest(const Vec3& q) const;
  std::size_t size() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// dx*dx + dy*dy + dz*dz, evaluated in that order.
inline double squared_distance(const Vec3& a, const Vec3& b) {
  const double dx = a.x() - b.x();
  const double dy = a.y() - b.y();
  const double dz = a.z() - b.z();
  return dx * dx + dy * dy + dz * dz;
}

// (1/n_X) sum |x - xhat|^2 over index-matched vertices. The only metric here that
// needs correspondence: throws Error(size_mismatch) when vertex counts differ.
double mse(const TriMesh& x, const TriMesh& xhat);

// Symmetric Hausdorff distance between the two vertex sets.
double hausdorff(const TriMesh& x, const TriMesh& xhat);
double hausdorff(std::span<const Vec3> x, std::span<const Vec3> xhat);

struct ChamferDistance {
  double symmetric = 0.0;
  double directed = 0.0;
};

// directed  = (1/n_X)    sum_{xhat} min_x |xhat - x|^2
// symmetric = directed + (1/n_Xhat) sum_{x} min_xhat |xhat - x|^2
// Operates on vertex sets; nearest neighbors are exact.
ChamferDistance chamfer(const TriMesh& x, const TriMesh& xhat);
ChamferDistance chamfer(std::span<const Vec3> x, std::span<const Vec3> xhat);

}  // namespace varireg
