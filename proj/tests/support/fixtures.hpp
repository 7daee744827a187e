#pragma once

// Shared fixtures and independent oracles for the test suites. Oracles here are
// written from the definitions, without reusing library internals.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Geometry>

#include "varireg/common/rng.hpp"
#include "varireg/measures/kernels.hpp"
#include "varireg/mesh/mesh.hpp"
#include "varireg/mesh/primitives.hpp"

namespace varireg::testing {

inline Vec3 random_unit(CounterRng& rng) {
  for (;;) {
    Vec3 v(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    const double n = v.norm();
    if (n > 0.1 && n <= 1.0) return v / n;
  }
}

inline Eigen::Matrix3d random_rotation(CounterRng& rng, double max_angle = M_PI) {
  return Eigen::AngleAxisd(rng.uniform(-max_angle, max_angle), random_unit(rng)).toRotationMatrix();
}

// Icosphere with every vertex pushed along a random direction by up to `jitter`.
inline TriMesh jittered_sphere(int level, double jitter, std::uint64_t seed) {
  CounterRng rng(seed, 1);
  TriMesh m = icosphere(level);
  for (auto& v : m.vertices) v += jitter * rng.uniform() * random_unit(rng);
  return m;
}

// Small open mesh: a jittered grid patch lifted out of plane, n x n cells.
inline TriMesh random_patch(int n, std::uint64_t seed, double jitter = 0.2) {
  CounterRng rng(seed, 2);
  TriMesh m = grid(n, n, 1.0 / n);
  for (auto& v : m.vertices) {
    v.x() += jitter / n * rng.uniform(-1, 1);
    v.y() += jitter / n * rng.uniform(-1, 1);
    v.z() = 0.3 * std::sin(2.0 * v.x() + 0.5) * std::cos(1.5 * v.y()) + jitter / n * rng.uniform(-1, 1);
  }
  return m;
}

// Radial Gaussian bump of height `amplitude` around `pole` on a mesh centered at
// the origin.
inline TriMesh radial_bump(const TriMesh& mesh, double amplitude, const Vec3& pole = Vec3::UnitZ(),
                           double width = 0.5) {
  TriMesh out = mesh;
  for (auto& v : out.vertices) v += amplitude * std::exp(-(v - pole).squaredNorm() / (width * width)) * v.normalized();
  return out;
}

inline TriMesh bump_target(const TriMesh& tmpl) { return radial_bump(tmpl, 0.05 * bbox_diagonal(tmpl)); }

inline TriMesh transformed(const TriMesh& m, double s, const Eigen::Matrix3d& R, const Vec3& t) {
  TriMesh out = m;
  for (auto& v : out.vertices) v = s * (R * v) + t;
  return out;
}

inline TriMesh face_permuted(const TriMesh& m, std::uint64_t seed) {
  CounterRng rng(seed, 3);
  TriMesh out = m;
  for (std::size_t i = out.faces.size(); i > 1; --i) {
    std::swap(out.faces[i - 1], out.faces[rng.next_u64() % i]);
  }
  // rotate the corner order as well; orientation is preserved
  for (std::size_t i = 0; i < out.faces.size(); ++i) {
    const auto f = out.faces[i];
    if (i % 3 == 1) out.faces[i] = {f[1], f[2], f[0]};
    if (i % 3 == 2) out.faces[i] = {f[2], f[0], f[1]};
  }
  return out;
}

inline TriMesh vertex_permuted(const TriMesh& m, std::uint64_t seed) {
  CounterRng rng(seed, 4);
  std::vector<std::int32_t> perm(m.vertices.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<std::int32_t>(i);
  for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng.next_u64() % i]);
  TriMesh out;
  out.vertices.resize(m.vertices.size());
  for (std::size_t i = 0; i < perm.size(); ++i) out.vertices[static_cast<std::size_t>(perm[i])] = m.vertices[i];
  for (const auto& f : m.faces) out.faces.push_back({perm[f[0]], perm[f[1]], perm[f[2]]});
  return out;
}

// ---- oracles

inline double oracle_area(const Vec3& p, const Vec3& q, const Vec3& r) { return 0.5 * (q - p).cross(r - p).norm(); }

// Direct double sum from the definition: centers, unit normals and areas are
// recomputed per face.
inline double oracle_inner_product(const TriMesh& a, const TriMesh& b, const KernelSpec& k) {
  auto atoms = [](const TriMesh& m) {
    std::vector<std::array<Vec3, 2>> at;
    std::vector<double> w;
    for (const auto& f : m.faces) {
      const Vec3 &p = m.vertices[f[0]], &q = m.vertices[f[1]], &r = m.vertices[f[2]];
      const Vec3 cr = (q - p).cross(r - p);
      if (cr.norm() == 0.0) continue;
      at.push_back({(p + q + r) / 3.0, cr.normalized()});
      w.push_back(0.5 * cr.norm());
    }
    return std::make_pair(at, w);
  };
  auto [aa, wa] = atoms(a);
  auto [bb, wb] = atoms(b);
  long double sum = 0.0L;
  for (std::size_t i = 0; i < aa.size(); ++i) {
    for (std::size_t j = 0; j < bb.size(); ++j) {
      const double r = (aa[i][0] - bb[j][0]).norm();
      double rho = 0.0;
      switch (k.position) {
        case PositionKernel::gaussian: rho = std::exp(-r * r / (k.sigma * k.sigma)); break;
        case PositionKernel::cauchy: rho = 1.0 / (1.0 + r * r / (k.sigma * k.sigma)); break;
        case PositionKernel::exponential: rho = std::exp(-r / k.sigma); break;
      }
      const double s = aa[i][1].dot(bb[j][1]);
      double gamma = 0.0;
      switch (k.normal) {
        case NormalKernel::current: gamma = s; break;
        case NormalKernel::varifold: gamma = s * s; break;
        case NormalKernel::oriented_varifold: gamma = std::exp(s / k.oriented_sharpness); break;
      }
      sum += static_cast<long double>(wa[i] * wb[j] * rho * gamma);
    }
  }
  return static_cast<double>(sum);
}

inline double oracle_gm_loss(const TriMesh& a, const TriMesh& b, const KernelSpec& k) {
  return oracle_inner_product(a, a, k) + oracle_inner_product(b, b, k) - 2.0 * oracle_inner_product(a, b, k);
}

inline double brute_min_d2(const Vec3& q, const std::vector<Vec3>& pts) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : pts) {
    const double dx = q.x() - p.x(), dy = q.y() - p.y(), dz = q.z() - p.z();
    best = std::min(best, dx * dx + dy * dy + dz * dz);
  }
  return best;
}

inline double brute_hausdorff(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  double h = 0.0;
  for (const auto& p : a) h = std::max(h, brute_min_d2(p, b));
  for (const auto& p : b) h = std::max(h, brute_min_d2(p, a));
  return std::sqrt(h);
}

// (directed, symmetric) with the 1/n_X normalization on both directed terms.
inline std::pair<double, double> brute_chamfer(const std::vector<Vec3>& x, const std::vector<Vec3>& xhat) {
  double d1 = 0.0, d2 = 0.0;
  for (const auto& q : xhat) d1 += brute_min_d2(q, x);
  for (const auto& p : x) d2 += brute_min_d2(p, xhat);
  d1 /= static_cast<double>(x.size());
  d2 /= static_cast<double>(xhat.size());
  return {d1, d1 + d2};
}

}  // namespace varireg::testing
