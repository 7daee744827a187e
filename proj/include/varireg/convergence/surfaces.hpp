#pragma once

#include <string>

#include "varireg/measures/probe.hpp"
#include "varireg/mesh/mesh.hpp"

namespace varireg {

// Closed surfaces with closed-form area, normals and curvature, centered at the
// origin. The torus has its axis along z.
struct AnalyticSurface {
  enum class Kind { sphere, torus };

  Kind kind = Kind::sphere;
  double radius = 1.0;  // sphere
  double major = 2.0;   // torus R
  double minor = 0.5;   // torus r

  static AnalyticSurface sphere(double radius = 1.0);
  static AnalyticSurface torus(double major = 2.0, double minor = 0.5);

  double area() const;
  // Largest absolute principal curvature.
  double curvature_bound() const;
  // Inscribed mesh with every vertex on the surface. Sphere: projected icosphere
  // subdivision at `level`. Torus: regular (u, v) grid with 4 * 2^level minor and
  // 16 * 2^level major segments. Outward orientation. level >= 0.
  TriMesh sample(int level) const;
  // Signed distance-like residual: 0 exactly on the surface.
  double implicit(const Vec3& x) const;
  Vec3 normal_at(const Vec3& x) const;
  std::string describe() const;
};

// Reference value of the integral of u(x, n_x) over the surface by tensor
// parametric quadrature (sphere: Gauss-Legendre in z times trapezoid in
// longitude; torus: trapezoid in both angles) with exact normals. Doubles the
// node counts from `quadrature_level` until two consecutive estimates agree to
// 1e-8 relative (with an absolute floor of 1e-14 |u|_inf a(S)). Throws
// Error(non_stabilizing_quadrature) when that does not happen by `max_level`.
struct QuadratureResult {
  double value = 0.0;
  int level = 0;
};
QuadratureResult continuous_probe_quadrature(const AnalyticSurface& s, const ProbeFunction& u,
                                             int quadrature_level = 3, int max_level = 9);
double continuous_probe_integral(const AnalyticSurface& s, const ProbeFunction& u, int quadrature_level = 3);

}  // namespace varireg
