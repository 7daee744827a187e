#include "varireg/convergence/surfaces.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include <boost/math/special_functions/legendre.hpp>
#include <fmt/format.h>

#include "varireg/common/error.hpp"
#include "varireg/mesh/primitives.hpp"

namespace varireg {

namespace {

constexpr double kPi = std::numbers::pi;

struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss-Legendre rule on [-1, 1].
const GaussRule& gauss_legendre(int n) {
  static std::mutex mu;
  static std::map<int, GaussRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  if (auto it = cache.find(n); it != cache.end()) return it->second;
  GaussRule rule;
  for (double x : boost::math::legendre_p_zeros<double>(n)) {
    const double dp = boost::math::legendre_p_prime(n, x);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes.push_back(x);
    rule.weights.push_back(w);
    if (x != 0.0) {
      rule.nodes.push_back(-x);
      rule.weights.push_back(w);
    }
  }
  return cache.emplace(n, std::move(rule)).first->second;
}

// Neumaier summation.
struct Sum {
  double s = 0.0, c = 0.0;
  void add(double v) {
    const double t = s + v;
    c += std::abs(s) >= std::abs(v) ? (s - t) + v : (v - t) + s;
    s = t;
  }
  double value() const { return s + c; }
};

double sphere_quadrature(const AnalyticSurface& s, const ProbeFunction& u, int level) {
  const int nz = 4 << level;
  const int nphi = 8 << level;
  const GaussRule& gl = gauss_legendre(nz);
  const double r = s.radius;
  const double dphi = 2.0 * kPi / nphi;
  Sum total;
  // dA = r dz dphi, z = r t
  for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
    const double t = gl.nodes[i];
    const double rho = std::sqrt(std::max(0.0, 1.0 - t * t));
    Sum ring;
    for (int j = 0; j < nphi; ++j) {
      const double phi = dphi * j;
      const Vec3 n(rho * std::cos(phi), rho * std::sin(phi), t);
      ring.add(u(r * n, n));
    }
    total.add(gl.weights[i] * ring.value());
  }
  return total.value() * r * r * dphi;
}

double torus_quadrature(const AnalyticSurface& s, const ProbeFunction& u, int level) {
  const int nu = 16 << level;
  const int nv = 8 << level;
  const double R = s.major, r = s.minor;
  const double du = 2.0 * kPi / nu, dv = 2.0 * kPi / nv;
  Sum total;
  for (int j = 0; j < nv; ++j) {
    const double v = dv * j;
    const double cv = std::cos(v), sv = std::sin(v);
    const double ring_radius = R + r * cv;
    Sum ring;
    for (int i = 0; i < nu; ++i) {
      const double a = du * i;
      const double ca = std::cos(a), sa = std::sin(a);
      const Vec3 n(cv * ca, cv * sa, sv);
      const Vec3 x(ring_radius * ca, ring_radius * sa, r * sv);
      ring.add(u(x, n));
    }
    total.add(r * ring_radius * ring.value());
  }
  return total.value() * du * dv;
}

}  // namespace

AnalyticSurface AnalyticSurface::sphere(double radius) {
  if (!(radius > 0.0)) throw Error(Errc::invalid_argument, "sphere radius must be positive");
  AnalyticSurface s;
  s.kind = Kind::sphere;
  s.radius = radius;
  return s;
}

AnalyticSurface AnalyticSurface::torus(double major, double minor) {
  if (!(minor > 0.0) || !(major > minor)) throw Error(Errc::invalid_argument, "torus needs R > r > 0");
  AnalyticSurface s;
  s.kind = Kind::torus;
  s.major = major;
  s.minor = minor;
  return s;
}

double AnalyticSurface::area() const {
  if (kind == Kind::sphere) return 4.0 * kPi * radius * radius;
  return 4.0 * kPi * kPi * major * minor;
}

double AnalyticSurface::curvature_bound() const {
  if (kind == Kind::sphere) return 1.0 / radius;
  // principal curvatures 1/r and cos v / (R + r cos v); the first dominates for R > r
  return std::max(1.0 / minor, 1.0 / (major - minor));
}

TriMesh AnalyticSurface::sample(int level) const {
  if (level < 0) throw Error(Errc::invalid_argument, "refinement level must be >= 0");
  if (kind == Kind::sphere) return icosphere(level, radius);
  return varireg::torus(major, minor, 16 << level, 4 << level);
}

double AnalyticSurface::implicit(const Vec3& x) const {
  if (kind == Kind::sphere) return x.norm() - radius;
  const double q = std::hypot(x.x(), x.y()) - major;
  return std::hypot(q, x.z()) - minor;
}

Vec3 AnalyticSurface::normal_at(const Vec3& x) const {
  if (kind == Kind::sphere) return x.normalized();
  const double rho = std::hypot(x.x(), x.y());
  const Vec3 ring(major * x.x() / rho, major * x.y() / rho, 0.0);
  return (x - ring).normalized();
}

std::string AnalyticSurface::describe() const {
  if (kind == Kind::sphere) return fmt::format("sphere(radius={})", radius);
  return fmt::format("torus(R={}, r={})", major, minor);
}

QuadratureResult continuous_probe_quadrature(const AnalyticSurface& s, const ProbeFunction& u, int quadrature_level,
                                             int max_level) {
  if (quadrature_level < 0 || max_level <= quadrature_level) {
    throw Error(Errc::invalid_argument, "quadrature levels must satisfy 0 <= level < max_level");
  }
  auto eval = [&](int level) {
    return s.kind == AnalyticSurface::Kind::sphere ? sphere_quadrature(s, u, level) : torus_quadrature(s, u, level);
  };
  const double floor = 1e-14 * u.sup_norm() * s.area();
  double prev = eval(quadrature_level);
  for (int level = quadrature_level + 1; level <= max_level; ++level) {
    const double cur = eval(level);
    if (std::abs(cur - prev) <= 1e-8 * std::abs(cur) + floor) return {cur, level};
    prev = cur;
  }
  throw Error(Errc::non_stabilizing_quadrature,
              fmt::format("quadrature for {} on {} did not stabilize by level {}", u.describe(), s.describe(),
                          max_level));
}

double continuous_probe_integral(const AnalyticSurface& s, const ProbeFunction& u, int quadrature_level) {
  return continuous_probe_quadrature(s, u, quadrature_level).value;
}

}  // namespace varireg
