#include "varireg/measures/probe.hpp"

#include <cmath>
#include <fmt/format.h>

#include "varireg/common/error.hpp"

namespace varireg {

ProbeFunction ProbeFunction::constant_probe(double value) {
  ProbeFunction p;
  p.kind = Kind::constant;
  p.value = value;
  return p;
}

ProbeFunction ProbeFunction::gaussian_bump(const Vec3& center, double width) {
  if (!(width > 0.0)) throw Error(Errc::invalid_argument, "probe width must be positive");
  ProbeFunction p;
  p.kind = Kind::gaussian_bump;
  p.center = center;
  p.width = width;
  return p;
}

ProbeFunction ProbeFunction::normal_alignment(const Vec3& direction) {
  ProbeFunction p;
  p.kind = Kind::normal_alignment;
  p.direction = direction;
  return p;
}

ProbeFunction ProbeFunction::mixed(const Vec3& center, double width, const Vec3& direction) {
  if (!(width > 0.0)) throw Error(Errc::invalid_argument, "probe width must be positive");
  ProbeFunction p;
  p.kind = Kind::mixed;
  p.center = center;
  p.width = width;
  p.direction = direction;
  return p;
}

double ProbeFunction::operator()(const Vec3& x, const Vec3& n) const {
  switch (kind) {
    case Kind::constant: return value;
    case Kind::gaussian_bump: return std::exp(-(x - center).squaredNorm() / (width * width));
    case Kind::normal_alignment: return n.dot(direction);
    case Kind::mixed: return std::exp(-(x - center).squaredNorm() / (width * width)) * (1.0 + n.dot(direction));
  }
  return 0.0;
}

double ProbeFunction::sup_norm() const {
  switch (kind) {
    case Kind::constant: return std::abs(value);
    case Kind::gaussian_bump: return 1.0;
    case Kind::normal_alignment: return direction.norm();
    case Kind::mixed: return 1.0 + direction.norm();
  }
  return 0.0;
}

double ProbeFunction::lipschitz() const {
  // max |d/dr exp(-r^2/s^2)| = sqrt(2)/s * exp(-1/2), reached at r = s/sqrt(2)
  const double bump_slope = std::sqrt(2.0) / width * std::exp(-0.5);
  switch (kind) {
    case Kind::constant: return 0.0;
    case Kind::gaussian_bump: return bump_slope;
    case Kind::normal_alignment: return direction.norm();
    case Kind::mixed: return std::max(bump_slope * (1.0 + direction.norm()), direction.norm());
  }
  return 0.0;
}

std::string ProbeFunction::describe() const {
  switch (kind) {
    case Kind::constant: return fmt::format("constant({})", value);
    case Kind::gaussian_bump:
      return fmt::format("gaussian_bump(p=({},{},{}), s={})", center.x(), center.y(), center.z(), width);
    case Kind::normal_alignment:
      return fmt::format("normal_alignment(v=({},{},{}))", direction.x(), direction.y(), direction.z());
    case Kind::mixed:
      return fmt::format("mixed(p=({},{},{}), s={}, v=({},{},{}))", center.x(), center.y(), center.z(), width,
                         direction.x(), direction.y(), direction.z());
  }
  return "?";
}

double probe_integral(const DiscreteVarifold& mu, const ProbeFunction& probe) {
  // Neumaier summation; convergence studies look at differences near 1e-12
  double sum = 0.0;
  double comp = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double term = mu.weights[i] * probe(mu.centers[i], mu.normals[i]);
    const double t = sum + term;
    comp += std::abs(sum) >= std::abs(term) ? (sum - t) + term : (term - t) + sum;
    sum = t;
  }
  return sum + comp;
}

}  // namespace varireg
