#pragma once

#include <string>

#include "varireg/measures/varifold.hpp"

namespace varireg {

// Bounded Lipschitz test functions u(x, n) on R^3 x S^2.
//   constant          u = value
//   gaussian_bump     u = exp(-|x - p|^2 / s^2)
//   normal_alignment  u = <n, v>
//   mixed             u = exp(-|x - p|^2 / s^2) (1 + <n, v>)
// Lipschitz constants are taken for the distance |x - y| + |n - m|.
struct ProbeFunction {
  enum class Kind { constant, gaussian_bump, normal_alignment, mixed };

  Kind kind = Kind::constant;
  double value = 1.0;               // constant
  Vec3 center = Vec3::Zero();       // gaussian_bump, mixed
  double width = 1.0;               // gaussian_bump, mixed
  Vec3 direction = Vec3::UnitZ();   // normal_alignment, mixed

  static ProbeFunction constant_probe(double value = 1.0);
  static ProbeFunction gaussian_bump(const Vec3& center, double width);
  static ProbeFunction normal_alignment(const Vec3& direction);
  static ProbeFunction mixed(const Vec3& center, double width, const Vec3& direction);

  double operator()(const Vec3& x, const Vec3& n) const;
  double sup_norm() const;
  double lipschitz() const;
  std::string describe() const;
};

// sum_atoms weight * u(center, normal)
double probe_integral(const DiscreteVarifold& mu, const ProbeFunction& probe);

}  // namespace varireg
