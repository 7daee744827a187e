#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace varireg {

enum class PositionKernel { gaussian, cauchy, exponential };
enum class NormalKernel { current, varifold, oriented_varifold };

std::string_view to_string(PositionKernel k);
std::string_view to_string(NormalKernel k);
PositionKernel parse_position_kernel(std::string_view name);
NormalKernel parse_normal_kernel(std::string_view name);

// k((x, n), (y, m)) = rho(|x - y|) * gamma(<n, m>)
//   gaussian     rho(r) = exp(-r^2 / sigma^2)
//   cauchy       rho(r) = 1 / (1 + r^2 / sigma^2)
//   exponential  rho(r) = exp(-r / sigma)
//   current            gamma(s) = s
//   varifold           gamma(s) = s^2
//   oriented_varifold  gamma(s) = exp(s / oriented_sharpness)
struct KernelSpec {
  PositionKernel position = PositionKernel::gaussian;
  double sigma = 1.0;
  NormalKernel normal = NormalKernel::varifold;
  double oriented_sharpness = 0.5;

  void validate() const;
  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

struct ScaleTerm {
  KernelSpec kernel;
  double lambda = 1.0;
  friend bool operator==(const ScaleTerm&, const ScaleTerm&) = default;
};

// L = sum_i lambda_i L_{k_i}
struct MultiScaleSpec {
  std::vector<ScaleTerm> terms;

  void validate() const;
  std::size_t size() const { return terms.size(); }
  friend bool operator==(const MultiScaleSpec&, const MultiScaleSpec&) = default;
};

MultiScaleSpec single_scale(const KernelSpec& k, double lambda = 1.0);

// Geometric sigma ladder with lambda_i = (sigma_i / sigma_max)^2.
MultiScaleSpec geometric_ladder(double sigma_min, double sigma_max, int n_scales,
                                PositionKernel position = PositionKernel::gaussian,
                                NormalKernel normal = NormalKernel::varifold);

double position_kernel(PositionKernel kind, double sigma, double r2);
// d rho / d(r^2); zero at r = 0 for the exponential kernel, whose gradient is
// undefined there and vanishes by symmetry.
double position_kernel_dr2(PositionKernel kind, double sigma, double r2);
double normal_kernel(NormalKernel kind, double sharpness, double s);
double normal_kernel_ds(NormalKernel kind, double sharpness, double s);

using KeyValues = std::map<std::string, std::string>;

// Flat key-value form:
//   count = N
//   position_i = gaussian|cauchy|exponential
//   sigma_i = <decimal>
//   normal_i = current|varifold|oriented_varifold
//   sharpness_i = <decimal>
//   lambda_i = <decimal>
KeyValues to_key_values(const MultiScaleSpec& spec);
MultiScaleSpec multiscale_from_key_values(const KeyValues& kv);

// Single kernel form: position, sigma, normal, sharpness.
KeyValues to_key_values(const KernelSpec& k);
KernelSpec kernel_from_key_values(const KeyValues& kv, const KernelSpec& defaults = {});

}  // namespace varireg
