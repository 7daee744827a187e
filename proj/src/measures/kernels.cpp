#include "varireg/measures/kernels.hpp"

#include <cmath>
#include <fmt/format.h>

#include "varireg/common/error.hpp"

namespace varireg {

std::string_view to_string(PositionKernel k) {
  switch (k) {
    case PositionKernel::gaussian: return "gaussian";
    case PositionKernel::cauchy: return "cauchy";
    case PositionKernel::exponential: return "exponential";
  }
  return "?";
}

std::string_view to_string(NormalKernel k) {
  switch (k) {
    case NormalKernel::current: return "current";
    case NormalKernel::varifold: return "varifold";
    case NormalKernel::oriented_varifold: return "oriented_varifold";
  }
  return "?";
}

PositionKernel parse_position_kernel(std::string_view name) {
  if (name == "gaussian") return PositionKernel::gaussian;
  if (name == "cauchy") return PositionKernel::cauchy;
  if (name == "exponential") return PositionKernel::exponential;
  throw Error(Errc::parse, fmt::format("unknown position kernel '{}'", name));
}

NormalKernel parse_normal_kernel(std::string_view name) {
  if (name == "current") return NormalKernel::current;
  if (name == "varifold") return NormalKernel::varifold;
  if (name == "oriented_varifold") return NormalKernel::oriented_varifold;
  throw Error(Errc::parse, fmt::format("unknown normal kernel '{}'", name));
}

void KernelSpec::validate() const {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw Error(Errc::invalid_argument, "kernel sigma must be positive");
  if (normal == NormalKernel::oriented_varifold && !(oriented_sharpness > 0.0))
    throw Error(Errc::invalid_argument, "oriented varifold sharpness must be positive");
}

void MultiScaleSpec::validate() const {
  if (terms.empty()) throw Error(Errc::invalid_argument, "multi-scale spec needs at least one term");
  for (const auto& t : terms) {
    t.kernel.validate();
    if (!(t.lambda > 0.0) || !std::isfinite(t.lambda))
      throw Error(Errc::invalid_argument, "multi-scale weights must be positive");
  }
}

MultiScaleSpec single_scale(const KernelSpec& k, double lambda) { return MultiScaleSpec{{ScaleTerm{k, lambda}}}; }

MultiScaleSpec geometric_ladder(double sigma_min, double sigma_max, int n_scales, PositionKernel position,
                                NormalKernel normal) {
  if (n_scales < 1) throw Error(Errc::invalid_argument, "need at least one scale");
  if (!(sigma_min > 0.0) || !(sigma_max >= sigma_min)) throw Error(Errc::invalid_argument, "bad sigma range");
  MultiScaleSpec spec;
  for (int i = 0; i < n_scales; ++i) {
    const double sigma =
        n_scales == 1 ? sigma_max : sigma_min * std::pow(sigma_max / sigma_min, static_cast<double>(i) / (n_scales - 1));
    KernelSpec k{position, sigma, normal, 0.5};
    spec.terms.push_back({k, 0.0});
  }
  // the last entry is exactly sigma_max up to pow rounding; pin it
  spec.terms.back().kernel.sigma = sigma_max;
  for (auto& t : spec.terms) {
    const double ratio = t.kernel.sigma / sigma_max;
    t.lambda = ratio * ratio;
  }
  return spec;
}

double position_kernel(PositionKernel kind, double sigma, double r2) {
  switch (kind) {
    case PositionKernel::gaussian: return std::exp(-r2 / (sigma * sigma));
    case PositionKernel::cauchy: return 1.0 / (1.0 + r2 / (sigma * sigma));
    case PositionKernel::exponential: return std::exp(-std::sqrt(r2) / sigma);
  }
  return 0.0;
}

double position_kernel_dr2(PositionKernel kind, double sigma, double r2) {
  switch (kind) {
    case PositionKernel::gaussian: return -std::exp(-r2 / (sigma * sigma)) / (sigma * sigma);
    case PositionKernel::cauchy: {
      const double k = 1.0 / (1.0 + r2 / (sigma * sigma));
      return -k * k / (sigma * sigma);
    }
    case PositionKernel::exponential: {
      if (r2 <= 0.0) return 0.0;
      const double r = std::sqrt(r2);
      return -std::exp(-r / sigma) / (2.0 * r * sigma);
    }
  }
  return 0.0;
}

double normal_kernel(NormalKernel kind, double sharpness, double s) {
  switch (kind) {
    case NormalKernel::current: return s;
    case NormalKernel::varifold: return s * s;
    case NormalKernel::oriented_varifold: return std::exp(s / sharpness);
  }
  return 0.0;
}

double normal_kernel_ds(NormalKernel kind, double sharpness, double s) {
  switch (kind) {
    case NormalKernel::current: return 1.0;
    case NormalKernel::varifold: return 2.0 * s;
    case NormalKernel::oriented_varifold: return std::exp(s / sharpness) / sharpness;
  }
  return 0.0;
}

namespace {

std::string decimal(double v) { return fmt::format("{}", v); }

const std::string& require(const KeyValues& kv, const std::string& key) {
  auto it = kv.find(key);
  if (it == kv.end()) throw Error(Errc::parse, fmt::format("missing key '{}'", key));
  return it->second;
}

double parse_decimal(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw Error(Errc::parse, fmt::format("key '{}': '{}' is not a number", key, text));
  }
}

}  // namespace

KeyValues to_key_values(const MultiScaleSpec& spec) {
  KeyValues kv;
  kv["count"] = std::to_string(spec.terms.size());
  for (std::size_t i = 0; i < spec.terms.size(); ++i) {
    const auto& t = spec.terms[i];
    const auto s = std::to_string(i);
    kv["position_" + s] = std::string(to_string(t.kernel.position));
    kv["sigma_" + s] = decimal(t.kernel.sigma);
    kv["normal_" + s] = std::string(to_string(t.kernel.normal));
    kv["sharpness_" + s] = decimal(t.kernel.oriented_sharpness);
    kv["lambda_" + s] = decimal(t.lambda);
  }
  return kv;
}

MultiScaleSpec multiscale_from_key_values(const KeyValues& kv) {
  const auto& count_text = require(kv, "count");
  const double count = parse_decimal("count", count_text);
  if (count < 1 || count != std::floor(count)) throw Error(Errc::parse, "count must be a positive integer");
  MultiScaleSpec spec;
  for (int i = 0; i < static_cast<int>(count); ++i) {
    const auto s = std::to_string(i);
    ScaleTerm t;
    t.kernel.position = parse_position_kernel(require(kv, "position_" + s));
    t.kernel.sigma = parse_decimal("sigma_" + s, require(kv, "sigma_" + s));
    t.kernel.normal = parse_normal_kernel(require(kv, "normal_" + s));
    if (auto it = kv.find("sharpness_" + s); it != kv.end())
      t.kernel.oriented_sharpness = parse_decimal(it->first, it->second);
    t.lambda = parse_decimal("lambda_" + s, require(kv, "lambda_" + s));
    spec.terms.push_back(t);
  }
  spec.validate();
  return spec;
}

KeyValues to_key_values(const KernelSpec& k) {
  return {{"position", std::string(to_string(k.position))},
          {"sigma", decimal(k.sigma)},
          {"normal", std::string(to_string(k.normal))},
          {"sharpness", decimal(k.oriented_sharpness)}};
}

KernelSpec kernel_from_key_values(const KeyValues& kv, const KernelSpec& defaults) {
  KernelSpec k = defaults;
  if (auto it = kv.find("position"); it != kv.end()) k.position = parse_position_kernel(it->second);
  if (auto it = kv.find("sigma"); it != kv.end()) k.sigma = parse_decimal(it->first, it->second);
  if (auto it = kv.find("normal"); it != kv.end()) k.normal = parse_normal_kernel(it->second);
  if (auto it = kv.find("sharpness"); it != kv.end()) k.oriented_sharpness = parse_decimal(it->first, it->second);
  k.validate();
  return k;
}

}  // namespace varireg
