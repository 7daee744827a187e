#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "varireg/measures/gm_loss.hpp"
#include "varireg/measures/kernels.hpp"

namespace varireg {

struct AdamConfig {
  double step_size = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct StopRule {
  int max_iterations = 2000;
  int window = 10;
  double relative_tolerance = 1e-5;  // on the decrease between consecutive window means
};

struct SmoothingConfig {
  bool enabled = false;
  double lambda = 0.5;
  double mu = -0.53;
  int iterations = 10;
};

struct RegistrationConfig {
  // Explicit multi-scale kernel; when empty, `auto_scales` terms are derived
  // from the template mesh.
  std::optional<MultiScaleSpec> scales;
  int auto_scales = 4;

  AdamConfig adam;
  StopRule stop;
  double edge_weight = 0.0;
  double laplacian_weight = 0.0;
  SmoothingConfig smoothing;

  bool prealign = true;
  int align_iterations = 50;

  // Kernel of the varifold distance in the metric report; sigma <= 0 means
  // ten times the mean triangle diameter of the template.
  KernelSpec eval_kernel{PositionKernel::gaussian, 0.0, NormalKernel::varifold, 0.5};
  bool eval_sinkhorn = false;
  double sinkhorn_epsilon = 1e-3;

  ReductionOptions reduction;
  std::uint64_t seed = 42;
  std::string mesh_format = "obj";

  // Throws Error(invalid_argument) on out-of-range values.
  void validate() const;
};

// INI layout: [scales] [optimizer] [regularizers] [smoothing] [evaluation] [io].
// Unknown sections or keys are rejected with Error(parse).
RegistrationConfig parse_registration_config(std::istream& in);
RegistrationConfig load_registration_config(const std::filesystem::path& path);
std::string to_ini(const RegistrationConfig& cfg);
nlohmann::json to_json(const RegistrationConfig& cfg);

}  // namespace varireg
