#pragma once

#include <map>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "varireg/baselines/sinkhorn.hpp"
#include "varireg/measures/gm_loss.hpp"

namespace varireg {

struct MetricReport {
  double hausdorff = 0.0;
  double chamfer = 0.0;
  double chamfer_directed = 0.0;
  double varifold_distance = 0.0;  // GM loss at the evaluation kernel
  std::optional<double> sinkhorn;  // per unit mass
  std::optional<SinkhornConfig> sinkhorn_config;
  bool sinkhorn_converged = true;
  // total areas, to rescale the unit-mass Sinkhorn value when needed
  double area_x = 0.0;
  double area_xhat = 0.0;
  KernelSpec eval_kernel;
  std::map<std::string, double> runtimes;  // seconds per metric

  bool all_finite() const;
};

// Hausdorff, Chamfer, varifold distance and, when `sinkhorn` is set, the debiased
// Sinkhorn divergence between x (reference) and xhat (prediction).
MetricReport evaluate_all(const TriMesh& x, const TriMesh& xhat, const KernelSpec& eval_kernel,
                          const std::optional<SinkhornConfig>& sinkhorn = std::nullopt,
                          const ReductionOptions& opts = {});

nlohmann::json to_json(const MetricReport& r);

// Column order is fixed: hausdorff, chamfer, chamfer_directed, varifold, sinkhorn,
// runtime_hausdorff, runtime_chamfer, runtime_varifold, runtime_sinkhorn.
std::string csv_header();
std::string to_csv_row(const MetricReport& r);

}  // namespace varireg
