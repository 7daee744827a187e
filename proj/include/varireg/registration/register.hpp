#pragma once

#include <functional>
#include <string>
#include <vector>

#include "varireg/baselines/report.hpp"
#include "varireg/registration/config.hpp"
#include "varireg/registration/similarity.hpp"

namespace varireg {

struct TraceRow {
  int iteration = 0;
  double total = 0.0;      // data term + weighted regularizers
  double data = 0.0;       // sum_i lambda_i L_i
  double edge = 0.0;       // unweighted
  double laplacian = 0.0;  // unweighted
  std::vector<double> per_scale;
  double elapsed = 0.0;  // seconds since the optimizer started
};

struct RegistrationResult {
  TriMesh registered;      // template connectivity, template frame
  TriMesh aligned_target;  // transform applied to the target
  SimilarityTransform transform;  // target -> template frame
  MultiScaleSpec scales;
  std::vector<TraceRow> loss_trace;  // loss at every iterate, the first row is the template
  MetricReport report;  // aligned_target vs registered
  int iterations_used = 0;  // optimizer steps taken
  bool converged = false;   // stopped by the window rule rather than the iteration cap
  double wall_time = 0.0;

  // `registered` mapped back into the target frame.
  TriMesh registered_in_target_frame() const { return transform.inverse().apply(registered); }
};

using TraceCallback = std::function<void(const TraceRow&)>;

// Similarity pre-alignment, then Adam on per-vertex displacements of `tmpl`
// minimizing the multi-scale varifold loss against the aligned target plus
// optional edge and Laplacian penalties. Stops when the mean of the last `window`
// losses is less than `relative_tolerance` below the mean of the window before
// it, or after `max_iterations` steps. Optional Taubin smoothing is applied to
// the result. Throws Error(non_finite) if the loss diverges.
RegistrationResult register_meshes(const TriMesh& tmpl, const TriMesh& target, const RegistrationConfig& cfg,
                                   const TraceCallback& on_iteration = {});

// Scales used for a given template: explicit ones, or the automatic ladder.
MultiScaleSpec resolve_scales(const TriMesh& tmpl, const RegistrationConfig& cfg);
// Evaluation kernel with an automatic sigma resolved against `tmpl`.
KernelSpec resolve_eval_kernel(const TriMesh& tmpl, const RegistrationConfig& cfg);

struct RegistrationReport {
  MetricReport metrics;  // target (in the template frame) vs registered
  double initial_loss = 0.0;
  double final_loss = 0.0;
  std::vector<double> final_per_scale;
  int iterations_used = 0;
  bool converged = false;
  double wall_time = 0.0;
};

RegistrationReport registration_report(const RegistrationResult& result, const TriMesh& target,
                                       const KernelSpec& eval_kernel, const ReductionOptions& opts = {});
nlohmann::json to_json(const RegistrationReport& r);

// Trace CSV carries no timings so that deterministic runs are byte-identical.
std::string trace_csv_header(std::size_t n_scales);
std::string to_csv_row(const TraceRow& row);

}  // namespace varireg
