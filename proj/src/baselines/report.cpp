#include "varireg/baselines/report.hpp"

#include <chrono>
#include <cmath>

#include <fmt/format.h>

#include "varireg/baselines/point_metrics.hpp"

namespace varireg {

namespace {

template <class F>
auto timed(std::map<std::string, double>& runtimes, const std::string& name, F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  auto result = f();
  const auto t1 = std::chrono::steady_clock::now();
  // never report zero: downstream tooling treats 0 as "not run"
  runtimes[name] = std::max(std::chrono::duration<double>(t1 - t0).count(), 1e-9);
  return result;
}

}  // namespace

bool MetricReport::all_finite() const {
  bool ok = std::isfinite(hausdorff) && std::isfinite(chamfer) && std::isfinite(chamfer_directed) &&
            std::isfinite(varifold_distance);
  if (sinkhorn) ok = ok && std::isfinite(*sinkhorn);
  return ok;
}

MetricReport evaluate_all(const TriMesh& x, const TriMesh& xhat, const KernelSpec& eval_kernel,
                          const std::optional<SinkhornConfig>& sinkhorn, const ReductionOptions& opts) {
  require_valid(x);
  require_valid(xhat);
  MetricReport r;
  r.eval_kernel = eval_kernel;
  r.area_x = total_area(x);
  r.area_xhat = total_area(xhat);
  r.hausdorff = timed(r.runtimes, "hausdorff", [&] { return hausdorff(x, xhat); });
  const auto cd = timed(r.runtimes, "chamfer", [&] { return chamfer(x, xhat); });
  r.chamfer = cd.symmetric;
  r.chamfer_directed = cd.directed;
  r.varifold_distance = timed(r.runtimes, "varifold", [&] { return gm_loss(x, xhat, eval_kernel, opts); });
  if (sinkhorn) {
    const auto sd = timed(r.runtimes, "sinkhorn",
                          [&] { return sinkhorn_divergence(area_measure(x), area_measure(xhat), *sinkhorn); });
    r.sinkhorn = sd.value;
    r.sinkhorn_converged = sd.converged;
    r.sinkhorn_config = *sinkhorn;
  }
  return r;
}

nlohmann::json to_json(const MetricReport& r) {
  nlohmann::json j;
  j["hausdorff"] = r.hausdorff;
  j["chamfer"] = r.chamfer;
  j["chamfer_directed"] = r.chamfer_directed;
  j["varifold"] = r.varifold_distance;
  j["eval_kernel"] = to_key_values(r.eval_kernel);
  if (r.sinkhorn) {
    j["sinkhorn"] = *r.sinkhorn;
    j["sinkhorn_epsilon"] = r.sinkhorn_config->epsilon;
    j["sinkhorn_p"] = r.sinkhorn_config->p;
    j["sinkhorn_converged"] = r.sinkhorn_converged;
    j["sinkhorn_note"] = "unit-mass measures; total areas given in area_x and area_xhat";
  } else {
    j["sinkhorn"] = nullptr;
  }
  j["area_x"] = r.area_x;
  j["area_xhat"] = r.area_xhat;
  j["runtimes"] = r.runtimes;
  return j;
}

std::string csv_header() {
  return "hausdorff,chamfer,chamfer_directed,varifold,sinkhorn,runtime_hausdorff,runtime_chamfer,runtime_varifold,"
         "runtime_sinkhorn";
}

std::string to_csv_row(const MetricReport& r) {
  auto rt = [&](const char* name) {
    auto it = r.runtimes.find(name);
    return it == r.runtimes.end() ? std::string() : fmt::format("{:.6g}", it->second);
  };
  return fmt::format("{},{},{},{},{},{},{},{},{}", r.hausdorff, r.chamfer, r.chamfer_directed,
                     r.varifold_distance, r.sinkhorn ? fmt::format("{}", *r.sinkhorn) : std::string(),
                     rt("hausdorff"), rt("chamfer"), rt("varifold"), rt("sinkhorn"));
}

}  // namespace varireg
