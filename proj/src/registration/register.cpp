#include "varireg/registration/register.hpp"

#include <chrono>
#include <cmath>

#include <fmt/format.h>

#include "varireg/baselines/regularizers.hpp"
#include "varireg/common/error.hpp"
#include "varireg/mesh/smoothing.hpp"

namespace varireg {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool window_stalled(const std::vector<TraceRow>& trace, const StopRule& rule) {
  const std::size_t w = static_cast<std::size_t>(rule.window);
  if (trace.size() < 2 * w) return false;
  double prev = 0.0, cur = 0.0;
  const std::size_t n = trace.size();
  for (std::size_t i = n - 2 * w; i < n - w; ++i) prev += trace[i].total;
  for (std::size_t i = n - w; i < n; ++i) cur += trace[i].total;
  prev /= static_cast<double>(w);
  cur /= static_cast<double>(w);
  return prev - cur <= rule.relative_tolerance * std::abs(prev);
}

}  // namespace

MultiScaleSpec resolve_scales(const TriMesh& tmpl, const RegistrationConfig& cfg) {
  if (cfg.scales) return *cfg.scales;
  return default_scales(tmpl, cfg.auto_scales);
}

KernelSpec resolve_eval_kernel(const TriMesh& tmpl, const RegistrationConfig& cfg) {
  KernelSpec k = cfg.eval_kernel;
  if (!(k.sigma > 0.0)) k.sigma = 10.0 * mesh_stats(tmpl).mean_triangle_diameter;
  k.validate();
  return k;
}

RegistrationResult register_meshes(const TriMesh& tmpl, const TriMesh& target, const RegistrationConfig& cfg,
                                   const TraceCallback& on_iteration) {
  cfg.validate();
  require_valid(tmpl);
  require_valid(target);
  const auto t_start = Clock::now();

  RegistrationResult out;
  out.transform = cfg.prealign ? similarity_align(tmpl, target, cfg.align_iterations) : SimilarityTransform{};
  out.aligned_target = out.transform.apply(target);
  out.scales = resolve_scales(tmpl, cfg);

  const GmObjective objective(out.aligned_target, out.scales, cfg.reduction);
  const bool use_edge = cfg.edge_weight > 0.0;
  const bool use_lap = cfg.laplacian_weight > 0.0;

  TriMesh x = tmpl;
  const std::size_t nv = x.vertices.size();
  std::vector<Vec3> m(nv, Vec3::Zero()), v(nv, Vec3::Zero());
  double beta1_t = 1.0, beta2_t = 1.0;
  const auto t_opt = Clock::now();

  for (int step = 0;; ++step) {
    LossAndGradient lg = objective.loss_and_gradient(x);
    TraceRow row;
    row.iteration = step;
    row.data = lg.loss.total;
    row.per_scale = lg.loss.per_scale;
    if (use_edge) {
      RegularizerEval e = edge_loss_gradient(x, tmpl);
      row.edge = e.value;
      for (std::size_t i = 0; i < nv; ++i) lg.gradient[i] += cfg.edge_weight * e.gradient[i];
    }
    if (use_lap) {
      RegularizerEval l = laplacian_magnitude_gradient(x);
      row.laplacian = l.value;
      for (std::size_t i = 0; i < nv; ++i) lg.gradient[i] += cfg.laplacian_weight * l.gradient[i];
    }
    row.total = row.data + cfg.edge_weight * row.edge + cfg.laplacian_weight * row.laplacian;
    row.elapsed = seconds_since(t_opt);
    if (!std::isfinite(row.total)) {
      throw Error(Errc::non_finite, fmt::format("loss became non-finite at iteration {}", step));
    }
    out.loss_trace.push_back(row);
    if (on_iteration) on_iteration(row);

    if (window_stalled(out.loss_trace, cfg.stop)) {
      out.converged = true;
      break;
    }
    if (step >= cfg.stop.max_iterations) break;

    const AdamConfig& a = cfg.adam;
    beta1_t *= a.beta1;
    beta2_t *= a.beta2;
    const double c1 = 1.0 / (1.0 - beta1_t);
    const double c2 = 1.0 / (1.0 - beta2_t);
    for (std::size_t i = 0; i < nv; ++i) {
      const Vec3& g = lg.gradient[i];
      m[i] = a.beta1 * m[i] + (1.0 - a.beta1) * g;
      v[i] = a.beta2 * v[i] + (1.0 - a.beta2) * g.cwiseProduct(g);
      const Vec3 mhat = m[i] * c1;
      const Vec3 vhat = v[i] * c2;
      x.vertices[i] -= a.step_size * mhat.cwiseQuotient((vhat.cwiseSqrt().array() + a.epsilon).matrix());
    }
    out.iterations_used = step + 1;
  }

  if (cfg.smoothing.enabled) {
    x = taubin_smooth(x, cfg.smoothing.lambda, cfg.smoothing.mu, cfg.smoothing.iterations);
  }
  out.registered = std::move(x);

  std::optional<SinkhornConfig> sk;
  if (cfg.eval_sinkhorn) {
    SinkhornConfig s;
    s.epsilon = cfg.sinkhorn_epsilon;
    sk = s;
  }
  out.report = evaluate_all(out.aligned_target, out.registered, resolve_eval_kernel(tmpl, cfg), sk, cfg.reduction);
  out.wall_time = seconds_since(t_start);
  return out;
}

RegistrationReport registration_report(const RegistrationResult& result, const TriMesh& target,
                                       const KernelSpec& eval_kernel, const ReductionOptions& opts) {
  RegistrationReport r;
  r.metrics = evaluate_all(result.transform.apply(target), result.registered, eval_kernel, std::nullopt, opts);
  if (!result.loss_trace.empty()) {
    r.initial_loss = result.loss_trace.front().total;
    r.final_loss = result.loss_trace.back().total;
    r.final_per_scale = result.loss_trace.back().per_scale;
  }
  r.iterations_used = result.iterations_used;
  r.converged = result.converged;
  r.wall_time = result.wall_time;
  return r;
}

nlohmann::json to_json(const RegistrationReport& r) {
  nlohmann::json j = to_json(r.metrics);
  j["initial_loss"] = r.initial_loss;
  j["final_loss"] = r.final_loss;
  j["final_per_scale"] = r.final_per_scale;
  j["iterations_used"] = r.iterations_used;
  j["converged"] = r.converged;
  j["wall_time"] = r.wall_time;
  return j;
}

std::string trace_csv_header(std::size_t n_scales) {
  std::string h = "iteration,total,data,edge,laplacian";
  for (std::size_t i = 0; i < n_scales; ++i) h += fmt::format(",scale_{}", i);
  return h;
}

std::string to_csv_row(const TraceRow& row) {
  std::string s = fmt::format("{},{},{},{},{}", row.iteration, row.total, row.data, row.edge,
                              row.laplacian);
  for (double p : row.per_scale) s += fmt::format(",{}", p);
  return s;
}

}  // namespace varireg
