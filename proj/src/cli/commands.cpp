#include "varireg/cli/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "varireg/baselines/point_metrics.hpp"
#include "varireg/cli/manifest.hpp"
#include "varireg/common/parallel.hpp"
#include "varireg/convergence/study.hpp"
#include "varireg/measures/gradcheck.hpp"
#include "varireg/mesh/mesh_io.hpp"
#include "varireg/mesh/remesh.hpp"
#include "varireg/registration/register.hpp"

namespace varireg::cli {

namespace fs = std::filesystem;

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::non_finite:
    case Errc::degenerate_face:
    case Errc::degenerate_configuration:
    case Errc::non_stabilizing_quadrature:
      return kNonFinite;
    default:
      return kUsage;
  }
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Globals {
  std::uint64_t seed = 42;
  int threads = 0;
  bool deterministic = false;
  bool fast = false;
  std::string manifest;
};

class Context {
 public:
  Context(const Globals& g, std::string command, std::ostream& out, std::ostream& err)
      : g_(g), out(out), err(err), start_(Clock::now()) {
    manifest_.command = std::move(command);
    manifest_.seed = g.seed;
    if (g.threads > 0) set_thread_count(g.threads);
    manifest_.threads = thread_count();
  }

  ReductionOptions reduction(ReductionOptions base) const {
    if (g_.deterministic) base.mode = ReductionMode::deterministic;
    else if (g_.fast) base.mode = ReductionMode::fast;
    return base;
  }

  TriMesh load(const std::string& path) {
    manifest_.input_digests[path] = sha256_file(path);
    return load_mesh(path);
  }

  RegistrationConfig config(const std::string& path) {
    RegistrationConfig cfg;
    if (!path.empty()) {
      manifest_.input_digests[path] = sha256_file(path);
      cfg = load_registration_config(path);
    }
    cfg.reduction = reduction(cfg.reduction);
    cfg.seed = g_.seed;
    return cfg;
  }

  RunManifest& manifest() { return manifest_; }
  void time(const std::string& what, Clock::time_point t0) { manifest_.timings[what] = seconds_since(t0); }

  // --manifest wins; otherwise beside the primary output, else the working directory.
  fs::path manifest_path(const std::optional<fs::path>& beside) const {
    if (!g_.manifest.empty()) return g_.manifest;
    if (beside) return fs::path(beside->string() + ".manifest.json");
    return fs::path("varireg-" + manifest_.command + ".manifest.json");
  }

  int finish(int code, const fs::path& path, const ReductionOptions& opts) {
    manifest_.exit_code = code;
    manifest_.deterministic = opts.mode == ReductionMode::deterministic;
    manifest_.timings["total"] = seconds_since(start_);
    write_manifest(path, manifest_);
    return code;
  }

 private:
  Globals g_;

 public:
  std::ostream& out;
  std::ostream& err;

 private:
  Clock::time_point start_;
  RunManifest manifest_;
};

nlohmann::json stats_json(const MeshStats& s) {
  return {{"vertices", s.num_vertices},
          {"faces", s.num_faces},
          {"max_edge_length", s.max_edge_length},
          {"min_face_angle_deg", s.min_face_angle * 180.0 / M_PI},
          {"total_area", s.total_area},
          {"mean_triangle_diameter", s.mean_triangle_diameter},
          {"bbox_diagonal", s.bbox_diagonal}};
}

void print_stats(std::ostream& out, const std::string& label, const MeshStats& s) {
  fmt::print(out, "{}: {} vertices, {} faces, area {:.9g}, eta {:.6g}, min angle {:.4f} deg, bbox diagonal {:.6g}\n",
             label, s.num_vertices, s.num_faces, s.total_area, s.max_edge_length, s.min_face_angle * 180.0 / M_PI,
             s.bbox_diagonal);
}

// ---- info

struct InfoArgs {
  std::string mesh;
  bool json = false;
};

int cmd_info(Context& ctx, const InfoArgs& a) {
  const auto t0 = Clock::now();
  const TriMesh mesh = ctx.load(a.mesh);
  const auto defects = validate(mesh);
  std::optional<MeshStats> stats;
  bool structural = false;
  for (const auto& d : defects) structural |= d.kind != DefectKind::degenerate_face;
  if (!structural) stats = mesh_stats(mesh);
  ctx.time("info", t0);
  ctx.manifest().config = {{"mesh", a.mesh}, {"json", a.json}};

  if (a.json) {
    nlohmann::json j;
    j["mesh"] = a.mesh;
    if (stats) j["stats"] = stats_json(*stats);
    j["defects"] = nlohmann::json::array();
    for (const auto& d : defects)
      j["defects"].push_back({{"kind", to_string(d.kind)}, {"element", d.element}, {"message", d.message}});
    ctx.out << j.dump(2) << "\n";
  } else {
    if (stats) print_stats(ctx.out, a.mesh, *stats);
    fmt::print(ctx.out, "{} defect(s)\n", defects.size());
    for (const auto& d : defects) fmt::print(ctx.out, "  {} #{}: {}\n", to_string(d.kind), d.element, d.message);
  }
  const int code = defects.empty() ? kOk : kDefects;
  return ctx.finish(code, ctx.manifest_path(std::nullopt), ctx.reduction({}));
}

// ---- metrics

struct MetricsArgs {
  std::string a, b, config, format = "json", out;
  bool sinkhorn = false;
  std::optional<double> epsilon;
};

int cmd_metrics(Context& ctx, const MetricsArgs& a) {
  RegistrationConfig cfg = ctx.config(a.config);
  const TriMesh x = ctx.load(a.a);
  const TriMesh xhat = ctx.load(a.b);
  require_valid(x);
  require_valid(xhat);
  const KernelSpec k = resolve_eval_kernel(x, cfg);
  std::optional<SinkhornConfig> sk;
  if (a.sinkhorn || cfg.eval_sinkhorn) {
    SinkhornConfig s;
    s.epsilon = a.epsilon.value_or(cfg.sinkhorn_epsilon);
    sk = s;
  }
  const auto t0 = Clock::now();
  const MetricReport r = evaluate_all(x, xhat, k, sk, cfg.reduction);
  ctx.time("metrics", t0);

  nlohmann::json c = to_json(cfg);
  c["evaluation"]["sigma"] = k.sigma;
  c["evaluation"]["sinkhorn"] = sk.has_value();
  if (sk) c["evaluation"]["sinkhorn_epsilon"] = sk->epsilon;
  c["format"] = a.format;
  ctx.manifest().config = c;

  const std::string text = a.format == "csv" ? csv_header() + "\n" + to_csv_row(r) + "\n" : to_json(r).dump(2) + "\n";
  std::optional<fs::path> out_path;
  if (a.out.empty()) {
    ctx.out << text;
  } else {
    out_path = a.out;
    std::ofstream f(a.out);
    if (!(f << text)) throw Error(Errc::io, "cannot write " + a.out);
  }
  const int code = r.all_finite() ? kOk : kNonFinite;
  if (code != kOk) fmt::print(ctx.err, "error: non-finite metric value\n");
  return ctx.finish(code, ctx.manifest_path(out_path), cfg.reduction);
}

// ---- gradcheck

struct GradcheckArgs {
  std::string a, b, config;
  std::size_t max_vertices = 2000;
  double tolerance = 1e-5;
  bool corrupt = false;  // test hook
};

int cmd_gradcheck(Context& ctx, const GradcheckArgs& a) {
  RegistrationConfig cfg = ctx.config(a.config);
  const TriMesh x = ctx.load(a.a);
  const TriMesh xhat = ctx.load(a.b);
  if (xhat.vertices.size() > a.max_vertices || x.vertices.size() > a.max_vertices) {
    throw Error(Errc::invalid_argument, fmt::format("gradcheck is limited to {} vertices per mesh", a.max_vertices));
  }
  require_valid(x);
  require_valid(xhat);
  const MultiScaleSpec spec = resolve_scales(xhat, cfg);
  const auto t0 = Clock::now();
  LossAndGradient lg = gm_loss_gradient(x, xhat, spec, cfg.reduction);
  if (a.corrupt) {
    for (auto& g : lg.gradient) g *= 1.01;
    if (!lg.gradient.empty()) lg.gradient.front() += Vec3::Constant(1e-3 * (1.0 + lg.gradient.front().norm()));
  }
  const GradientCheck gc = compare_with_finite_differences(x, xhat, spec, lg.gradient, cfg.reduction);
  ctx.time("gradcheck", t0);

  nlohmann::json c = to_json(cfg);
  c["scales"] = nlohmann::json(to_key_values(spec));
  c["tolerance"] = a.tolerance;
  c["max_vertices"] = a.max_vertices;
  c["finite_difference_step"] = gc.step;
  ctx.manifest().config = c;

  const bool pass = std::isfinite(gc.max_relative_error) && gc.max_relative_error < a.tolerance;
  fmt::print(ctx.out, "loss {}\nmax relative gradient error {:.3e} over {} coordinates (step {:.3e})\n{}\n",
             lg.loss.total, gc.max_relative_error, gc.coordinates, gc.step, pass ? "PASS" : "FAIL");
  return ctx.finish(pass ? kOk : kGradcheckFailed, ctx.manifest_path(std::nullopt), cfg.reduction);
}

// ---- register

struct RegisterArgs {
  std::string tmpl, target, config, out_dir;
  std::vector<double> smooth;
  std::optional<int> max_iterations;
  bool quiet = false;
};

int cmd_register(Context& ctx, const RegisterArgs& a) {
  RegistrationConfig cfg = ctx.config(a.config);
  if (!a.smooth.empty()) {
    if (a.smooth.size() != 3 || a.smooth[2] != std::floor(a.smooth[2])) {
      throw Error(Errc::invalid_argument, "--smooth takes LAMBDA MU ITERATIONS");
    }
    cfg.smoothing = {true, a.smooth[0], a.smooth[1], static_cast<int>(a.smooth[2])};
  }
  if (a.max_iterations) cfg.stop.max_iterations = *a.max_iterations;
  cfg.validate();
  const TriMesh tmpl = ctx.load(a.tmpl);
  const TriMesh target = ctx.load(a.target);

  const fs::path dir(a.out_dir);
  fs::create_directories(dir);
  const std::vector<fs::path> outputs{dir / "registered.obj", dir / "trace.csv", dir / "report.json",
                                      dir / "manifest.json"};
  try {
    const auto t0 = Clock::now();
    const RegistrationResult res = register_meshes(tmpl, target, cfg);
    ctx.time("register", t0);

    save_mesh(res.registered, outputs[0], MeshFormat::obj);
    {
      std::ofstream f(outputs[1]);
      f << trace_csv_header(res.scales.size()) << "\n";
      for (const auto& row : res.loss_trace) f << to_csv_row(row) << "\n";
      if (!f) throw Error(Errc::io, "cannot write " + outputs[1].string());
    }
    RegistrationReport rep = registration_report(res, target, res.report.eval_kernel, cfg.reduction);
    rep.metrics = res.report;
    nlohmann::json rj = to_json(rep);
    rj["transform"] = {{"scale", res.transform.scale},
                       {"rotation", {{res.transform.rotation(0, 0), res.transform.rotation(0, 1), res.transform.rotation(0, 2)},
                                     {res.transform.rotation(1, 0), res.transform.rotation(1, 1), res.transform.rotation(1, 2)},
                                     {res.transform.rotation(2, 0), res.transform.rotation(2, 1), res.transform.rotation(2, 2)}}},
                       {"translation", {res.transform.translation.x(), res.transform.translation.y(),
                                        res.transform.translation.z()}}};
    // Chamfer at the starting point, for the improvement ratio.
    const ChamferDistance initial = chamfer(res.aligned_target, tmpl);
    rj["initial_chamfer"] = initial.symmetric;
    rj["chamfer_ratio"] = initial.symmetric > 0.0 ? rep.metrics.chamfer / initial.symmetric : 0.0;
    {
      std::ofstream f(outputs[2]);
      f << rj.dump(2) << "\n";
      if (!f) throw Error(Errc::io, "cannot write " + outputs[2].string());
    }
    nlohmann::json c = to_json(cfg);
    c["scales"] = nlohmann::json(to_key_values(res.scales));
    c["evaluation"]["sigma"] = res.report.eval_kernel.sigma;
    ctx.manifest().config = c;
    if (!a.quiet) {
      fmt::print(ctx.out, "{} iterations ({}), loss {:.6g} -> {:.6g}, chamfer {:.6g} -> {:.6g}\n", res.iterations_used,
                 res.converged ? "converged" : "iteration cap", rep.initial_loss, rep.final_loss, initial.symmetric,
                 rep.metrics.chamfer);
    }
    return ctx.finish(kOk, outputs[3], cfg.reduction);
  } catch (...) {
    std::error_code ec;
    for (const auto& p : outputs) fs::remove(p, ec);
    throw;
  }
}

// ---- remesh

struct RemeshArgs {
  std::string mesh, mode, out, axis = "z";
  std::optional<double> split;
};

int cmd_remesh(Context& ctx, const RemeshArgs& a) {
  const TriMesh mesh = ctx.load(a.mesh);
  require_valid(mesh);
  const std::uint64_t seed = ctx.manifest().seed;
  nlohmann::json c = {{"mode", a.mode}, {"seed", seed}};
  const auto t0 = Clock::now();
  TriMesh out;
  std::optional<VariableRemeshInfo> info;
  if (a.mode == "updown") {
    out = remesh_updown(mesh, seed);
  } else if (a.mode == "iso") {
    out = remesh_iso(mesh, seed);
  } else {
    const Axis axis = a.axis == "x" ? Axis::x : a.axis == "y" ? Axis::y : Axis::z;
    const int ai = static_cast<int>(axis);
    double lo = mesh.vertices.front()[ai], hi = lo;
    for (const auto& v : mesh.vertices) {
      lo = std::min(lo, v[ai]);
      hi = std::max(hi, v[ai]);
    }
    const double split = a.split.value_or(0.5 * (lo + hi));
    info.emplace();
    out = remesh_variable(mesh, axis, split, &*info, seed);
    c["axis"] = a.axis;
    c["split"] = split;
  }
  ctx.time("remesh", t0);
  ctx.manifest().config = c;
  save_mesh(out, a.out);
  print_stats(ctx.out, "before", mesh_stats(mesh));
  print_stats(ctx.out, "after", mesh_stats(out));
  if (info) {
    fmt::print(ctx.out, "faces above split: {}\nfaces below split: {}\n", info->faces_above, info->faces_below);
  }
  return ctx.finish(kOk, ctx.manifest_path(fs::path(a.out)), ctx.reduction({}));
}

// ---- converge

struct ConvergeArgs {
  std::string surface = "sphere", probe = "constant", out;
  std::vector<int> levels{1, 2, 3, 4, 5};
  std::vector<double> center, direction{0.0, 0.0, 1.0};
  double width = 0.5;
  double value = 1.0;
  bool gm = false;
  double sigma = 0.5;
  double min_slope = 0.9;
};

Vec3 vec3_arg(const std::vector<double>& v, const char* name) {
  if (v.size() != 3) throw Error(Errc::invalid_argument, fmt::format("{} takes three numbers", name));
  return {v[0], v[1], v[2]};
}

int cmd_converge(Context& ctx, const ConvergeArgs& a) {
  if (a.levels.size() < 3) throw Error(Errc::invalid_argument, "converge needs at least 3 levels");
  const AnalyticSurface s = a.surface == "torus" ? AnalyticSurface::torus() : AnalyticSurface::sphere();
  Vec3 center = s.kind == AnalyticSurface::Kind::sphere ? Vec3(0.3, 0.2, 0.9).normalized()
                                                        : Vec3(s.major + s.minor, 0.0, 0.0);
  if (!a.center.empty()) center = vec3_arg(a.center, "--center");
  const Vec3 dir = vec3_arg(a.direction, "--direction");
  nlohmann::json c = {{"surface", s.describe()}, {"levels", a.levels}, {"min_slope", a.min_slope}};

  const auto t0 = Clock::now();
  ConvergenceReport rep;
  if (a.gm) {
    KernelSpec k;
    k.sigma = a.sigma;
    rep = gm_refinement_study(s, k, a.levels, ctx.reduction({}));
    c["kernel"] = nlohmann::json(to_key_values(k));
  } else {
    ProbeFunction u;
    if (a.probe == "constant") u = ProbeFunction::constant_probe(a.value);
    else if (a.probe == "zero") u = ProbeFunction::constant_probe(0.0);
    else if (a.probe == "bump") u = ProbeFunction::gaussian_bump(center, a.width);
    else if (a.probe == "normal") u = ProbeFunction::normal_alignment(dir);
    else u = ProbeFunction::mixed(center, a.width, dir);
    rep = convergence_study(s, u, a.levels);
    c["probe"] = u.describe();
  }
  ctx.time("converge", t0);
  ctx.manifest().config = c;

  const std::string csv = to_csv(rep);
  std::optional<fs::path> out_path;
  if (a.out.empty()) {
    ctx.out << csv;
  } else {
    out_path = a.out;
    std::ofstream f(a.out);
    if (!(f << csv)) throw Error(Errc::io, "cannot write " + a.out);
  }
  int code = kOk;
  if (rep.slope_skipped) {
    fmt::print(ctx.err, "slope fit skipped: {}\n", rep.skip_reason);
  } else {
    fmt::print(ctx.err, "fitted slope {:.4f}\n", *rep.slope);
    if (!(*rep.slope >= a.min_slope)) code = kConvergenceFailed;
  }
  if (!a.gm && !rep.bound_holds()) fmt::print(ctx.err, "note: error exceeds the C={} bound at some level\n", rep.constant);
  return ctx.finish(code, ctx.manifest_path(out_path), ctx.reduction({}));
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"varireg: varifold mesh metrics and template registration"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Seed for every random choice")->capture_default_str();
  app.add_option("--threads", g.threads, "Worker thread cap (0 = runtime default)")->check(CLI::NonNegativeNumber);
  auto* det = app.add_flag("--deterministic", g.deterministic, "Ordered, thread-count independent reductions");
  app.add_flag("--fast", g.fast, "Unordered parallel reductions")->excludes(det);
  app.add_option("--manifest", g.manifest, "Run manifest path");

  InfoArgs info;
  auto* s_info = app.add_subcommand("info", "Mesh statistics and defects");
  s_info->add_option("mesh", info.mesh)->required();
  s_info->add_flag("--json", info.json);

  MetricsArgs metrics;
  auto* s_metrics = app.add_subcommand("metrics", "Hausdorff, Chamfer, varifold and Sinkhorn between two meshes");
  s_metrics->add_option("mesh_a", metrics.a, "Reference mesh")->required();
  s_metrics->add_option("mesh_b", metrics.b, "Compared mesh")->required();
  s_metrics->add_option("--config", metrics.config);
  s_metrics->add_flag("--sinkhorn", metrics.sinkhorn);
  s_metrics->add_option("--epsilon", metrics.epsilon, "Sinkhorn blur")->check(CLI::PositiveNumber);
  s_metrics->add_option("--format", metrics.format)->check(CLI::IsMember({"json", "csv"}));
  s_metrics->add_option("--out", metrics.out);

  GradcheckArgs grad;
  auto* s_grad = app.add_subcommand("gradcheck", "Analytic gradient against central differences");
  s_grad->add_option("mesh_a", grad.a, "Target mesh")->required();
  s_grad->add_option("mesh_b", grad.b, "Differentiated mesh")->required();
  s_grad->add_option("--config", grad.config);
  s_grad->add_option("--max-vertices", grad.max_vertices)->capture_default_str();
  s_grad->add_option("--tolerance", grad.tolerance)->capture_default_str();
  s_grad->add_flag("--corrupt-gradient", grad.corrupt)->group("");

  RegisterArgs reg;
  auto* s_reg = app.add_subcommand("register", "Fit a template to a target");
  s_reg->add_option("template", reg.tmpl)->required();
  s_reg->add_option("target", reg.target)->required();
  s_reg->add_option("--config", reg.config);
  s_reg->add_option("--out", reg.out_dir, "Output directory")->required();
  s_reg->add_option("--smooth", reg.smooth, "Taubin LAMBDA MU ITERATIONS")->expected(3);
  s_reg->add_option("--max-iterations", reg.max_iterations)->check(CLI::NonNegativeNumber);
  s_reg->add_flag("--quiet", reg.quiet);

  RemeshArgs rem;
  auto* s_rem = app.add_subcommand("remesh", "Reparameterize a mesh");
  s_rem->add_option("mesh", rem.mesh)->required();
  s_rem->add_option("--mode", rem.mode)->required()->check(CLI::IsMember({"updown", "iso", "variable"}));
  s_rem->add_option("--out", rem.out)->required();
  s_rem->add_option("--axis", rem.axis)->check(CLI::IsMember({"x", "y", "z"}));
  s_rem->add_option("--split", rem.split);

  ConvergeArgs conv;
  auto* s_conv = app.add_subcommand("converge", "Refinement study on an analytic surface");
  s_conv->add_option("--surface", conv.surface)->check(CLI::IsMember({"sphere", "torus"}));
  s_conv->add_option("--probe", conv.probe)->check(CLI::IsMember({"constant", "zero", "bump", "normal", "mixed"}));
  s_conv->add_option("--levels", conv.levels)->delimiter(',');
  s_conv->add_option("--center", conv.center)->delimiter(',');
  s_conv->add_option("--direction", conv.direction)->delimiter(',');
  s_conv->add_option("--width", conv.width)->check(CLI::PositiveNumber);
  s_conv->add_option("--value", conv.value);
  s_conv->add_flag("--gm", conv.gm, "Loss between consecutive levels instead of a probe");
  s_conv->add_option("--sigma", conv.sigma)->check(CLI::PositiveNumber);
  s_conv->add_option("--min-slope", conv.min_slope)->capture_default_str();
  s_conv->add_option("--out", conv.out);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    auto dispatch = [&](const std::string& name, auto&& fn) {
      Context ctx(g, name, out, err);
      return fn(ctx);
    };
    if (*s_info) return dispatch("info", [&](Context& c) { return cmd_info(c, info); });
    if (*s_metrics) return dispatch("metrics", [&](Context& c) { return cmd_metrics(c, metrics); });
    if (*s_grad) return dispatch("gradcheck", [&](Context& c) { return cmd_gradcheck(c, grad); });
    if (*s_reg) return dispatch("register", [&](Context& c) { return cmd_register(c, reg); });
    if (*s_rem) return dispatch("remesh", [&](Context& c) { return cmd_remesh(c, rem); });
    if (*s_conv) return dispatch("converge", [&](Context& c) { return cmd_converge(c, conv); });
  } catch (const Error& e) {
    fmt::print(err, "error ({}): {}\n", to_string(e.code()), e.what());
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kUsage;
  }
  return kUsage;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace varireg::cli
