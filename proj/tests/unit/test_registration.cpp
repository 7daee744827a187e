#include <doctest.h>

#include <cmath>
#include <sstream>

#include "fixtures.hpp"
#include "varireg/baselines/point_metrics.hpp"
#include "varireg/baselines/regularizers.hpp"
#include "varireg/common/error.hpp"
#include "varireg/measures/varifold.hpp"
#include "varireg/registration/register.hpp"

using namespace varireg;
namespace vt = varireg::testing;

namespace {

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return Errc::parse;
}

// Small fast configuration for unit-level runs.
RegistrationConfig quick_config(int iterations) {
  RegistrationConfig cfg;
  cfg.stop.max_iterations = iterations;
  cfg.stop.relative_tolerance = 0.0;
  cfg.adam.step_size = 3e-3;
  return cfg;
}

double max_displacement(const TriMesh& a, const TriMesh& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.vertices.size(); ++i) m = std::max(m, (a.vertices[i] - b.vertices[i]).norm());
  return m;
}

}  // namespace

TEST_CASE("similarity transform algebra") {
  CounterRng rng(5);
  SimilarityTransform a{vt::random_rotation(rng), Vec3(1, -2, 0.5), 1.7};
  SimilarityTransform b{vt::random_rotation(rng), Vec3(0.1, 0.2, 0.3), 0.6};
  const Vec3 x(0.3, -0.4, 2.0);
  CHECK((a.compose(b).apply(x) - a.apply(b.apply(x))).norm() < 1e-12);
  CHECK((a.inverse().apply(a.apply(x)) - x).norm() < 1e-12);
  const TriMesh m = icosphere(1);
  const TriMesh moved = a.apply(m);
  CHECK(moved.faces == m.faces);
  CHECK((moved.vertices[3] - a.apply(m.vertices[3])).norm() == 0.0);
}

TEST_CASE("similarity_align recovers a known similarity") {
  const TriMesh source = vt::jittered_sphere(2, 0.2, 7);
  CounterRng rng(8);
  for (int trial = 0; trial < 5; ++trial) {
    const double s = rng.uniform(0.5, 2.0);
    const Eigen::Matrix3d R = vt::random_rotation(rng, 0.4);
    const Vec3 t(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    const TriMesh target = vt::transformed(source, s, R, t);
    AlignmentTrace trace;
    const SimilarityTransform T = similarity_align(source, target, 50, &trace);
    // T maps the target back onto the source: T o (s R . + t) = identity
    const SimilarityTransform truth{R, t, s};
    const SimilarityTransform id = T.compose(truth);
    CAPTURE(trial);
    CHECK((id.rotation - Eigen::Matrix3d::Identity()).norm() < 1e-6);
    CHECK(std::abs(id.scale - 1.0) < 1e-6);
    CHECK(id.translation.norm() < 1e-6 * bbox_diagonal(source));
    REQUIRE_FALSE(trace.rms.empty());
    for (std::size_t i = 1; i < trace.rms.size(); ++i) CHECK(trace.rms[i] <= trace.rms[i - 1] * (1 + 1e-12) + 1e-15);
  }
}

TEST_CASE("similarity_align of a mesh onto itself is the identity") {
  const TriMesh m = vt::jittered_sphere(2, 0.1, 9);
  const SimilarityTransform T = similarity_align(m, m, 20);
  CHECK((T.rotation - Eigen::Matrix3d::Identity()).norm() < 1e-9);
  CHECK(std::abs(T.scale - 1.0) < 1e-9);
  CHECK(T.translation.norm() < 1e-9);
}

TEST_CASE("similarity_align errors") {
  const TriMesh line{{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0), Vec3(3, 0, 0)}, {{0, 1, 2}, {1, 2, 3}}};
  CHECK(code_of([&] { similarity_align(line, icosphere(1), 10); }) == Errc::degenerate_configuration);
  CHECK(code_of([&] { similarity_align(icosphere(1), line, 10); }) == Errc::degenerate_configuration);
  CHECK_THROWS_AS(similarity_align(icosphere(1), icosphere(1), 0), Error);
  CHECK_THROWS_AS(similarity_align(TriMesh{}, icosphere(1), 5), Error);
}

TEST_CASE("config defaults, parsing and round trip") {
  const RegistrationConfig d;
  CHECK(d.adam.step_size == 1e-3);
  CHECK(d.adam.beta1 == 0.9);
  CHECK(d.adam.beta2 == 0.999);
  CHECK(d.adam.epsilon == 1e-8);
  CHECK(d.stop.max_iterations == 2000);
  CHECK(d.stop.window == 10);
  CHECK(d.stop.relative_tolerance == 1e-5);
  CHECK(d.edge_weight == 0.0);
  CHECK(d.laplacian_weight == 0.0);
  CHECK(d.auto_scales == 4);
  CHECK_FALSE(d.smoothing.enabled);
  CHECK(d.smoothing.iterations == 10);

  std::istringstream in(R"([scales]
mode = explicit
count = 2
position_0 = gaussian
sigma_0 = 0.1
normal_0 = varifold
lambda_0 = 0.25
position_1 = cauchy
sigma_1 = 0.2
normal_1 = current
lambda_1 = 1
[optimizer]
step_size = 0.002
max_iterations = 77
seed = 9
[regularizers]
edge = 0.5
[smoothing]
enabled = true
iterations = 3
[io]
mesh_format = ply
reduction = fast
)");
  const RegistrationConfig c = parse_registration_config(in);
  REQUIRE(c.scales.has_value());
  CHECK(c.scales->terms.size() == 2);
  CHECK(c.scales->terms[1].kernel.position == PositionKernel::cauchy);
  CHECK(c.adam.step_size == 0.002);
  CHECK(c.stop.max_iterations == 77);
  CHECK(c.seed == 9);
  CHECK(c.edge_weight == 0.5);
  CHECK(c.smoothing.enabled);
  CHECK(c.smoothing.iterations == 3);
  CHECK(c.mesh_format == "ply");
  CHECK(c.reduction.mode == ReductionMode::fast);

  std::istringstream again(to_ini(c));
  const RegistrationConfig r = parse_registration_config(again);
  CHECK(to_json(r) == to_json(c));
  std::istringstream defaults(to_ini(d));
  CHECK(to_json(parse_registration_config(defaults)) == to_json(d));
}

TEST_CASE("config rejects bad input") {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return parse_registration_config(in);
  };
  CHECK(code_of([&] { parse("[optimizer]\nstep_sise = 1\n"); }) == Errc::parse);
  CHECK(code_of([&] { parse("[nonsense]\na = 1\n"); }) == Errc::parse);
  CHECK(code_of([&] { parse("[optimizer]\nstep_size = fast\n"); }) == Errc::parse);
  CHECK(code_of([&] { parse("[optimizer]\nstep_size = -1\n"); }) == Errc::parse);
  CHECK(code_of([&] { parse("[optimizer]\nmax_iterations = 2.5\n"); }) == Errc::parse);
  CHECK(code_of([&] { parse("[smoothing]\nenabled = maybe\n"); }) == Errc::parse);
  CHECK(code_of([&] { parse("[io]\nreduction = sloppy\n"); }) == Errc::parse);
  CHECK(code_of([&] { parse("[scales]\nmode = sideways\n"); }) == Errc::parse);
  CHECK(code_of([&] { load_registration_config("/nonexistent/cfg.ini"); }) == Errc::io);

  RegistrationConfig bad;
  bad.smoothing.enabled = true;
  bad.smoothing.mu = 0.1;
  CHECK(code_of([&] { bad.validate(); }) == Errc::invalid_argument);
}

TEST_CASE("registering a mesh onto itself stays put") {
  const TriMesh t = icosphere(2);
  const RegistrationResult r = register_meshes(t, t, quick_config(30));
  const double self = kernel_inner_product(varifold_of_mesh(t), varifold_of_mesh(t), r.scales.terms.back().kernel);
  CHECK(r.loss_trace.back().total <= 1e-8 * self);
  CHECK(max_displacement(r.registered, t) <= 1e-6 * bbox_diagonal(t));
  CHECK(r.registered.faces == t.faces);
  CHECK(r.report.hausdorff <= 1e-6);
}

TEST_CASE("registration on a small bump target") {
  const TriMesh t = icosphere(2);
  const TriMesh target = vt::bump_target(t);
  std::vector<TraceRow> seen;
  const RegistrationResult r = register_meshes(t, target, quick_config(150), [&](const TraceRow& row) { seen.push_back(row); });

  SUBCASE("contract") {
    CHECK(r.registered.faces == t.faces);
    CHECK(r.registered.vertices.size() == t.vertices.size());
    CHECK(r.iterations_used == 150);
    CHECK_FALSE(r.converged);
    CHECK(r.loss_trace.size() == 151);
    CHECK(seen.size() == r.loss_trace.size());
    CHECK(r.scales.terms.size() == 4);
    CHECK(validate(r.registered).empty());
    CHECK(mesh_stats(r.registered).min_face_angle > M_PI / 180);
    CHECK(r.wall_time > 0.0);
  }
  SUBCASE("loss and chamfer decrease") {
    const double initial = chamfer(r.aligned_target, t).symmetric;
    const double final = chamfer(r.aligned_target, r.registered).symmetric;
    CHECK(final < 0.9 * initial);
    CHECK(r.loss_trace.back().total < 0.1 * r.loss_trace.front().total);
    // 10-iteration moving average never rises
    std::vector<double> avg;
    for (std::size_t i = 9; i < r.loss_trace.size(); ++i) {
      double s = 0.0;
      for (std::size_t j = i - 9; j <= i; ++j) s += r.loss_trace[j].total;
      avg.push_back(s / 10);
    }
    for (std::size_t i = 1; i < avg.size(); ++i) CHECK(avg[i] <= avg[i - 1]);
  }
  SUBCASE("trace bookkeeping") {
    for (const auto& row : r.loss_trace) {
      double s = 0.0;
      for (std::size_t i = 0; i < row.per_scale.size(); ++i) s += r.scales.terms[i].lambda * row.per_scale[i];
      CHECK(row.data == doctest::Approx(s).epsilon(1e-12));
      CHECK(row.total == row.data);
    }
    const RegistrationReport rep = registration_report(r, target, resolve_eval_kernel(t, RegistrationConfig{}));
    CHECK(rep.final_per_scale == r.loss_trace.back().per_scale);
    CHECK(rep.initial_loss == r.loss_trace.front().total);
    CHECK(rep.final_loss == r.loss_trace.back().total);
    CHECK(rep.metrics.hausdorff == doctest::Approx(r.report.hausdorff).epsilon(1e-9));
    for (const auto& [name, secs] : rep.metrics.runtimes) CHECK(secs > 0.0);
    const auto j = to_json(rep);
    CHECK(j.contains("hausdorff"));
    CHECK(j["final_loss"] == rep.final_loss);
    CHECK(trace_csv_header(2) == "iteration,total,data,edge,laplacian,scale_0,scale_1");
    const std::string row = to_csv_row(r.loss_trace[3]);
    CHECK(row.rfind("3,", 0) == 0);
    CHECK(std::count(row.begin(), row.end(), ',') == 4 + 4);
  }
  SUBCASE("output back in the target frame") {
    const TriMesh back = r.registered_in_target_frame();
    CHECK(chamfer(target, back).symmetric < chamfer(target, r.transform.inverse().apply(t)).symmetric);
  }
}

TEST_CASE("registration is deterministic and motion-equivariant") {
  // No mirror symmetry: symmetric inputs have gradient coordinates that are zero
  // up to rounding, and Adam's per-coordinate scaling amplifies that noise.
  const TriMesh t = vt::transformed(vt::jittered_sphere(2, 0.1, 31), 1.0,
                                    Eigen::Matrix3d(Eigen::Vector3d(1.0, 0.8, 0.6).asDiagonal()), Vec3::Zero());
  const TriMesh target = vt::radial_bump(t, 0.05 * bbox_diagonal(t), Vec3(0.3, 0.5, 0.8).normalized());
  const RegistrationConfig cfg = quick_config(40);
  const RegistrationResult a = register_meshes(t, target, cfg);
  const RegistrationResult b = register_meshes(t, target, cfg);
  REQUIRE(a.loss_trace.size() == b.loss_trace.size());
  for (std::size_t i = 0; i < a.loss_trace.size(); ++i) CHECK(to_csv_row(a.loss_trace[i]) == to_csv_row(b.loss_trace[i]));
  CHECK(a.registered.vertices == b.registered.vertices);

  CounterRng rng(12);
  const Eigen::Matrix3d R = vt::random_rotation(rng, 0.1);
  const Vec3 shift(0.3, -0.2, 0.1);
  const RegistrationResult m = register_meshes(t, vt::transformed(target, 1.0, R, shift), cfg);
  const TriMesh expected = vt::transformed(a.registered_in_target_frame(), 1.0, R, shift);
  CHECK(max_displacement(m.registered_in_target_frame(), expected) <= 1e-6 * bbox_diagonal(t));
}

TEST_CASE("regularizers, smoothing and errors") {
  const TriMesh t = icosphere(2);
  const TriMesh target = vt::bump_target(t);

  RegistrationConfig reg = quick_config(40);
  reg.edge_weight = 1.0;
  reg.laplacian_weight = 1.0;
  const RegistrationResult r = register_meshes(t, target, reg);
  CHECK(r.loss_trace.front().edge == 0.0);
  CHECK(r.loss_trace.back().total ==
        doctest::Approx(r.loss_trace.back().data + r.loss_trace.back().edge + r.loss_trace.back().laplacian));

  RegistrationConfig smooth = quick_config(40);
  smooth.smoothing.enabled = true;
  const RegistrationResult s = register_meshes(t, target, smooth);
  const RegistrationResult plain = register_meshes(t, target, quick_config(40));
  CHECK(s.registered.faces == t.faces);
  CHECK(max_displacement(s.registered, plain.registered) > 0.0);
  CHECK(laplacian_magnitude(s.registered) < laplacian_magnitude(plain.registered));

  RegistrationConfig early = quick_config(2000);
  early.adam.step_size = 1e-3;
  early.stop.relative_tolerance = 5e-2;
  const RegistrationResult e = register_meshes(t, target, early);
  CHECK(e.converged);
  CHECK(e.iterations_used < 2000);

  TriMesh degenerate = t;
  degenerate.vertices[degenerate.faces[0][1]] = degenerate.vertices[degenerate.faces[0][0]];
  CHECK(code_of([&] { register_meshes(degenerate, target, quick_config(5)); }) == Errc::degenerate_face);

  RegistrationConfig blowup = quick_config(5);
  blowup.adam.step_size = 1e300;
  CHECK_THROWS_AS(register_meshes(t, target, blowup), Error);

  RegistrationConfig invalid;
  invalid.adam.step_size = -1;
  CHECK(code_of([&] { register_meshes(t, target, invalid); }) == Errc::invalid_argument);
}
