#include "varireg/baselines/sinkhorn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "varireg/common/error.hpp"

namespace varireg {

void SinkhornConfig::validate() const {
  if (!(epsilon > 0.0)) throw Error(Errc::invalid_argument, "sinkhorn epsilon must be positive");
  if (p != 1 && p != 2) throw Error(Errc::invalid_argument, "sinkhorn p must be 1 or 2");
  if (max_iterations < 1) throw Error(Errc::invalid_argument, "sinkhorn needs at least one iteration");
  if (!(convergence_tol > 0.0)) throw Error(Errc::invalid_argument, "sinkhorn tolerance must be positive");
}

AreaMeasure make_measure(std::vector<Vec3> points, std::vector<double> masses) {
  if (points.size() != masses.size()) throw Error(Errc::size_mismatch, "one mass per point");
  if (points.empty()) throw Error(Errc::empty_mesh, "empty measure");
  double total = 0.0;
  for (double m : masses) {
    if (!(m > 0.0)) throw Error(Errc::invalid_argument, "measure masses must be positive");
    total += m;
  }
  AreaMeasure out{std::move(points), std::move(masses), total};
  for (double& m : out.masses) m /= total;
  return out;
}

AreaMeasure area_measure(const TriMesh& mesh) {
  FaceGeometry g = face_geometry_nondegenerate(mesh);
  return make_measure(std::move(g.centers), std::move(g.areas));
}

namespace {

struct Problem {
  const AreaMeasure& a;
  const AreaMeasure& b;
  int p;
  double cost(std::size_t i, std::size_t j) const {
    const double d = (a.points[i] - b.points[j]).norm();
    return p == 1 ? d : 0.5 * d * d;
  }
};

// out_i = -eps log sum_j b_j exp((h_j - C_ij) / eps), streamed row by row.
void softmin(const AreaMeasure& rows, const AreaMeasure& cols, int p, double eps, const std::vector<double>& h,
             std::vector<double>& out) {
  const Problem pr{rows, cols, p};
  out.resize(rows.points.size());
  std::vector<double> expo(cols.points.size());
  for (std::size_t i = 0; i < rows.points.size(); ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < cols.points.size(); ++j) {
      expo[j] = std::log(cols.masses[j]) + (h[j] - pr.cost(i, j)) / eps;
      mx = std::max(mx, expo[j]);
    }
    double s = 0.0;
    for (double e : expo) s += std::exp(e - mx);
    out[i] = -eps * (mx + std::log(s));
  }
}

double dot(const std::vector<double>& m, const std::vector<double>& f) {
  double s = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) s += m[i] * f[i];
  return s;
}

// L1 violation of the row marginal for the plan built from (f, g), given
// fn = softmin(g): row i carries mass a_i exp((f_i - fn_i) / eps).
double marginal_error(const std::vector<double>& a, const std::vector<double>& f, const std::vector<double>& fn,
                      double eps) {
  double err = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) err += a[i] * std::abs(std::expm1((f[i] - fn[i]) / eps));
  return err;
}

double diameter_cost(const AreaMeasure& a, const AreaMeasure& b, int p) {
  Vec3 lo = a.points.front(), hi = lo;
  for (const auto* m : {&a, &b})
    for (const auto& q : m->points) {
      lo = lo.cwiseMin(q);
      hi = hi.cwiseMax(q);
    }
  const double d = std::max((hi - lo).norm(), 1e-300);
  return p == 1 ? d : 0.5 * d * d;
}

std::vector<double> eps_schedule(double start, double target) {
  std::vector<double> eps;
  for (double e = start; e > target; e *= 0.5) eps.push_back(e);
  eps.push_back(target);
  return eps;
}

struct Potentials {
  std::vector<double> f, g;
  int iterations = 0;
  bool converged = false;
};

// Cross problem: alternating updates with averaging during the annealing phase,
// plain alternating updates at the target blur until the potentials settle.
Potentials solve_cross(const AreaMeasure& a, const AreaMeasure& b, const SinkhornConfig& cfg, double scale) {
  Potentials pt;
  pt.f.assign(a.points.size(), 0.0);
  pt.g.assign(b.points.size(), 0.0);
  std::vector<double> fn, gn;
  for (double eps : eps_schedule(scale, cfg.epsilon)) {
    softmin(a, b, cfg.p, eps, pt.g, fn);
    softmin(b, a, cfg.p, eps, pt.f, gn);
    for (std::size_t i = 0; i < fn.size(); ++i) pt.f[i] = 0.5 * (pt.f[i] + fn[i]);
    for (std::size_t j = 0; j < gn.size(); ++j) pt.g[j] = 0.5 * (pt.g[j] + gn[j]);
    ++pt.iterations;
  }
  for (int it = 0; it < cfg.max_iterations; ++it) {
    softmin(a, b, cfg.p, cfg.epsilon, pt.g, fn);
    // g was fitted to f, so columns are exact and rows measure the residual
    if (it > 0 && marginal_error(a.masses, pt.f, fn, cfg.epsilon) < cfg.convergence_tol) {
      pt.converged = true;
      break;
    }
    softmin(b, a, cfg.p, cfg.epsilon, fn, gn);
    pt.f.swap(fn);
    pt.g.swap(gn);
    ++pt.iterations;
  }
  return pt;
}

// Symmetric problem OT(a, a): a single potential, averaged fixed-point updates.
Potentials solve_self(const AreaMeasure& a, const SinkhornConfig& cfg, double scale) {
  Potentials pt;
  pt.f.assign(a.points.size(), 0.0);
  std::vector<double> fn;
  for (double eps : eps_schedule(scale, cfg.epsilon)) {
    softmin(a, a, cfg.p, eps, pt.f, fn);
    for (std::size_t i = 0; i < fn.size(); ++i) pt.f[i] = 0.5 * (pt.f[i] + fn[i]);
    ++pt.iterations;
  }
  for (int it = 0; it < cfg.max_iterations; ++it) {
    softmin(a, a, cfg.p, cfg.epsilon, pt.f, fn);
    if (marginal_error(a.masses, pt.f, fn, cfg.epsilon) < cfg.convergence_tol) {
      pt.converged = true;
      break;
    }
    for (std::size_t i = 0; i < fn.size(); ++i) fn[i] = 0.5 * (pt.f[i] + fn[i]);
    pt.f.swap(fn);
    ++pt.iterations;
  }
  pt.g = pt.f;
  return pt;
}

}  // namespace

SinkhornResult entropic_ot(const AreaMeasure& a, const AreaMeasure& b, const SinkhornConfig& cfg) {
  cfg.validate();
  const double scale = diameter_cost(a, b, cfg.p);
  const Potentials pt = solve_cross(a, b, cfg, scale);
  return {dot(a.masses, pt.f) + dot(b.masses, pt.g), pt.converged, pt.iterations};
}

SinkhornResult sinkhorn_divergence(const AreaMeasure& a, const AreaMeasure& b, const SinkhornConfig& cfg) {
  cfg.validate();
  if (a.points.empty() || b.points.empty()) throw Error(Errc::empty_mesh, "sinkhorn on an empty measure");
  const double scale = diameter_cost(a, b, cfg.p);
  const Potentials ab = solve_cross(a, b, cfg, scale);
  const Potentials aa = solve_self(a, cfg, scale);
  const Potentials bb = solve_self(b, cfg, scale);
  SinkhornResult r;
  // <a, f_ab - p_a> + <b, g_ab - p_b>
  double s = 0.0;
  for (std::size_t i = 0; i < a.masses.size(); ++i) s += a.masses[i] * (ab.f[i] - aa.f[i]);
  for (std::size_t j = 0; j < b.masses.size(); ++j) s += b.masses[j] * (ab.g[j] - bb.f[j]);
  r.value = s;
  r.converged = ab.converged && aa.converged && bb.converged;
  r.iterations = ab.iterations + aa.iterations + bb.iterations;
  if (!std::isfinite(r.value)) throw Error(Errc::non_finite, "sinkhorn divergence is not finite");
  return r;
}

}  // namespace varireg
