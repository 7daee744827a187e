#include "varireg/convergence/study.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "varireg/common/error.hpp"

namespace varireg {

namespace {

void require_levels(const std::vector<int>& levels) {
  if (levels.size() < 3) throw Error(Errc::invalid_argument, "a convergence study needs at least 3 levels");
  for (std::size_t i = 1; i < levels.size(); ++i) {
    if (levels[i] <= levels[i - 1]) throw Error(Errc::invalid_argument, "levels must be strictly increasing");
  }
  if (levels.front() < 0) throw Error(Errc::invalid_argument, "levels must be >= 0");
}

std::string kernel_descriptor(const KernelSpec& k) {
  return fmt::format("{}(sigma={})x{}", to_string(k.position), k.sigma, to_string(k.normal));
}

}  // namespace

bool ConvergenceReport::bound_holds() const {
  for (const auto& r : rows)
    if (!(r.error <= r.bound)) return false;
  return true;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw Error(Errc::invalid_argument, "slope fit needs >= 2 paired points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw Error(Errc::invalid_argument, "slope fit needs positive values");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double den = n * sxx - sx * sx;
  if (!(den > 0.0)) throw Error(Errc::invalid_argument, "slope fit needs distinct abscissae");
  return (n * sxy - sx * sy) / den;
}

double quadrature_error_bound(double constant, double area, double kappa, double theta, double lipschitz, double sup_norm,
                     double eta) {
  return constant * area * (kappa + 1.0) / std::sin(theta) * (lipschitz + sup_norm) * eta;
}

ConvergenceReport convergence_study(const AnalyticSurface& s, const ProbeFunction& u, const std::vector<int>& levels,
                                    double constant) {
  require_levels(levels);
  ConvergenceReport rep;
  rep.surface = s.describe();
  rep.probe = u.describe();
  rep.constant = constant;
  rep.reference = continuous_probe_integral(s, u);

  const double floor = 1e-11 * u.sup_norm() * s.area();
  std::vector<double> etas, errors;
  for (int level : levels) {
    const TriMesh mesh = s.sample(level);
    const MeshStats st = mesh_stats(mesh);
    ConvergenceRow row;
    row.level = level;
    row.faces = st.num_faces;
    row.eta = st.max_edge_length;
    row.theta = st.min_face_angle;
    row.error = std::abs(rep.reference - probe_integral(varifold_of_mesh(mesh), u));
    row.bound = quadrature_error_bound(constant, s.area(), s.curvature_bound(), row.theta, u.lipschitz(), u.sup_norm(), row.eta);
    row.ratio = row.bound > 0.0 ? row.error / row.bound : 0.0;
    rep.rows.push_back(row);
    if (row.error > floor) {
      etas.push_back(row.eta);
      errors.push_back(row.error);
    }
  }
  if (etas.size() >= 2) {
    rep.slope = loglog_slope(etas, errors);
  } else {
    rep.slope_skipped = true;
    rep.skip_reason = "error at rounding level on all but at most one level";
  }
  return rep;
}

ConvergenceReport gm_refinement_study(const AnalyticSurface& s, const KernelSpec& kernel,
                                      const std::vector<int>& levels, const ReductionOptions& opts) {
  require_levels(levels);
  kernel.validate();
  ConvergenceReport rep;
  rep.surface = s.describe();
  rep.probe = kernel_descriptor(kernel);
  rep.constant = std::numeric_limits<double>::quiet_NaN();

  std::vector<double> etas, values;
  TriMesh coarse = s.sample(levels.front());
  for (std::size_t i = 1; i < levels.size(); ++i) {
    TriMesh fine = s.sample(levels[i]);
    const DiscreteVarifold vc = varifold_of_mesh(coarse), vf = varifold_of_mesh(fine);
    const double loss = gm_loss(vc, vf, kernel, opts);
    const double norm = kernel_inner_product(vf, vf, kernel, opts);
    const MeshStats st = mesh_stats(coarse);
    ConvergenceRow row;
    row.level = levels[i - 1];
    row.faces = st.num_faces;
    row.eta = st.max_edge_length;
    row.theta = st.min_face_angle;
    row.error = loss / norm;
    row.bound = std::numeric_limits<double>::quiet_NaN();
    row.ratio = std::numeric_limits<double>::quiet_NaN();
    rep.rows.push_back(row);
    if (row.error > 0.0) {
      etas.push_back(row.eta);
      values.push_back(row.error);
    }
    coarse = std::move(fine);
  }
  if (etas.size() >= 2) {
    rep.slope = loglog_slope(etas, values);
  } else {
    rep.slope_skipped = true;
    rep.skip_reason = "fewer than two positive losses";
  }
  return rep;
}

std::string to_csv(const ConvergenceReport& r) {
  std::string out = "level,eta,theta,error,bound,ratio\n";
  for (const auto& row : r.rows) {
    out += fmt::format("{},{},{},{},{},{}\n", row.level, row.eta, row.theta, row.error,
                       row.bound, row.ratio);
  }
  return out;
}

}  // namespace varireg
