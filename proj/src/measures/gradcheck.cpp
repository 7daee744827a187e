#include "varireg/measures/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "varireg/common/error.hpp"

namespace varireg {

namespace {
constexpr double kGradientFloor = 1e-4;
}  // namespace

GradientCheck compare_with_finite_differences(const TriMesh& x, const TriMesh& xhat, const MultiScaleSpec& spec,
                                              const GradientField& analytic, const ReductionOptions& opts,
                                              double rel_step) {
  if (analytic.size() != xhat.vertices.size()) {
    throw Error(Errc::size_mismatch, "gradient size differs from the vertex count");
  }
  const GmObjective objective(x, spec, opts);
  GradientCheck out;
  out.step = rel_step * bbox_diagonal(xhat);
  if (!(out.step > 0.0)) throw Error(Errc::invalid_argument, "finite-difference step must be positive");

  TriMesh probe = xhat;
  double max_fd = 0.0, max_diff = 0.0;
  for (std::size_t v = 0; v < probe.vertices.size(); ++v) {
    Vec3 fd;
    for (int c = 0; c < 3; ++c) {
      const double orig = probe.vertices[v][c];
      probe.vertices[v][c] = orig + out.step;
      const double up = objective.loss(probe).total;
      probe.vertices[v][c] = orig - out.step;
      const double down = objective.loss(probe).total;
      probe.vertices[v][c] = orig;
      fd[c] = (up - down) / (2.0 * out.step);
      ++out.coordinates;
    }
    max_fd = std::max(max_fd, fd.norm());
    max_diff = std::max(max_diff, (analytic[v] - fd).norm());
  }
  out.max_abs_error = max_diff;
  // A vanishing gradient leaves only rounding noise in both fields, so the
  // denominator is floored at a small fraction of the loss's natural gradient unit.
  const DiscreteVarifold mu = varifold_of_mesh(xhat);
  const std::vector<double> self = kernel_inner_products(mu, mu, spec, opts);
  double scale = 0.0;
  for (std::size_t i = 0; i < spec.terms.size(); ++i) {
    scale += spec.terms[i].lambda * (std::abs(self[i]) + std::abs(objective.target_self()[i]));
  }
  const double floor = kGradientFloor * scale / bbox_diagonal(xhat);
  out.max_relative_error = max_diff / std::max({max_fd, floor, std::numeric_limits<double>::min()});
  return out;
}

}  // namespace varireg
