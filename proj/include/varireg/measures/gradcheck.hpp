#pragma once

#include "varireg/measures/gm_loss.hpp"

namespace varireg {

struct GradientCheck {
  double max_relative_error = 0.0;  // max_v |g - fd| / max(max_v |fd|, 1e-4 * loss scale / bbox diagonal)
  double max_abs_error = 0.0;
  double step = 0.0;
  std::size_t coordinates = 0;
};

// Compares `analytic` with central differences of multiscale_gm_loss(x, .) at
// xhat, step rel_step * bbox_diagonal(xhat).
GradientCheck compare_with_finite_differences(const TriMesh& x, const TriMesh& xhat, const MultiScaleSpec& spec,
                                              const GradientField& analytic, const ReductionOptions& opts = {},
                                              double rel_step = 1e-5);

}  // namespace varireg
