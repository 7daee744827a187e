#pragma once

#include <vector>

#include "varireg/mesh/mesh.hpp"

namespace varireg {

struct SinkhornConfig {
  double epsilon = 1e-3;          // entropic blur, in cost units
  int p = 2;                      // cost |x - y|^p / p, p in {1, 2}
  int max_iterations = 20000;
  double convergence_tol = 1e-9;  // L1 violation of the marginals (unit total mass)

  void validate() const;
};

// Face centers weighted by face areas, normalized to unit total mass.
struct AreaMeasure {
  std::vector<Vec3> points;
  std::vector<double> masses;
  double raw_mass = 0.0;  // total area before normalization
};

AreaMeasure area_measure(const TriMesh& mesh);
// Normalizes the given masses to sum 1.
AreaMeasure make_measure(std::vector<Vec3> points, std::vector<double> masses);

struct SinkhornResult {
  double value = 0.0;
  bool converged = true;
  int iterations = 0;  // total over the three transport problems
};

// Entropic transport cost OT_eps(a, b) = <a, f> + <b, g> at the optimal dual pair.
SinkhornResult entropic_ot(const AreaMeasure& a, const AreaMeasure& b, const SinkhornConfig& cfg);

// OT_eps(a, b) - OT_eps(a, a)/2 - OT_eps(b, b)/2, log-domain with eps-scaling.
// Non-convergence is reported through `converged`, not thrown.
SinkhornResult sinkhorn_divergence(const AreaMeasure& a, const AreaMeasure& b, const SinkhornConfig& cfg);

}  // namespace varireg
