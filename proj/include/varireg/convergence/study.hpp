#pragma once

#include <optional>
#include <string>
#include <vector>

#include "varireg/convergence/surfaces.hpp"
#include "varireg/measures/gm_loss.hpp"

namespace varireg {

struct ConvergenceRow {
  int level = 0;
  std::size_t faces = 0;
  double eta = 0.0;    // longest edge
  double theta = 0.0;  // smallest face angle, radians
  double error = 0.0;
  double bound = 0.0;  // NaN when the study has no bound
  double ratio = 0.0;  // error / bound
};

struct ConvergenceReport {
  std::string surface;
  std::string probe;  // probe or kernel descriptor
  double reference = 0.0;  // continuous value (probe studies)
  double constant = 20.0;  // C in the bound
  std::vector<ConvergenceRow> rows;  // decreasing eta
  std::optional<double> slope;  // least-squares slope of log error vs log eta
  bool slope_skipped = false;
  std::string skip_reason;

  bool bound_holds() const;
};

// Least-squares slope of log(y) against log(x). Needs >= 2 points, all positive.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

// C a(S) (kappa + 1) / sin(theta) (k_u + |u|_inf) eta
double quadrature_error_bound(double constant, double area, double kappa, double theta, double lipschitz, double sup_norm,
                     double eta);

// Per level: |mu_S(u) - mu_{X_k}(u)| against the bound with C = 20. The slope fit
// uses rows whose error exceeds 1e-11 |u|_inf a(S); it is skipped (flagged) when
// fewer than two such rows remain, as for the zero probe or probes whose discrete
// integral is exact on closed meshes. Requires >= 3 levels.
ConvergenceReport convergence_study(const AnalyticSurface& s, const ProbeFunction& u, const std::vector<int>& levels,
                                    double constant = 20.0);

// Per consecutive level pair (k, k'): gm_loss(X_k, X_k') / <mu_X_k', mu_X_k'>,
// with eta taken from X_k. Requires >= 3 levels.
ConvergenceReport gm_refinement_study(const AnalyticSurface& s, const KernelSpec& kernel,
                                      const std::vector<int>& levels, const ReductionOptions& opts = {});

// Header: level,eta,theta,error,bound,ratio
std::string to_csv(const ConvergenceReport& r);

}  // namespace varireg
