#pragma once

#include <cstddef>
#include <vector>

#include "varireg/measures/kernels.hpp"
#include "varireg/measures/varifold.hpp"
#include "varireg/mesh/mesh.hpp"

namespace varireg {

enum class ReductionMode {
  // Fixed row order, compensated accumulation; independent of the thread count.
  deterministic,
  // Unordered parallel reduction.
  fast,
};

// Pairwise sums are streamed over column tiles of `tile_size` atoms; nothing
// quadratic in the number of atoms is ever stored.
struct ReductionOptions {
  ReductionMode mode = ReductionMode::deterministic;
  std::size_t tile_size = 256;
};

// <mu, nu>_k = sum_i sum_j w_i v_j rho(|x_i - y_j|) gamma(<n_i, m_j>)
double kernel_inner_product(const DiscreteVarifold& mu, const DiscreteVarifold& nu, const KernelSpec& k,
                            const ReductionOptions& opts = {});

// Per-term inner products for every term of a multi-scale spec, computed in one pass.
std::vector<double> kernel_inner_products(const DiscreteVarifold& mu, const DiscreteVarifold& nu,
                                          const MultiScaleSpec& spec, const ReductionOptions& opts = {});

struct LossBreakdown {
  double total = 0.0;
  std::vector<double> per_scale;  // unweighted L_{k_i}
};

// |mu_X - mu_Xhat|_k^2 = <X,X> + <Xhat,Xhat> - 2 <X,Xhat>. Symmetric in its arguments.
double gm_loss(const TriMesh& x, const TriMesh& xhat, const KernelSpec& k, const ReductionOptions& opts = {});
double gm_loss(const DiscreteVarifold& x, const DiscreteVarifold& xhat, const KernelSpec& k,
               const ReductionOptions& opts = {});

LossBreakdown multiscale_gm_loss(const TriMesh& x, const TriMesh& xhat, const MultiScaleSpec& spec,
                                 const ReductionOptions& opts = {});
LossBreakdown multiscale_gm_loss(const DiscreteVarifold& x, const DiscreteVarifold& xhat, const MultiScaleSpec& spec,
                                 const ReductionOptions& opts = {});

// sigma ladder from the mean triangle diameter d of `reference` up to 10 d,
// geometric, lambda_i = (sigma_i / sigma_max)^2, gaussian position kernel,
// varifold normal kernel. A single scale sits at 10 d.
MultiScaleSpec default_scales(const TriMesh& reference, int n_scales = 4);

using GradientField = std::vector<Vec3>;

struct LossAndGradient {
  LossBreakdown loss;
  GradientField gradient;  // d L / d V(Xhat)
};

// Loss and its gradient with respect to the vertices of `xhat`. Throws
// Error(degenerate_face) when a face of `xhat` is degenerate.
LossAndGradient gm_loss_gradient(const TriMesh& x, const TriMesh& xhat, const MultiScaleSpec& spec,
                                 const ReductionOptions& opts = {});

// Loss against a fixed target. The target varifold and its per-term self inner
// products are computed once at construction.
class GmObjective {
 public:
  GmObjective(const TriMesh& target, MultiScaleSpec spec, ReductionOptions opts = {});
  GmObjective(DiscreteVarifold target, MultiScaleSpec spec, ReductionOptions opts = {});

  LossBreakdown loss(const TriMesh& prediction) const;
  LossAndGradient loss_and_gradient(const TriMesh& prediction) const;

  const MultiScaleSpec& spec() const { return spec_; }
  const DiscreteVarifold& target() const { return target_; }
  const std::vector<double>& target_self() const { return target_self_; }

 private:
  DiscreteVarifold target_;
  MultiScaleSpec spec_;
  ReductionOptions opts_;
  std::vector<double> target_self_;
};

}  // namespace varireg
