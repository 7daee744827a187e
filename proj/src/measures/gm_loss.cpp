#include "varireg/measures/gm_loss.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "varireg/common/error.hpp"

namespace varireg {

namespace {

using Array = Eigen::ArrayXd;
using MapC = Eigen::Map<const Array>;

// Neumaier compensated accumulator.
struct Compensated {
  double sum = 0.0;
  double comp = 0.0;
  void add(double x) {
    const double t = sum + x;
    comp += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  double value() const { return sum + comp; }
};

struct Atoms {
  std::vector<double> x, y, z, nx, ny, nz, w;
  std::size_t size() const { return w.size(); }
};

Atoms to_soa(const DiscreteVarifold& v) {
  Atoms a;
  const std::size_t n = v.size();
  for (auto* arr : {&a.x, &a.y, &a.z, &a.nx, &a.ny, &a.nz, &a.w}) arr->resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    a.x[i] = v.centers[i].x();
    a.y[i] = v.centers[i].y();
    a.z[i] = v.centers[i].z();
    a.nx[i] = v.normals[i].x();
    a.ny[i] = v.normals[i].y();
    a.nz[i] = v.normals[i].z();
    a.w[i] = v.weights[i];
  }
  return a;
}

struct Term {
  PositionKernel position;
  double inv_s2;
  double inv_s;
  NormalKernel normal;
  double inv_tau;
  double lambda;
};

std::vector<Term> to_terms(const MultiScaleSpec& spec) {
  spec.validate();
  std::vector<Term> terms;
  for (const auto& t : spec.terms) {
    const double s = t.kernel.sigma;
    terms.push_back({t.kernel.position, 1.0 / (s * s), 1.0 / s, t.kernel.normal, 1.0 / t.kernel.oriented_sharpness,
                     t.lambda});
  }
  return terms;
}

// Per-row sums over one set of columns.
//   energy[t] = sum_j v_j rho_t gamma_t
//   grad_c    = sum_j sum_t lambda_t v_j gamma_t drho_t/dr2 (c_i - d_j)
//   grad_n    = sum_j sum_t lambda_t v_j gamma'_t rho_t m_j
struct RowSums {
  std::vector<double> energy;
  Vec3 grad_c = Vec3::Zero();
  Vec3 grad_n = Vec3::Zero();
};

struct Scratch {
  Array dx, dy, dz, r2, r, s, kp, dkp, g, gp, wg, wc, wn;
  void resize(Eigen::Index n) {
    for (Array* a : {&dx, &dy, &dz, &r2, &r, &s, &kp, &dkp, &g, &gp, &wg, &wc, &wn}) a->resize(n);
  }
};

template <bool WithGradient>
void row_sums(const Atoms& rows, std::size_t i, const Atoms& cols, const std::vector<Term>& terms,
              std::size_t tile, bool compensated, Scratch& sc, RowSums& out) {
  const std::size_t nt = terms.size();
  std::vector<Compensated> energy(nt);
  std::array<Compensated, 6> grad{};
  const double cx = rows.x[i], cy = rows.y[i], cz = rows.z[i];
  const double nx = rows.nx[i], ny = rows.ny[i], nz = rows.nz[i];
  const std::size_t nc = cols.size();
  for (std::size_t j0 = 0; j0 < nc; j0 += tile) {
    const auto len = static_cast<Eigen::Index>(std::min(tile, nc - j0));
    if (sc.dx.size() < len) sc.resize(static_cast<Eigen::Index>(tile));
    auto dx = sc.dx.head(len);
    auto dy = sc.dy.head(len);
    auto dz = sc.dz.head(len);
    auto r2 = sc.r2.head(len);
    auto s = sc.s.head(len);
    auto kp = sc.kp.head(len);
    auto g = sc.g.head(len);
    auto wg = sc.wg.head(len);
    const MapC X(cols.x.data() + j0, len), Y(cols.y.data() + j0, len), Z(cols.z.data() + j0, len);
    const MapC NX(cols.nx.data() + j0, len), NY(cols.ny.data() + j0, len), NZ(cols.nz.data() + j0, len);
    const MapC W(cols.w.data() + j0, len);
    dx = cx - X;
    dy = cy - Y;
    dz = cz - Z;
    r2 = dx.square() + dy.square() + dz.square();
    s = nx * NX + ny * NY + nz * NZ;
    bool have_r = false;
    if constexpr (WithGradient) {
      sc.wc.head(len).setZero();
      sc.wn.head(len).setZero();
    }
    for (std::size_t t = 0; t < nt; ++t) {
      const Term& term = terms[t];
      switch (term.position) {
        case PositionKernel::gaussian: kp = (-term.inv_s2 * r2).exp(); break;
        case PositionKernel::cauchy: kp = 1.0 / (1.0 + term.inv_s2 * r2); break;
        case PositionKernel::exponential:
          if (!have_r) {
            sc.r.head(len) = r2.sqrt();
            have_r = true;
          }
          kp = (-term.inv_s * sc.r.head(len)).exp();
          break;
      }
      switch (term.normal) {
        case NormalKernel::current: g = s; break;
        case NormalKernel::varifold: g = s.square(); break;
        case NormalKernel::oriented_varifold: g = (term.inv_tau * s).exp(); break;
      }
      wg = W * g;
      const double e = (wg * kp).sum();
      if (compensated) energy[t].add(e);
      else energy[t].sum += e;
      if constexpr (WithGradient) {
        auto dkp = sc.dkp.head(len);
        auto gp = sc.gp.head(len);
        switch (term.position) {
          case PositionKernel::gaussian: dkp = -term.inv_s2 * kp; break;
          case PositionKernel::cauchy: dkp = -term.inv_s2 * kp.square(); break;
          case PositionKernel::exponential: {
            auto r = sc.r.head(len);
            dkp = (r > 0.0).select(-0.5 * term.inv_s * kp / r, 0.0);
            break;
          }
        }
        switch (term.normal) {
          case NormalKernel::current: gp.setOnes(); break;
          case NormalKernel::varifold: gp = 2.0 * s; break;
          case NormalKernel::oriented_varifold: gp = term.inv_tau * g; break;
        }
        sc.wc.head(len) += term.lambda * wg * dkp;
        sc.wn.head(len) += term.lambda * W * gp * kp;
      }
    }
    if constexpr (WithGradient) {
      auto wc = sc.wc.head(len);
      auto wn = sc.wn.head(len);
      const double parts[6] = {(wc * dx).sum(), (wc * dy).sum(), (wc * dz).sum(),
                               (wn * NX).sum(), (wn * NY).sum(), (wn * NZ).sum()};
      for (int k = 0; k < 6; ++k) {
        if (compensated) grad[k].add(parts[k]);
        else grad[k].sum += parts[k];
      }
    }
  }
  out.energy.resize(nt);
  for (std::size_t t = 0; t < nt; ++t) out.energy[t] = energy[t].value();
  if constexpr (WithGradient) {
    out.grad_c = Vec3(grad[0].value(), grad[1].value(), grad[2].value());
    out.grad_n = Vec3(grad[3].value(), grad[4].value(), grad[5].value());
  }
}

void check_tile(const ReductionOptions& opts) {
  if (opts.tile_size == 0) throw Error(Errc::invalid_argument, "tile size must be positive");
}

// sum_i w_i energy_t(i) for every term.
std::vector<double> inner_products(const Atoms& a, const Atoms& b, const std::vector<Term>& terms,
                                   const ReductionOptions& opts) {
  check_tile(opts);
  if (a.size() == 0 || b.size() == 0) throw Error(Errc::empty_mesh, "inner product of an empty varifold");
  const std::size_t nt = terms.size();
  const auto n = static_cast<std::int64_t>(a.size());
  std::vector<double> result(nt, 0.0);
  if (opts.mode == ReductionMode::deterministic) {
    std::vector<double> rows(a.size() * nt);
#pragma omp parallel
    {
      Scratch sc;
      sc.resize(static_cast<Eigen::Index>(opts.tile_size));
      RowSums rs;
#pragma omp for schedule(static)
      for (std::int64_t i = 0; i < n; ++i) {
        row_sums<false>(a, static_cast<std::size_t>(i), b, terms, opts.tile_size, true, sc, rs);
        for (std::size_t t = 0; t < nt; ++t) rows[static_cast<std::size_t>(i) * nt + t] = a.w[i] * rs.energy[t];
      }
    }
    for (std::size_t t = 0; t < nt; ++t) {
      Compensated c;
      for (std::size_t i = 0; i < a.size(); ++i) c.add(rows[i * nt + t]);
      result[t] = c.value();
    }
  } else {
#pragma omp parallel
    {
      Scratch sc;
      sc.resize(static_cast<Eigen::Index>(opts.tile_size));
      RowSums rs;
      std::vector<double> local(nt, 0.0);
#pragma omp for schedule(dynamic, 16) nowait
      for (std::int64_t i = 0; i < n; ++i) {
        row_sums<false>(a, static_cast<std::size_t>(i), b, terms, opts.tile_size, false, sc, rs);
        for (std::size_t t = 0; t < nt; ++t) local[t] += a.w[i] * rs.energy[t];
      }
#pragma omp critical(varireg_inner_product)
      for (std::size_t t = 0; t < nt; ++t) result[t] += local[t];
    }
  }
  for (double v : result)
    if (!std::isfinite(v)) throw Error(Errc::non_finite, "kernel inner product is not finite");
  return result;
}

// Lexicographic order on raw atom data so that gm_loss(X, Y) and gm_loss(Y, X)
// perform the same floating-point operations.
bool canonical_less(const DiscreteVarifold& a, const DiscreteVarifold& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (int k = 0; k < 3; ++k) {
      if (a.centers[i][k] != b.centers[i][k]) return a.centers[i][k] < b.centers[i][k];
      if (a.normals[i][k] != b.normals[i][k]) return a.normals[i][k] < b.normals[i][k];
    }
    if (a.weights[i] != b.weights[i]) return a.weights[i] < b.weights[i];
  }
  return false;
}

LossBreakdown combine(const std::vector<double>& xx, const std::vector<double>& yy, const std::vector<double>& xy,
                      const MultiScaleSpec& spec) {
  LossBreakdown out;
  out.per_scale.resize(spec.size());
  for (std::size_t t = 0; t < spec.size(); ++t) {
    out.per_scale[t] = (xx[t] + yy[t]) - 2.0 * xy[t];
    out.total += spec.terms[t].lambda * out.per_scale[t];
  }
  if (!std::isfinite(out.total)) throw Error(Errc::non_finite, "GM loss is not finite");
  return out;
}

void check_unit_normals(const DiscreteVarifold& v) {
  if (v.centers.size() != v.size() || v.normals.size() != v.size())
    throw Error(Errc::size_mismatch, "varifold arrays must have equal length");
}

}  // namespace

std::vector<double> kernel_inner_products(const DiscreteVarifold& mu, const DiscreteVarifold& nu,
                                          const MultiScaleSpec& spec, const ReductionOptions& opts) {
  check_unit_normals(mu);
  check_unit_normals(nu);
  return inner_products(to_soa(mu), to_soa(nu), to_terms(spec), opts);
}

double kernel_inner_product(const DiscreteVarifold& mu, const DiscreteVarifold& nu, const KernelSpec& k,
                            const ReductionOptions& opts) {
  return kernel_inner_products(mu, nu, single_scale(k), opts).front();
}

LossBreakdown multiscale_gm_loss(const DiscreteVarifold& x, const DiscreteVarifold& xhat, const MultiScaleSpec& spec,
                                 const ReductionOptions& opts) {
  const bool swap = canonical_less(xhat, x);
  const DiscreteVarifold& a = swap ? xhat : x;
  const DiscreteVarifold& b = swap ? x : xhat;
  const auto terms = to_terms(spec);
  const Atoms sa = to_soa(a);
  const Atoms sb = to_soa(b);
  const auto aa = inner_products(sa, sa, terms, opts);
  const auto bb = inner_products(sb, sb, terms, opts);
  const auto ab = inner_products(sa, sb, terms, opts);
  return combine(aa, bb, ab, spec);
}

LossBreakdown multiscale_gm_loss(const TriMesh& x, const TriMesh& xhat, const MultiScaleSpec& spec,
                                 const ReductionOptions& opts) {
  return multiscale_gm_loss(varifold_of_mesh(x), varifold_of_mesh(xhat), spec, opts);
}

double gm_loss(const DiscreteVarifold& x, const DiscreteVarifold& xhat, const KernelSpec& k,
               const ReductionOptions& opts) {
  return multiscale_gm_loss(x, xhat, single_scale(k), opts).total;
}

double gm_loss(const TriMesh& x, const TriMesh& xhat, const KernelSpec& k, const ReductionOptions& opts) {
  return gm_loss(varifold_of_mesh(x), varifold_of_mesh(xhat), k, opts);
}

MultiScaleSpec default_scales(const TriMesh& reference, int n_scales) {
  if (n_scales < 1) throw Error(Errc::invalid_argument, "n_scales must be >= 1");
  const double d = mesh_stats(reference).mean_triangle_diameter;
  return geometric_ladder(d, 10.0 * d, n_scales);
}

GmObjective::GmObjective(DiscreteVarifold target, MultiScaleSpec spec, ReductionOptions opts)
    : target_(std::move(target)), spec_(std::move(spec)), opts_(opts) {
  check_tile(opts_);
  const Atoms t = to_soa(target_);
  target_self_ = inner_products(t, t, to_terms(spec_), opts_);
}

GmObjective::GmObjective(const TriMesh& target, MultiScaleSpec spec, ReductionOptions opts)
    : GmObjective(varifold_of_mesh(target), std::move(spec), opts) {}

LossBreakdown GmObjective::loss(const TriMesh& prediction) const {
  const auto terms = to_terms(spec_);
  const Atoms p = to_soa(varifold_of_mesh(prediction));
  const Atoms t = to_soa(target_);
  return combine(target_self_, inner_products(p, p, terms, opts_), inner_products(p, t, terms, opts_), spec_);
}

LossAndGradient GmObjective::loss_and_gradient(const TriMesh& prediction) const {
  // face i <-> atom i: degenerate faces are an error here
  const FaceGeometry geo = face_geometry(prediction);
  const Atoms p = to_soa(DiscreteVarifold{geo.centers, geo.normals, geo.areas});
  const Atoms t = to_soa(target_);
  const auto terms = to_terms(spec_);
  const std::size_t nt = terms.size();
  const std::size_t nf = p.size();
  const bool det = opts_.mode == ReductionMode::deterministic;

  std::vector<double> self_rows(nf * nt), cross_rows(nf * nt);
  std::vector<double> d_area(nf);
  std::vector<Vec3> d_center(nf), d_normal(nf);
  const auto n = static_cast<std::int64_t>(nf);
#pragma omp parallel
  {
    Scratch sc;
    sc.resize(static_cast<Eigen::Index>(opts_.tile_size));
    RowSums self, cross;
#pragma omp for schedule(static)
    for (std::int64_t ii = 0; ii < n; ++ii) {
      const auto i = static_cast<std::size_t>(ii);
      row_sums<true>(p, i, p, terms, opts_.tile_size, det, sc, self);
      row_sums<true>(p, i, t, terms, opts_.tile_size, det, sc, cross);
      const double a = p.w[i];
      double da = 0.0;
      for (std::size_t k = 0; k < nt; ++k) {
        self_rows[i * nt + k] = a * self.energy[k];
        cross_rows[i * nt + k] = a * cross.energy[k];
        da += terms[k].lambda * 2.0 * (self.energy[k] - cross.energy[k]);
      }
      d_area[i] = da;
      // pair term a_i b_j rho gamma: d/dc_i = a_i b_j gamma 2 (c_i - d_j) drho/dr2
      d_center[i] = 4.0 * a * (self.grad_c - cross.grad_c);
      d_normal[i] = 2.0 * a * (self.grad_n - cross.grad_n);
    }
  }

  std::vector<double> self(nt), cross(nt);
  for (std::size_t k = 0; k < nt; ++k) {
    Compensated s, c;
    for (std::size_t i = 0; i < nf; ++i) {
      s.add(self_rows[i * nt + k]);
      c.add(cross_rows[i * nt + k]);
    }
    self[k] = s.value();
    cross[k] = c.value();
  }

  LossAndGradient out;
  out.loss = combine(target_self_, self, cross, spec_);
  out.gradient.assign(prediction.vertices.size(), Vec3::Zero());
  for (std::size_t i = 0; i < nf; ++i) {
    const Face& f = prediction.faces[i];
    const Vec3& P = prediction.vertices[f[0]];
    const Vec3& Q = prediction.vertices[f[1]];
    const Vec3& R = prediction.vertices[f[2]];
    const Vec3& nrm = geo.normals[i];
    const double wlen = 2.0 * geo.areas[i];
    // a = |w|/2, n = w/|w|  =>  dL/dw = dL/da n/2 + (I - n n^T) dL/dn / |w|
    const Vec3 gw = 0.5 * d_area[i] * nrm + (d_normal[i] - nrm.dot(d_normal[i]) * nrm) / wlen;
    const Vec3 gc = d_center[i] / 3.0;
    // w = (Q-P) x (R-P)
    out.gradient[f[0]] += (Q - R).cross(gw) + gc;
    out.gradient[f[1]] += (R - P).cross(gw) + gc;
    out.gradient[f[2]] += (P - Q).cross(gw) + gc;
  }
  for (const auto& g : out.gradient)
    if (!g.allFinite()) throw Error(Errc::non_finite, "GM loss gradient is not finite");
  return out;
}

LossAndGradient gm_loss_gradient(const TriMesh& x, const TriMesh& xhat, const MultiScaleSpec& spec,
                                 const ReductionOptions& opts) {
  return GmObjective(x, spec, opts).loss_and_gradient(xhat);
}

}  // namespace varireg
