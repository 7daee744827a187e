#include "varireg/measures/varifold.hpp"

#include <cmath>

#include "varireg/common/error.hpp"

namespace varireg {

double DiscreteVarifold::mass() const {
  double m = 0.0;
  for (double w : weights) m += w;
  return m;
}

DiscreteVarifold varifold_of_mesh(const TriMesh& mesh, std::size_t* dropped) {
  FaceGeometry g = face_geometry_nondegenerate(mesh);
  if (dropped) *dropped = mesh.faces.size() - g.size();
  if (g.size() == 0) throw Error(Errc::empty_mesh, "every face is degenerate; varifold would be empty");
  return DiscreteVarifold{std::move(g.centers), std::move(g.normals), std::move(g.areas)};
}

DiscreteVarifold make_varifold(std::vector<Vec3> centers, std::vector<Vec3> normals, std::vector<double> weights) {
  if (centers.size() != normals.size() || centers.size() != weights.size())
    throw Error(Errc::size_mismatch, "varifold arrays must have equal length");
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] > 0.0)) throw Error(Errc::invalid_argument, "varifold weights must be positive");
    if (std::abs(normals[i].norm() - 1.0) > 1e-9) throw Error(Errc::invalid_argument, "varifold normals must be unit");
    if (!centers[i].allFinite()) throw Error(Errc::non_finite, "varifold center is not finite");
  }
  return DiscreteVarifold{std::move(centers), std::move(normals), std::move(weights)};
}

}  // namespace varireg
