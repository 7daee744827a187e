#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace varireg {

using Vec3 = Eigen::Vector3d;
using Face = std::array<std::int32_t, 3>;

}  // namespace varireg
