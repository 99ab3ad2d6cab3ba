#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace planemvs {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec3f = Eigen::Vector3f;
using Mat3 = Eigen::Matrix3d;

}  // namespace planemvs
