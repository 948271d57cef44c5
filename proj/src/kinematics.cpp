#include "swaykin/kinematics.hpp"

#include <cmath>
#include <numbers>

#include "swaykin/error.hpp"

namespace swaykin {

bool KinematicParams::is_valid() const {
  return theta.allFinite() && std::abs(theta[1]) < std::numbers::pi / 2.0 - 1e-6;
}

Eigen::Matrix4d motion_matrix(const KinematicParams& params) {
  const double c1 = std::cos(params[0]), s1 = std::sin(params[0]);
  const double c2 = std::cos(params[1]), s2 = std::sin(params[1]);
  const double c3 = std::cos(params[2]), s3 = std::sin(params[2]);
  Eigen::Matrix4d m;
  m << c1 * c2, c1 * s2 * s3 - s1 * c3, c1 * s2 * c3 + s1 * s3, params[3],
       s1 * c2, s1 * s2 * s3 + c1 * c3, s1 * s2 * c3 - c1 * s3, params[4],
       -s2,     c2 * s3,                c2 * c3,                params[5],
       0.0,     0.0,                    0.0,                    1.0;
  return m;
}

RigidTransform to_rigid_transform(const KinematicParams& params) {
  return RigidTransform::from_matrix(motion_matrix(params));
}

Eigen::Vector3d euler_from_rotation(const Eigen::Matrix3d& r) {
  if (std::abs(r(2, 0)) > 1.0 - 1e-9) {
    throw Error(ErrorCode::Gimbal, "rotation is at the Euler singularity (|R31| ~ 1)");
  }
  return {std::atan2(r(1, 0), r(0, 0)), -std::asin(r(2, 0)), std::atan2(r(2, 1), r(2, 2))};
}

KinematicParams from_rigid_transform(const RigidTransform& transform) {
  KinematicParams p;
  p.theta.head<3>() = euler_from_rotation(transform.rotation);
  p.theta.tail<3>() = transform.translation;
  return p;
}

}  // namespace swaykin
