#pragma once

#include <Eigen/Core>

#include "swaykin/camera.hpp"

namespace swaykin {

using Vector6d = Eigen::Matrix<double, 6, 1>;

/// Six-DOF motion parameters. Element order follows the motion matrix:
/// theta1..theta3 are Z-Y-X Euler angles (radians), theta4..theta6 the
/// camera-frame translation (millimeters).
struct KinematicParams {
  Vector6d theta = Vector6d::Zero();

  KinematicParams() = default;
  explicit KinematicParams(const Vector6d& t) : theta(t) {}
  KinematicParams(double t1, double t2, double t3, double t4, double t5, double t6) {
    theta << t1, t2, t3, t4, t5, t6;
  }

  double operator[](int i) const { return theta[i]; }
  double& operator[](int i) { return theta[i]; }
  Eigen::Vector3d translation() const { return theta.tail<3>(); }

  /// Finite, and |theta2| < pi/2 - 1e-6.
  bool is_valid() const;
};

/// The 4x4 motion matrix: rotation Rz(theta1) Ry(theta2) Rx(theta3) and
/// translation (theta4, theta5, theta6).
Eigen::Matrix4d motion_matrix(const KinematicParams& params);

RigidTransform to_rigid_transform(const KinematicParams& params);

/// Inverse of the rotation block of motion_matrix. Throws Gimbal when
/// |R(2,0)| > 1 - 1e-9.
Eigen::Vector3d euler_from_rotation(const Eigen::Matrix3d& rotation);

KinematicParams from_rigid_transform(const RigidTransform& transform);

}  // namespace swaykin
