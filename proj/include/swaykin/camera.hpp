#pragma once

#include <Eigen/Core>
#include <span>

#include "swaykin/image.hpp"

namespace swaykin {

using PixelPoint = Eigen::Vector2d;  // (u, v), pixels
using WorldPoint = Eigen::Vector3d;  // (X, Y, Z), millimeters

/// Pinhole intrinsics plus two-coefficient radial distortion. The distortion
/// acts on normalized (pre-K) image coordinates.
struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double s = 0.0;
  double x0 = 0.0;
  double y0 = 0.0;
  double k1 = 0.0;
  double k2 = 0.0;

  Eigen::Matrix3d K() const;
  bool has_distortion() const noexcept { return k1 != 0.0 || k2 != 0.0; }
  /// Throws InvalidInput unless fx, fy > 0 and every field is finite.
  void validate() const;

  Eigen::Vector2d pixel_to_normalized(const PixelPoint& p) const;
  PixelPoint normalized_to_pixel(const Eigen::Vector2d& n) const;
};

/// Rotation + translation taking points from a source frame into the camera
/// (or other destination) frame: x' = R x + t.
struct RigidTransform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return rotation * p + translation; }
  Eigen::Matrix4d matrix() const;
  RigidTransform inverse() const;
  RigidTransform compose(const RigidTransform& inner) const;  // this ∘ inner

  static RigidTransform from_matrix(const Eigen::Matrix4d& m);
  bool is_orthonormal(double tol = 1e-9) const;
};

enum class Distortion { Apply, Ignore };

/// Maps a camera-frame point to pixels. Throws BehindCamera when Z <= 1e-9.
PixelPoint project_camera_point(const CameraIntrinsics& intrinsics, const Eigen::Vector3d& pc,
                                Distortion distortion = Distortion::Apply);

PixelPoint project(const CameraIntrinsics& intrinsics, const RigidTransform& pose, const WorldPoint& p,
                   Distortion distortion = Distortion::Apply);

Eigen::Vector2d distort_normalized(const CameraIntrinsics& intrinsics, const Eigen::Vector2d& p_norm);

/// Inverse of distort_normalized by fixed-point iteration (at most 20 steps,
/// tolerance 1e-10 in normalized units). Throws DistortionInversion otherwise.
Eigen::Vector2d undistort_normalized(const CameraIntrinsics& intrinsics, const Eigen::Vector2d& p_distorted);

PixelPoint undistort_point(const CameraIntrinsics& intrinsics, const PixelPoint& p);

/// Resamples a distorted frame onto the ideal pinhole grid. Output pixels whose
/// source location falls outside the input are 0.
GrayImage undistort_frame(const CameraIntrinsics& intrinsics, const GrayImage& image);

/// A world point on the Z = 0 plane paired with its observed pixel.
struct PlanarCorrespondence {
  WorldPoint world;
  PixelPoint pixel;
};

/// Normalized DLT. Result is scaled so that H(2,2) = 1, or to unit Frobenius
/// norm when H(2,2) is numerically zero.
Eigen::Matrix3d estimate_homography(std::span<const PlanarCorrespondence> pairs);

/// Closed-form pose of a planar target (Z = 0 in its own frame) from the
/// homography. Pixels are undistorted first when the intrinsics carry distortion.
RigidTransform estimate_planar_extrinsics(const CameraIntrinsics& intrinsics,
                                          std::span<const PlanarCorrespondence> pairs);

/// Nearest rotation matrix (Frobenius sense) with determinant +1.
Eigen::Matrix3d nearest_rotation(const Eigen::Matrix3d& m);

}  // namespace swaykin
