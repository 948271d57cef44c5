#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "swaykin/camera.hpp"
#include "swaykin/kinematics.hpp"

namespace swaykin {

/// A-priori feature geometry of a worn target, expressed in the target's own
/// frame (millimeters). The origin is the tracked reference point; Z points
/// into the body when worn.
struct GeometricTargetModel {
  std::string name;
  std::vector<WorldPoint> points;
  Eigen::Vector3d virtual_offset = Eigen::Vector3d::Zero();

  std::size_t size() const noexcept { return points.size(); }

  /// n >= 4, finite, not all collinear. Throws InvalidInput.
  void validate_shape() const;
  bool is_planar(double tol_mm = 1e-6) const;
};

/// rows x cols grid of junctions at `pitch_mm`, origin at junction (0, 0),
/// with the junction opposite the origin removed.
GeometricTargetModel grid_target(std::string name, int rows = 4, int cols = 4, double pitch_mm = 20.0,
                                 bool drop_far_corner = true);

/// Upper-trunk target: the default grid, tracked at its origin.
GeometricTargetModel shoulder_target();
/// Lower-trunk target: the default grid with a 100 mm virtual offset along
/// the target normal (into the body).
GeometricTargetModel lumbar_target();

/// Rejects models that some nontrivial rotation maps onto themselves (as a
/// point set, 1e-6 mm tolerance). The search is grid-sampled at
/// `grid_step_deg`; for planar models only rotations keeping the visible side
/// towards the camera are considered. Throws AmbiguousTarget naming the
/// symmetry.
void validate_asymmetry(const GeometricTargetModel& model, double grid_step_deg = 1.0);

/// First three components of M(theta) * (delta, 1).
WorldPoint virtual_point(const KinematicParams& params, const Eigen::Vector3d& delta);

/// Model points mapped into the camera frame by M(theta).
std::vector<WorldPoint> transform_model(const GeometricTargetModel& model, const KinematicParams& params);

}  // namespace swaykin
