#pragma once

#include <span>
#include <vector>

#include "swaykin/camera.hpp"
#include "swaykin/features.hpp"
#include "swaykin/image.hpp"
#include "swaykin/lm.hpp"

namespace swaykin {

/// Planar checkerboard. `rows` x `cols` counts inner corners. Corner (r, c)
/// sits at (c * square, r * square, 0): origin at the first inner corner, X
/// to the right, Y down, Z out of the board plane.
struct BoardGeometry {
  int rows = 6;
  int cols = 9;
  double square_size_mm = 30.0;

  void validate() const;
  std::size_t corner_count() const { return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols); }
  WorldPoint corner(int r, int c) const { return {c * square_size_mm, r * square_size_mm, 0.0}; }
  std::vector<WorldPoint> corners() const;  // row-major
};

using CalibrationView = std::vector<PlanarCorrespondence>;

struct CalibrationOptions {
  LmConfig lm{.max_iterations = 200, .gradient_tolerance = 1e-10, .step_tolerance = 1e-12,
              .initial_lambda = 1e-3, .lambda_factor = 10.0};
  /// Views whose homography constraints leave the intrinsics undetermined
  /// (condition number above this) are rejected.
  double max_condition_number = 1e8;
};

struct CalibrationResult {
  CameraIntrinsics intrinsics;
  std::vector<RigidTransform> extrinsics;  // board -> camera, one per view
  double rms_px = 0.0;                     // sqrt(mean squared point reprojection distance)
  double closed_form_condition_number = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Closed-form pinhole intrinsics (with skew) from >= 3 board homographies.
/// Throws IllConditioned, reporting the condition number, when the views do
/// not constrain all five parameters.
CameraIntrinsics closed_form_intrinsics(std::span<const Eigen::Matrix3d> homographies,
                                        double* condition_number = nullptr, double max_condition_number = 1e8);

/// Closed-form initialization followed by joint LM refinement of intrinsics
/// (including k1, k2) and per-view extrinsics over the total reprojection
/// error. Throws IllConditioned for fewer than 3 views or degenerate view sets.
CalibrationResult calibrate(std::span<const CalibrationView> views, const CalibrationOptions& options = {});

/// Detects and orders the inner corners of `board` in a frame. Throws
/// InvalidInput when the corner grid cannot be recovered.
CalibrationView find_board_corners(const GrayImage& img, const BoardGeometry& board,
                                   const DetectorOptions& options = {});

}  // namespace swaykin
