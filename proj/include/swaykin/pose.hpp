#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "swaykin/camera.hpp"
#include "swaykin/features.hpp"
#include "swaykin/kinematics.hpp"
#include "swaykin/lm.hpp"
#include "swaykin/target.hpp"

namespace swaykin {

struct FitConfig {
  LmConfig lm;
  double angle_step_rad = 1e-6;      // central-difference step for theta1..3
  double translation_step_mm = 1e-4;  // and for theta4..6
  std::size_t min_correspondences = 4;
  double nominal_depth_mm = 1000.0;  // frontal prior for non-planar models
};

struct FitReport {
  KinematicParams theta;
  double rms_residual_px = 0.0;  // sqrt(mean squared point distance)
  int iterations = 0;
  bool converged = false;
  bool degenerate_geometry = false;  // Jacobian rank < 6 at the solution
  Vector6d covariance_diagonal = Vector6d::Zero();
  std::vector<double> objective_history;  // sum of squares at start and after each accepted step
};

/// Stacked (predicted - observed) pixel residuals, two entries per
/// observation, using the pinhole model (observations are expected to be
/// undistorted). Throws BehindCamera naming the offending feature.
Eigen::VectorXd reprojection_residuals(const KinematicParams& theta, const GeometricTargetModel& model,
                                       std::span<const FeatureObservation> obs, const CameraIntrinsics& intrinsics);

FitReport fit_pose(const KinematicParams& init, const GeometricTargetModel& model,
                   std::span<const FeatureObservation> obs, const CameraIntrinsics& intrinsics,
                   const FitConfig& config = {});

/// Closed-form planar pose for the first frame, converted to Euler
/// parameters. Non-planar models fall back to fit_pose from a frontal prior.
KinematicParams initialize_first_frame(const GeometricTargetModel& model, std::span<const FeatureObservation> obs,
                                       const CameraIntrinsics& intrinsics, const FitConfig& config = {});

enum class FrameStatus { Fitted, Gap };

enum class InitPolicy {
  WarmStart,       // previous fitted parameters seed the next frame
  RandomPerFrame,  // every frame starts from an independent random draw (baseline)
};

struct TrackConfig {
  FitConfig fit;
  InitPolicy init_policy = InitPolicy::WarmStart;
  std::uint64_t random_seed = 0;
  int random_restarts = 1;  // RandomPerFrame: independent draws per frame, lowest cost kept
};

struct PoseTrack {
  double rate_hz = 30.0;
  std::vector<FitReport> reports;  // gap frames hold the last fitted parameters
  std::vector<FrameStatus> status;

  std::size_t size() const noexcept { return status.size(); }
  std::size_t fitted_count() const;
  double time(std::size_t frame) const { return static_cast<double>(frame) / rate_hz; }
};

/// Fits every frame in order. Frames with too few observations become gaps;
/// the next fitted frame warm-starts from the last successful parameters.
/// Throws InsufficientCorrespondence if no frame can be fitted.
PoseTrack track_sequence(std::span<const std::vector<FeatureObservation>> frames, const GeometricTargetModel& model,
                         const CameraIntrinsics& intrinsics, double rate_hz, const TrackConfig& config = {});

}  // namespace swaykin
