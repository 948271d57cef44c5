#pragma once

#include <span>
#include <string>
#include <vector>

#include "swaykin/anatomy.hpp"
#include "swaykin/camera.hpp"
#include "swaykin/features.hpp"
#include "swaykin/kinematics.hpp"
#include "swaykin/pose.hpp"
#include "swaykin/target.hpp"

namespace swaykin {

/// Virtual point of every fitted frame in anatomical coordinates; gap frames
/// are invalid.
SwayTrajectory anatomical_trajectory(const PoseTrack& track, const GeometricTargetModel& model,
                                     const AnatomicalFrame& frame, const std::string& segment);

/// Same mapping for a known parameter sequence (all samples valid).
SwayTrajectory anatomical_trajectory(std::span<const KinematicParams> thetas, double rate_hz,
                                     const GeometricTargetModel& model, const AnatomicalFrame& frame,
                                     const std::string& segment);

struct PostprocessOptions {
  double max_gap_sec = 0.5;
  bool smooth = true;
  double sg_window_sec = 0.5;
  int sg_order = 2;
};

/// Gap interpolation followed by Savitzky-Golay smoothing.
SwayTrajectory postprocess_trajectory(const SwayTrajectory& raw, const PostprocessOptions& options = {},
                                      GapReport* gaps = nullptr);

/// Undistorts observed pixel positions in place so that the pinhole model
/// applies. A no-op for intrinsics without distortion.
void undistort_observations(std::vector<std::vector<FeatureObservation>>& frames, const CameraIntrinsics& intrinsics);

/// Labels detections with model indices by gated nearest-neighbour matching
/// against the pinhole projection of `model` at `predicted`. Returns an empty
/// set when fewer than `min_matches` features match.
std::vector<FeatureObservation> match_to_model(std::span<const FeatureObservation> detections,
                                               const GeometricTargetModel& model, const KinematicParams& predicted,
                                               const CameraIntrinsics& intrinsics, double gate_px,
                                               std::size_t min_matches = 4);

}  // namespace swaykin
