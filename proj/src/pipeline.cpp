#include "swaykin/pipeline.hpp"

#include <limits>

#include "swaykin/error.hpp"

namespace swaykin {

SwayTrajectory anatomical_trajectory(const PoseTrack& track, const GeometricTargetModel& model,
                                     const AnatomicalFrame& frame, const std::string& segment) {
  SwayTrajectory out;
  out.segment = segment;
  out.rate_hz = track.rate_hz;
  out.samples.reserve(track.size());
  out.valid.reserve(track.size());
  for (std::size_t i = 0; i < track.size(); ++i) {
    if (track.status[i] == FrameStatus::Fitted) {
      out.samples.push_back(frame.to_anatomical(virtual_point(track.reports[i].theta, model.virtual_offset)));
      out.valid.push_back(true);
    } else {
      out.samples.push_back(Eigen::Vector3d::Constant(std::numeric_limits<double>::quiet_NaN()));
      out.valid.push_back(false);
    }
  }
  return out;
}

SwayTrajectory anatomical_trajectory(std::span<const KinematicParams> thetas, double rate_hz,
                                     const GeometricTargetModel& model, const AnatomicalFrame& frame,
                                     const std::string& segment) {
  SwayTrajectory out;
  out.segment = segment;
  out.rate_hz = rate_hz;
  for (const auto& theta : thetas) {
    out.samples.push_back(frame.to_anatomical(virtual_point(theta, model.virtual_offset)));
    out.valid.push_back(true);
  }
  return out;
}

SwayTrajectory postprocess_trajectory(const SwayTrajectory& raw, const PostprocessOptions& options, GapReport* gaps) {
  SwayTrajectory filled = interpolate_gaps(raw, options.max_gap_sec, gaps);
  if (!options.smooth) return filled;
  return savitzky_golay(filled, options.sg_window_sec, options.sg_order);
}

void undistort_observations(std::vector<std::vector<FeatureObservation>>& frames, const CameraIntrinsics& intrinsics) {
  if (!intrinsics.has_distortion()) return;
  for (auto& frame : frames) {
    for (auto& o : frame) o.position = undistort_point(intrinsics, o.position);
  }
}

std::vector<FeatureObservation> match_to_model(std::span<const FeatureObservation> detections,
                                               const GeometricTargetModel& model, const KinematicParams& predicted,
                                               const CameraIntrinsics& intrinsics, double gate_px,
                                               std::size_t min_matches) {
  const RigidTransform pose = to_rigid_transform(predicted);
  std::vector<PixelPoint> expected;
  expected.reserve(model.size());
  for (const auto& p : model.points) expected.push_back(project(intrinsics, pose, p, Distortion::Ignore));
  try {
    return match_features(detections, expected, gate_px, min_matches);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InsufficientCorrespondence) return {};
    throw;
  }
}

}  // namespace swaykin
