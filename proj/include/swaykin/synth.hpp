#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "swaykin/calibration.hpp"
#include "swaykin/camera.hpp"
#include "swaykin/features.hpp"
#include "swaykin/image.hpp"
#include "swaykin/kinematics.hpp"
#include "swaykin/target.hpp"

namespace swaykin {

struct SinusoidComponent {
  double amplitude = 0.0;     // mm or rad
  double frequency_hz = 0.0;
};

/// Sum-of-sinusoids sway. Translation components are named anatomically; for
/// a camera behind the subject AP runs along camera Z, ML along X, SI along Y.
struct SwayProfile {
  SinusoidComponent ap{10.0, 0.3};
  SinusoidComponent ml{6.0, 0.2};
  SinusoidComponent si{3.0, 0.4};
  std::array<SinusoidComponent, 3> rotation{{{0.02, 0.15}, {0.02, 0.25}, {0.02, 0.1}}};  // theta1..3
  double duration_sec = 60.0;
  double rate_hz = 30.0;
  std::uint64_t seed = 1;

  void validate() const;
  std::size_t frame_count() const;
};

struct NoiseSpec {
  double sigma_px = 0.0;
  double dropout = 0.0;  // per feature per frame
  std::uint64_t seed = 2;

  void validate() const;
};

/// theta(t) = base + A sin(2 pi f t + phase) per component, phases drawn from
/// the profile seed. Frame i is at t = i / rate.
std::vector<KinematicParams> generate_trajectory(const SwayProfile& profile, const KinematicParams& base);

/// Exact projections (distortion applied when the intrinsics carry it) plus
/// seeded isotropic Gaussian noise; features are dropped independently with
/// the dropout probability. Observations carry ground-truth model indices.
std::vector<std::vector<FeatureObservation>> render_observations(const std::vector<KinematicParams>& theta_seq,
                                                                 const GeometricTargetModel& model,
                                                                 const CameraIntrinsics& intrinsics,
                                                                 const NoiseSpec& noise);

struct RenderOptions {
  int width = 2048;
  int height = 2048;
  double patch_radius_px = 12.0;
  double blur_sigma_px = 1.0;
  double contrast = 0.8;    // peak-to-peak of a saddle
  double background = 0.5;
};

/// Blurred saddle (2x2 checker junction) patches at every projected feature,
/// on a uniform background. Saddle edges follow the target's local X and Y
/// axes; the patch fades out towards `patch_radius_px`. Features outside
/// the image are skipped and reported in `warnings`.
GrayImage render_frame(const KinematicParams& theta, const GeometricTargetModel& model,
                       const CameraIntrinsics& intrinsics, const RenderOptions& options = {},
                       std::vector<std::string>* warnings = nullptr);

/// Several scenes rendered into one frame (e.g. both trunk targets).
GrayImage render_scene(const std::vector<std::pair<KinematicParams, const GeometricTargetModel*>>& targets,
                       const CameraIntrinsics& intrinsics, const RenderOptions& options = {},
                       std::vector<std::string>* warnings = nullptr);

/// Full checkerboard with a one-square white margin, seen through the
/// (possibly distorted) camera.
GrayImage render_checkerboard(const CameraIntrinsics& intrinsics, const RigidTransform& board_to_camera,
                              const BoardGeometry& board, const RenderOptions& options = {});

/// Deterministic set of board poses with distinct tilts, spread over the
/// field of view, with the board centred at roughly `depth_mm`.
std::vector<RigidTransform> calibration_poses(const BoardGeometry& board, int count, double depth_mm = 1000.0);

}  // namespace swaykin
