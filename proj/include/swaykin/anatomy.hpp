#pragma once

#include <Eigen/Core>
#include <string>
#include <utility>
#include <vector>

#include "swaykin/camera.hpp"

namespace swaykin {

enum class Axis { AP = 0, ML = 1, SI = 2 };

/// Extrinsics of the forward-facing anatomical board (board -> camera).
/// Board axes map to anatomy as X -> ML, Y -> SI, Z -> AP.
class AnatomicalFrame {
 public:
  AnatomicalFrame() = default;
  /// Throws InvalidInput unless the rotation block is orthonormal (1e-9) and
  /// the bottom row is (0, 0, 0, 1).
  explicit AnatomicalFrame(const Eigen::Matrix4d& board_to_camera);
  explicit AnatomicalFrame(const RigidTransform& board_to_camera);

  const RigidTransform& board_to_camera() const noexcept { return board_to_camera_; }
  Eigen::Matrix4d matrix() const { return board_to_camera_.matrix(); }

  /// Camera-frame point to (AP, ML, SI), millimeters.
  Eigen::Vector3d to_anatomical(const WorldPoint& z) const;

  static constexpr const char* kAxisConvention = "board X->ML, Y->SI, Z->AP";

 private:
  RigidTransform board_to_camera_;
  RigidTransform camera_to_board_;
};

/// Uniformly sampled (AP, ML, SI) series for one body segment.
struct SwayTrajectory {
  std::string segment;
  double rate_hz = 30.0;
  double t0 = 0.0;
  std::vector<Eigen::Vector3d> samples;
  std::vector<bool> valid;

  std::size_t size() const noexcept { return samples.size(); }
  double time(std::size_t i) const { return t0 + static_cast<double>(i) / rate_hz; }
  double duration() const { return samples.empty() ? 0.0 : time(samples.size() - 1) - t0; }
  std::size_t valid_count() const;
  /// Throws InvalidInput on mismatched lengths, non-positive rate, or
  /// non-finite valid samples.
  void validate() const;
};

/// Odd window length in samples: window_sec * rate rounded up to the next
/// odd integer.
int savitzky_golay_window(double window_sec, double rate_hz);

/// Least-squares polynomial smoothing weights: evaluating the order-`order`
/// fit over `window` samples at sample `position` (0-based within window).
std::vector<double> savitzky_golay_weights(int window, int order, int position);

/// Per-axis Savitzky-Golay smoothing. Samples within half a window of a run
/// end are evaluated from the one-sided fit over the first/last full window.
/// Each contiguous valid run is filtered independently; runs shorter than the
/// window are left as they are. Throws InvalidInput when the whole series is
/// shorter than the window or order >= window.
SwayTrajectory savitzky_golay(const SwayTrajectory& series, double window_sec = 0.5, int order = 2);

/// Linear interpolation onto a uniform `target_hz` timebase spanning the
/// source range. Output samples that depend on an invalid source sample are
/// invalid.
SwayTrajectory resample_linear(const SwayTrajectory& series, double target_hz);

struct GapReport {
  std::size_t filled_samples = 0;
  std::vector<std::pair<std::size_t, std::size_t>> unfilled;  // [first, last] invalid index ranges left as is
  bool leading_gap = false;
  bool trailing_gap = false;
};

/// Linearly fills interior gaps no longer than `max_gap_sec` (gap duration
/// = invalid sample count / rate). Longer gaps and gaps touching either end
/// stay invalid and are reported.
SwayTrajectory interpolate_gaps(const SwayTrajectory& series, double max_gap_sec, GapReport* report = nullptr);

}  // namespace swaykin
