#include "swaykin/anatomy.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "swaykin/error.hpp"

namespace swaykin {

AnatomicalFrame::AnatomicalFrame(const Eigen::Matrix4d& board_to_camera)
    : AnatomicalFrame([&] {
        if (!board_to_camera.allFinite()) throw Error(ErrorCode::InvalidInput, "board extrinsics are not finite");
        if ((board_to_camera.row(3) - Eigen::RowVector4d(0, 0, 0, 1)).cwiseAbs().maxCoeff() > 1e-12) {
          throw Error(ErrorCode::InvalidInput, "board extrinsics are not an affine rigid transform");
        }
        return RigidTransform::from_matrix(board_to_camera);
      }()) {}

AnatomicalFrame::AnatomicalFrame(const RigidTransform& board_to_camera) : board_to_camera_(board_to_camera) {
  if (!board_to_camera.is_orthonormal(1e-9)) {
    throw Error(ErrorCode::InvalidInput, "board rotation is not orthonormal (non-invertible frame)");
  }
  camera_to_board_ = board_to_camera.inverse();
}

Eigen::Vector3d AnatomicalFrame::to_anatomical(const WorldPoint& z) const {
  const Eigen::Vector3d b = camera_to_board_.apply(z);
  return {b.z(), b.x(), b.y()};
}

std::size_t SwayTrajectory::valid_count() const {
  std::size_t n = 0;
  for (bool v : valid) n += v;
  return n;
}

void SwayTrajectory::validate() const {
  if (!(rate_hz > 0.0) || !std::isfinite(rate_hz)) throw Error(ErrorCode::InvalidInput, "rate must be positive");
  if (valid.size() != samples.size()) throw Error(ErrorCode::InvalidInput, "validity mask length mismatch");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (valid[i] && !samples[i].allFinite()) {
      throw Error(ErrorCode::InvalidInput, "non-finite valid sample at index " + std::to_string(i));
    }
  }
}

int savitzky_golay_window(double window_sec, double rate_hz) {
  if (!(window_sec > 0.0) || !(rate_hz > 0.0)) throw Error(ErrorCode::InvalidInput, "window and rate must be positive");
  int n = static_cast<int>(std::ceil(window_sec * rate_hz - 1e-9));
  if (n % 2 == 0) ++n;
  return std::max(n, 1);
}

std::vector<double> savitzky_golay_weights(int window, int order, int position) {
  if (order < 0 || order >= window) throw Error(ErrorCode::InvalidInput, "polynomial order must be < window");
  if (position < 0 || position >= window) throw Error(ErrorCode::InvalidInput, "evaluation position outside window");
  const double center = 0.5 * (window - 1);
  Eigen::MatrixXd vander(window, order + 1);
  for (int i = 0; i < window; ++i) {
    const double x = i - center;
    double p = 1.0;
    for (int k = 0; k <= order; ++k) {
      vander(i, k) = p;
      p *= x;
    }
  }
  // weights = e(position)^T (V^T V)^-1 V^T
  Eigen::VectorXd e(order + 1);
  double p = 1.0;
  for (int k = 0; k <= order; ++k) {
    e[k] = p;
    p *= position - center;
  }
  const Eigen::MatrixXd vtv = vander.transpose() * vander;
  const Eigen::VectorXd y = vtv.ldlt().solve(e);
  const Eigen::VectorXd w = vander * y;
  return {w.data(), w.data() + w.size()};
}

SwayTrajectory savitzky_golay(const SwayTrajectory& series, double window_sec, int order) {
  series.validate();
  const int window = savitzky_golay_window(window_sec, series.rate_hz);
  if (order >= window) throw Error(ErrorCode::InvalidInput, "polynomial order must be < window length");
  if (series.size() < static_cast<std::size_t>(window)) {
    throw Error(ErrorCode::InvalidInput, "series is shorter than the smoothing window");
  }
  const int half = window / 2;
  std::vector<std::vector<double>> weights(window);
  for (int p = 0; p < window; ++p) weights[p] = savitzky_golay_weights(window, order, p);

  SwayTrajectory out = series;
  const std::size_t n = series.size();
  std::size_t i = 0;
  while (i < n) {
    if (!series.valid[i]) {
      ++i;
      continue;
    }
    std::size_t end = i;
    while (end < n && series.valid[end]) ++end;
    const std::size_t len = end - i;
    if (len >= static_cast<std::size_t>(window)) {
      for (std::size_t k = i; k < end; ++k) {
        std::size_t start;
        int position;
        if (k < i + half) {
          start = i;
          position = static_cast<int>(k - i);
        } else if (k + half >= end) {
          start = end - window;
          position = static_cast<int>(k - start);
        } else {
          start = k - half;
          position = half;
        }
        Eigen::Vector3d acc = Eigen::Vector3d::Zero();
        const auto& w = weights[position];
        for (int j = 0; j < window; ++j) acc += w[j] * series.samples[start + j];
        out.samples[k] = acc;
      }
    }
    i = end;
  }
  return out;
}

SwayTrajectory resample_linear(const SwayTrajectory& series, double target_hz) {
  series.validate();
  if (series.samples.empty()) throw Error(ErrorCode::InvalidInput, "cannot resample an empty series");
  if (!(target_hz > 0.0)) throw Error(ErrorCode::InvalidInput, "target rate must be positive");
  if (series.valid_count() < 2) throw Error(ErrorCode::InvalidInput, "need at least two valid samples");

  SwayTrajectory out;
  out.segment = series.segment;
  out.rate_hz = target_hz;
  out.t0 = series.t0;
  const double span = static_cast<double>(series.size() - 1) / series.rate_hz;
  const auto count = static_cast<std::size_t>(std::floor(span * target_hz + 1e-9)) + 1;
  out.samples.resize(count);
  out.valid.resize(count);
  for (std::size_t k = 0; k < count; ++k) {
    // source index as an exact rational where possible
    const double pos = static_cast<double>(k) * series.rate_hz / target_hz;
    auto lo = static_cast<std::size_t>(std::floor(pos + 1e-9));
    if (lo >= series.size() - 1) lo = series.size() - 1;
    const double frac = std::max(0.0, pos - static_cast<double>(lo));
    if (frac <= 1e-9 || lo == series.size() - 1) {
      out.samples[k] = series.samples[lo];
      out.valid[k] = series.valid[lo];
    } else {
      const std::size_t hi = lo + 1;
      out.samples[k] = (1.0 - frac) * series.samples[lo] + frac * series.samples[hi];
      out.valid[k] = series.valid[lo] && series.valid[hi];
    }
    if (!out.valid[k]) out.samples[k].setConstant(std::numeric_limits<double>::quiet_NaN());
  }
  return out;
}

SwayTrajectory interpolate_gaps(const SwayTrajectory& series, double max_gap_sec, GapReport* report) {
  series.validate();
  GapReport local;
  SwayTrajectory out = series;
  const std::size_t n = series.size();
  std::size_t i = 0;
  while (i < n) {
    if (series.valid[i]) {
      ++i;
      continue;
    }
    std::size_t end = i;
    while (end < n && !series.valid[end]) ++end;
    const std::size_t len = end - i;
    const bool leading = i == 0;
    const bool trailing = end == n;
    local.leading_gap |= leading;
    local.trailing_gap |= trailing;
    const double duration = static_cast<double>(len) / series.rate_hz;
    if (leading || trailing || duration > max_gap_sec + 1e-12) {
      local.unfilled.emplace_back(i, end - 1);
    } else {
      const Eigen::Vector3d& a = series.samples[i - 1];
      const Eigen::Vector3d& b = series.samples[end];
      const double span = static_cast<double>(len + 1);
      for (std::size_t k = i; k < end; ++k) {
        const double f = static_cast<double>(k - (i - 1)) / span;
        out.samples[k] = (1.0 - f) * a + f * b;
        out.valid[k] = true;
      }
      local.filled_samples += len;
    }
    i = end;
  }
  if (report) *report = local;
  return out;
}

}  // namespace swaykin
