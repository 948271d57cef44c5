#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>

#include "swaykin/calibration.hpp"
#include "swaykin/error.hpp"

namespace swaykin {

namespace {

// Grid indices (c, r) for each detection under homography grid -> image,
// or empty when the detections do not form the complete board.
std::vector<int> assign_grid(const std::vector<FeatureObservation>& dets, const Eigen::Matrix3d& grid_to_image,
                             const BoardGeometry& board) {
  const Eigen::Matrix3d image_to_grid = grid_to_image.inverse();
  std::vector<int> slot_of(dets.size(), -1);
  std::vector<bool> used(board.corner_count(), false);
  for (std::size_t i = 0; i < dets.size(); ++i) {
    const Eigen::Vector2d g = (image_to_grid * dets[i].position.homogeneous()).hnormalized();
    const double c = std::round(g.x());
    const double r = std::round(g.y());
    if (std::abs(g.x() - c) > 0.3 || std::abs(g.y() - r) > 0.3) return {};
    if (c < 0 || r < 0 || c >= board.cols || r >= board.rows) return {};
    const int slot = static_cast<int>(r) * board.cols + static_cast<int>(c);
    if (used[slot]) return {};
    used[slot] = true;
    slot_of[i] = slot;
  }
  return slot_of;
}

Eigen::Matrix3d grid_homography(const std::vector<FeatureObservation>& dets, const std::vector<int>& slots,
                                const BoardGeometry& board) {
  std::vector<PlanarCorrespondence> pairs;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    const int slot = slots[i];
    pairs.push_back({WorldPoint(slot % board.cols, slot / board.cols, 0.0), dets[i].position});
  }
  return estimate_homography(pairs);
}

}  // namespace

CalibrationView find_board_corners(const GrayImage& img, const BoardGeometry& board, const DetectorOptions& options) {
  board.validate();
  auto dets = detect_corners(img, options);
  const std::size_t n = board.corner_count();
  if (dets.size() < n) {
    throw Error(ErrorCode::InvalidInput, "found " + std::to_string(dets.size()) + " corners, board has " +
                                             std::to_string(n));
  }
  dets.resize(n);  // strongest n

  // Extreme detections: top-left, top-right, bottom-right, bottom-left.
  auto extreme = [&](auto key) {
    return std::min_element(dets.begin(), dets.end(),
                            [&](const auto& a, const auto& b) { return key(a.position) < key(b.position); })
        ->position;
  };
  const std::array<PixelPoint, 4> image_corners = {
      extreme([](const PixelPoint& p) { return p.x() + p.y(); }),
      extreme([](const PixelPoint& p) { return p.y() - p.x(); }),
      extreme([](const PixelPoint& p) { return -(p.x() + p.y()); }),
      extreme([](const PixelPoint& p) { return p.x() - p.y(); }),
  };
  const double cmax = board.cols - 1.0, rmax = board.rows - 1.0;
  const std::array<Eigen::Vector2d, 4> grid_corners = {Eigen::Vector2d(0, 0), Eigen::Vector2d(cmax, 0),
                                                       Eigen::Vector2d(cmax, rmax), Eigen::Vector2d(0, rmax)};

  // Try the four in-plane rotations of the board; prefer the one that puts
  // the origin at the top-left detection.
  for (int shift = 0; shift < 4; ++shift) {
    std::vector<PlanarCorrespondence> quad;
    for (int k = 0; k < 4; ++k) {
      const Eigen::Vector2d g = grid_corners[(k + shift) % 4];
      quad.push_back({WorldPoint(g.x(), g.y(), 0.0), image_corners[k]});
    }
    Eigen::Matrix3d h;
    try {
      h = estimate_homography(quad);
    } catch (const Error&) {
      continue;
    }
    auto slots = assign_grid(dets, h, board);
    if (slots.empty()) continue;
    // Re-estimate from every corner and confirm the assignment is stable.
    slots = assign_grid(dets, grid_homography(dets, slots, board), board);
    if (slots.empty()) continue;

    CalibrationView view(n);
    for (std::size_t i = 0; i < n; ++i) {
      const int slot = slots[i];
      view[slot] = {board.corner(slot / board.cols, slot % board.cols), dets[i].position};
    }
    return view;
  }
  throw Error(ErrorCode::InvalidInput, "detected corners do not form a " + std::to_string(board.rows) + "x" +
                                           std::to_string(board.cols) + " grid");
}

}  // namespace swaykin
