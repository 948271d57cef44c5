#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "swaykin/camera.hpp"
#include "swaykin/image.hpp"
#include "swaykin/simd/convolve.hpp"

namespace swaykin {

/// Per-pixel corner likelihood, same shape as the source frame, >= 0.
struct LikelihoodMap {
  GrayImage response;

  int width() const noexcept { return response.width(); }
  int height() const noexcept { return response.height(); }
  double operator()(int x, int y) const { return response(x, y); }
  double max() const;
};

struct FeatureObservation {
  PixelPoint position = PixelPoint::Zero();
  double score = 0.0;
  std::optional<int> model_index;
};

inline constexpr int kCornerKernelSize = 11;
inline constexpr double kCornerKernelSigma = 2.0;

/// One saddle prototype: four Gaussian-weighted quadrant kernels. Kernels
/// a1/a2 cover one pair of opposite quadrants, b1/b2 the other pair.
struct CornerPrototype {
  double angle_rad = 0.0;
  std::array<std::vector<double>, 4> kernels;  // a1, a2, b1, b2; row-major 11x11, each sums to 1
};

/// Prototypes at 0 and 45 degrees.
const std::array<CornerPrototype, 2>& corner_prototypes();

/// Convolves every prototype kernel with the frame; the likelihood is the
/// maximum over prototypes and both polarities of the min-composed quadrant
/// contrasts. The border band (kernel radius) is 0. Throws InvalidInput for
/// frames smaller than the kernel.
LikelihoodMap corner_likelihood(const GrayImage& img, simd::SimdLevel level = simd::best_level());

/// Strict local maxima with score >= threshold, greedily suppressed so that no
/// two survivors are within `nms_radius` (Chebyshev). Sorted by descending
/// score, ties broken by scan order.
std::vector<FeatureObservation> detect_features(const LikelihoodMap& map, double threshold, int nms_radius);

/// Closed-form minimizer of sum_n (g_n . (n - q))^2 over the square
/// neighborhood of `coarse`, with 3x3 Sobel gradients g_n. Falls back to
/// `coarse` if the solution leaves the neighborhood. Throws NoGradient when
/// the structure tensor is singular (condition number >= 1e8) and
/// InvalidInput when the neighborhood leaves the image.
PixelPoint refine_subpixel(const GrayImage& img, const PixelPoint& coarse, int neighborhood_radius = 5);

/// The gradient-orthogonality objective refine_subpixel minimizes, evaluated
/// at `q` with the neighborhood anchored at `coarse`.
double gradient_orthogonality_cost(const GrayImage& img, const PixelPoint& coarse, const PixelPoint& q,
                                   int neighborhood_radius = 5);

/// One-to-one greedy nearest-neighbour assignment in ascending distance,
/// rejecting pairs farther than `gate`. The result carries model_index and is
/// ordered by it. Throws InsufficientCorrespondence below `min_matches`.
std::vector<FeatureObservation> match_features(std::span<const FeatureObservation> detections,
                                               std::span<const PixelPoint> predicted, double gate,
                                               std::size_t min_matches = 4);

struct DetectorOptions {
  double threshold_fraction = 0.5;  // of the map's global maximum
  int nms_radius = 8;
  int refine_radius = 5;
};

/// Likelihood, thresholded NMS and sub-pixel refinement in one call. Corners
/// whose refinement fails (flat gradient, neighborhood off-image) keep their
/// integer position.
std::vector<FeatureObservation> detect_corners(const GrayImage& img, const DetectorOptions& options = {},
                                               simd::SimdLevel level = simd::best_level());

}  // namespace swaykin
