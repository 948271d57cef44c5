#include "swaykin/features.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <tuple>

#include "swaykin/error.hpp"

namespace swaykin {

namespace {

CornerPrototype make_prototype(double angle) {
  CornerPrototype proto;
  proto.angle_rad = angle;
  const int r = kCornerKernelSize / 2;
  const double a2 = angle + std::numbers::pi / 2.0;
  const Eigen::Vector2d n1(-std::sin(angle), std::cos(angle));
  const Eigen::Vector2d n2(-std::sin(a2), std::cos(a2));
  for (auto& k : proto.kernels) k.assign(kCornerKernelSize * kCornerKernelSize, 0.0);
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      const Eigen::Vector2d d(dx, dy);
      const double s1 = d.dot(n1);
      const double s2 = d.dot(n2);
      const double w = std::exp(-d.squaredNorm() / (2.0 * kCornerKernelSigma * kCornerKernelSigma));
      const int idx = (dy + r) * kCornerKernelSize + (dx + r);
      // Pixels straddling either edge line belong to no quadrant.
      if (s1 <= -0.1 && s2 <= -0.1) proto.kernels[0][idx] = w;
      else if (s1 >= 0.1 && s2 >= 0.1) proto.kernels[1][idx] = w;
      else if (s1 <= -0.1 && s2 >= 0.1) proto.kernels[2][idx] = w;
      else if (s1 >= 0.1 && s2 <= -0.1) proto.kernels[3][idx] = w;
    }
  }
  for (auto& k : proto.kernels) {
    double sum = 0.0;
    for (double v : k) sum += v;
    for (double& v : k) v /= sum;
  }
  return proto;
}

struct Sobel {
  double gx;
  double gy;
};

Sobel sobel_at(const GrayImage& img, int x, int y) {
  const double gx = (img(x + 1, y - 1) + 2.0 * img(x + 1, y) + img(x + 1, y + 1)) -
                    (img(x - 1, y - 1) + 2.0 * img(x - 1, y) + img(x - 1, y + 1));
  const double gy = (img(x - 1, y + 1) + 2.0 * img(x, y + 1) + img(x + 1, y + 1)) -
                    (img(x - 1, y - 1) + 2.0 * img(x, y - 1) + img(x + 1, y - 1));
  return {gx / 8.0, gy / 8.0};
}

struct Neighborhood {
  int cx;
  int cy;
  int radius;
};

Neighborhood checked_neighborhood(const GrayImage& img, const PixelPoint& coarse, int radius) {
  if (radius < 1) throw Error(ErrorCode::InvalidInput, "neighborhood radius must be >= 1");
  if (!coarse.allFinite()) throw Error(ErrorCode::InvalidInput, "coarse position is not finite");
  const int cx = static_cast<int>(std::lround(coarse.x()));
  const int cy = static_cast<int>(std::lround(coarse.y()));
  // Sobel needs one extra pixel around the neighborhood.
  if (cx - radius - 1 < 0 || cy - radius - 1 < 0 || cx + radius + 1 >= img.width() ||
      cy + radius + 1 >= img.height()) {
    throw Error(ErrorCode::InvalidInput, "refinement neighborhood leaves the image");
  }
  return {cx, cy, radius};
}

}  // namespace

double LikelihoodMap::max() const {
  const auto s = response.samples();
  return s.empty() ? 0.0 : *std::max_element(s.begin(), s.end());
}

const std::array<CornerPrototype, 2>& corner_prototypes() {
  static const std::array<CornerPrototype, 2> protos = {make_prototype(0.0), make_prototype(std::numbers::pi / 4.0)};
  return protos;
}

LikelihoodMap corner_likelihood(const GrayImage& img, simd::SimdLevel level) {
  if (img.width() < kCornerKernelSize || img.height() < kCornerKernelSize) {
    throw Error(ErrorCode::InvalidInput, "frame is smaller than the corner kernel");
  }
  const int w = img.width();
  const int h = img.height();
  const std::size_t n = static_cast<std::size_t>(w) * h;
  std::array<std::vector<double>, 4> resp;
  for (auto& r : resp) r.resize(n);
  std::vector<double> out(n, 0.0);

  for (const auto& proto : corner_prototypes()) {
    for (int k = 0; k < 4; ++k) {
      simd::correlate2d(img.samples(), w, h, proto.kernels[k], kCornerKernelSize, resp[k], level);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double a1 = resp[0][i], a2 = resp[1][i], b1 = resp[2][i], b2 = resp[3][i];
      const double mu = 0.25 * (a1 + a2 + b1 + b2);
      // a quadrants bright, b quadrants dark
      const double bright_a = std::min(std::min(a1 - mu, a2 - mu), std::min(mu - b1, mu - b2));
      // and the opposite polarity
      const double bright_b = std::min(std::min(mu - a1, mu - a2), std::min(b1 - mu, b2 - mu));
      out[i] = std::max(out[i], std::max(bright_a, bright_b));
    }
  }
  const int r = kCornerKernelSize / 2;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (x < r || y < r || x >= w - r || y >= h - r) out[static_cast<std::size_t>(y) * w + x] = 0.0;
    }
  }
  return LikelihoodMap{GrayImage(w, h, std::move(out))};
}

std::vector<FeatureObservation> detect_features(const LikelihoodMap& map, double threshold, int nms_radius) {
  if (!(threshold > 0.0)) throw Error(ErrorCode::InvalidInput, "detection threshold must be positive");
  if (nms_radius < 1) throw Error(ErrorCode::InvalidInput, "nms radius must be >= 1");
  const int w = map.width();
  const int h = map.height();

  struct Candidate {
    double score;
    int x;
    int y;
  };
  std::vector<Candidate> candidates;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double v = map(x, y);
      if (v < threshold) continue;
      // Local maximum over the 8-neighbourhood; on exact ties only the first
      // pixel in scan order survives.
      bool is_max = true;
      for (int dy = -1; dy <= 1 && is_max; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const int nx = x + dx, ny = y + dy;
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          const double nv = map(nx, ny);
          const bool earlier = dy < 0 || (dy == 0 && dx < 0);
          if (nv > v || (earlier && nv == v)) {
            is_max = false;
            break;
          }
        }
      }
      if (is_max) candidates.push_back({v, x, y});
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.score > b.score; });

  std::vector<unsigned char> taken(static_cast<std::size_t>(w) * h, 0);
  std::vector<FeatureObservation> out;
  for (const auto& c : candidates) {
    bool suppressed = false;
    for (int y = std::max(0, c.y - nms_radius); y <= std::min(h - 1, c.y + nms_radius) && !suppressed; ++y) {
      for (int x = std::max(0, c.x - nms_radius); x <= std::min(w - 1, c.x + nms_radius); ++x) {
        if (taken[static_cast<std::size_t>(y) * w + x]) {
          suppressed = true;
          break;
        }
      }
    }
    if (suppressed) continue;
    taken[static_cast<std::size_t>(c.y) * w + c.x] = 1;
    out.push_back({PixelPoint(c.x, c.y), c.score, std::nullopt});
  }
  return out;
}

PixelPoint refine_subpixel(const GrayImage& img, const PixelPoint& coarse, int neighborhood_radius) {
  const Neighborhood nb = checked_neighborhood(img, coarse, neighborhood_radius);
  Eigen::Matrix2d tensor = Eigen::Matrix2d::Zero();
  Eigen::Vector2d rhs = Eigen::Vector2d::Zero();
  for (int y = nb.cy - nb.radius; y <= nb.cy + nb.radius; ++y) {
    for (int x = nb.cx - nb.radius; x <= nb.cx + nb.radius; ++x) {
      const Sobel g = sobel_at(img, x, y);
      const Eigen::Vector2d gv(g.gx, g.gy);
      const Eigen::Matrix2d ggt = gv * gv.transpose();
      tensor += ggt;
      rhs += ggt * Eigen::Vector2d(x, y);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(tensor);
  const double lo = eig.eigenvalues()[0];
  const double hi = eig.eigenvalues()[1];
  if (!(hi > 0.0) || !(lo > 0.0) || hi / lo >= 1e8) {
    throw Error(ErrorCode::NoGradient, "structure tensor is singular around the candidate");
  }
  const PixelPoint p = tensor.ldlt().solve(rhs);
  if ((p - PixelPoint(nb.cx, nb.cy)).cwiseAbs().maxCoeff() > nb.radius) return coarse;
  return p;
}

double gradient_orthogonality_cost(const GrayImage& img, const PixelPoint& coarse, const PixelPoint& q,
                                   int neighborhood_radius) {
  const Neighborhood nb = checked_neighborhood(img, coarse, neighborhood_radius);
  double cost = 0.0;
  for (int y = nb.cy - nb.radius; y <= nb.cy + nb.radius; ++y) {
    for (int x = nb.cx - nb.radius; x <= nb.cx + nb.radius; ++x) {
      const Sobel g = sobel_at(img, x, y);
      const double e = g.gx * (x - q.x()) + g.gy * (y - q.y());
      cost += e * e;
    }
  }
  return cost;
}

std::vector<FeatureObservation> match_features(std::span<const FeatureObservation> detections,
                                               std::span<const PixelPoint> predicted, double gate,
                                               std::size_t min_matches) {
  struct Pair {
    double dist;
    std::size_t det;
    std::size_t pred;
  };
  std::vector<Pair> pairs;
  for (std::size_t i = 0; i < detections.size(); ++i) {
    for (std::size_t j = 0; j < predicted.size(); ++j) {
      const double d = (detections[i].position - predicted[j]).norm();
      if (d <= gate) pairs.push_back({d, i, j});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    return std::tie(a.dist, a.det, a.pred) < std::tie(b.dist, b.det, b.pred);
  });
  std::vector<bool> det_used(detections.size(), false);
  std::vector<bool> pred_used(predicted.size(), false);
  std::vector<FeatureObservation> out;
  for (const auto& p : pairs) {
    if (det_used[p.det] || pred_used[p.pred]) continue;
    det_used[p.det] = true;
    pred_used[p.pred] = true;
    FeatureObservation obs = detections[p.det];
    obs.model_index = static_cast<int>(p.pred);
    out.push_back(obs);
  }
  if (out.size() < min_matches) {
    throw Error(ErrorCode::InsufficientCorrespondence,
                "only " + std::to_string(out.size()) + " features matched (need " + std::to_string(min_matches) + ")");
  }
  std::sort(out.begin(), out.end(),
            [](const FeatureObservation& a, const FeatureObservation& b) { return *a.model_index < *b.model_index; });
  return out;
}

std::vector<FeatureObservation> detect_corners(const GrayImage& img, const DetectorOptions& options,
                                               simd::SimdLevel level) {
  const LikelihoodMap map = corner_likelihood(img, level);
  const double peak = map.max();
  if (!(peak > 0.0)) return {};
  auto detections = detect_features(map, options.threshold_fraction * peak, options.nms_radius);
  for (auto& d : detections) {
    try {
      d.position = refine_subpixel(img, d.position, options.refine_radius);
    } catch (const Error&) {
      // keep the integer maximum
    }
  }
  return detections;
}

}  // namespace swaykin
