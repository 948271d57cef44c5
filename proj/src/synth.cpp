#include "swaykin/synth.hpp"

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <cmath>
#include <numbers>
#include <random>

#include "swaykin/error.hpp"

namespace swaykin {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_component(const SinusoidComponent& c, const char* name) {
  if (!(c.amplitude >= 0.0) || !std::isfinite(c.amplitude) || !(c.frequency_hz >= 0.0) ||
      !std::isfinite(c.frequency_hz)) {
    throw Error(ErrorCode::InvalidInput, std::string("invalid sway component ") + name);
  }
}

// Blurred edge factor: +-1 far from the line, 0 on it.
double edge_factor(double signed_distance_px, double sigma) {
  if (sigma <= 0.0) return signed_distance_px > 0 ? 1.0 : (signed_distance_px < 0 ? -1.0 : 0.0);
  return std::erf(signed_distance_px / (sigma * std::numbers::sqrt2));
}

double taper(double rho, double radius) {
  const double inner = 0.6 * radius;
  if (rho <= inner) return 1.0;
  if (rho >= radius) return 0.0;
  const double c = std::cos(0.5 * std::numbers::pi * (rho - inner) / (radius - inner));
  return c * c;
}

void splat_target(GrayImage& img, const KinematicParams& theta, const GeometricTargetModel& model,
                  const CameraIntrinsics& intrinsics, const RenderOptions& options,
                  std::vector<std::string>* warnings) {
  const RigidTransform pose = to_rigid_transform(theta);
  const double amp = 0.5 * options.contrast;
  for (std::size_t j = 0; j < model.points.size(); ++j) {
    const WorldPoint& g = model.points[j];
    PixelPoint c;
    Eigen::Vector2d e1, e2;
    try {
      c = project(intrinsics, pose, g);
      e1 = (project(intrinsics, pose, g + Eigen::Vector3d::UnitX()) - c).normalized();
      e2 = (project(intrinsics, pose, g + Eigen::Vector3d::UnitY()) - c).normalized();
    } catch (const Error&) {
      if (warnings) warnings->push_back("feature " + std::to_string(j) + " of '" + model.name + "' is behind the camera");
      continue;
    }
    if (!img.contains(c.x(), c.y())) {
      if (warnings) warnings->push_back("feature " + std::to_string(j) + " of '" + model.name + "' is outside the frame");
      continue;
    }
    const double radius = options.patch_radius_px;
    const int x_lo = std::max(0, static_cast<int>(std::floor(c.x() - radius)));
    const int x_hi = std::min(img.width() - 1, static_cast<int>(std::ceil(c.x() + radius)));
    const int y_lo = std::max(0, static_cast<int>(std::floor(c.y() - radius)));
    const int y_hi = std::min(img.height() - 1, static_cast<int>(std::ceil(c.y() + radius)));
    for (int y = y_lo; y <= y_hi; ++y) {
      for (int x = x_lo; x <= x_hi; ++x) {
        const Eigen::Vector2d d(x - c.x(), y - c.y());
        const double w = taper(d.norm(), radius);
        if (w == 0.0) continue;
        const double d1 = e1.x() * d.y() - e1.y() * d.x();
        const double d2 = e2.x() * d.y() - e2.y() * d.x();
        img(x, y) += w * amp * edge_factor(d1, options.blur_sigma_px) * edge_factor(d2, options.blur_sigma_px);
      }
    }
  }
}

// Separable Gaussian blur with edge clamping.
GrayImage gaussian_blur(const GrayImage& img, double sigma) {
  if (sigma <= 0.0) return img;
  const int r = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(2 * r + 1);
  double sum = 0.0;
  for (int i = -r; i <= r; ++i) sum += k[i + r] = std::exp(-0.5 * i * i / (sigma * sigma));
  for (double& v : k) v /= sum;
  const int w = img.width(), h = img.height();
  GrayImage tmp(w, h), out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += k[i + r] * img(std::clamp(x + i, 0, w - 1), y);
      tmp(x, y) = acc;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += k[i + r] * tmp(x, std::clamp(y + i, 0, h - 1));
      out(x, y) = acc;
    }
  }
  return out;
}

}  // namespace

void SwayProfile::validate() const {
  check_component(ap, "ap");
  check_component(ml, "ml");
  check_component(si, "si");
  for (const auto& r : rotation) check_component(r, "rotation");
  if (!(rate_hz > 0.0) || !(duration_sec > 0.0)) {
    throw Error(ErrorCode::InvalidInput, "sway profile needs positive rate and duration");
  }
}

std::size_t SwayProfile::frame_count() const {
  return static_cast<std::size_t>(std::llround(duration_sec * rate_hz));
}

void NoiseSpec::validate() const {
  if (!(sigma_px >= 0.0) || !std::isfinite(sigma_px)) throw Error(ErrorCode::InvalidInput, "noise sigma must be >= 0");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw Error(ErrorCode::InvalidInput, "dropout must lie in [0, 1)");
}

std::vector<KinematicParams> generate_trajectory(const SwayProfile& profile, const KinematicParams& base) {
  profile.validate();
  std::mt19937_64 rng(profile.seed);
  std::uniform_real_distribution<double> phase_dist(0.0, kTwoPi);
  // component -> theta index: rotations 0..2, ML -> 3 (X), SI -> 4 (Y), AP -> 5 (Z)
  const std::array<std::pair<SinusoidComponent, int>, 6> comps = {{{profile.ap, 5},
                                                                    {profile.ml, 3},
                                                                    {profile.si, 4},
                                                                    {profile.rotation[0], 0},
                                                                    {profile.rotation[1], 1},
                                                                    {profile.rotation[2], 2}}};
  std::array<double, 6> phases{};
  for (double& p : phases) p = phase_dist(rng);

  const std::size_t n = profile.frame_count();
  std::vector<KinematicParams> out(n, base);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / profile.rate_hz;
    for (std::size_t c = 0; c < comps.size(); ++c) {
      const auto& [comp, idx] = comps[c];
      out[i][idx] += comp.amplitude * std::sin(kTwoPi * comp.frequency_hz * t + phases[c]);
    }
  }
  return out;
}

std::vector<std::vector<FeatureObservation>> render_observations(const std::vector<KinematicParams>& theta_seq,
                                                                 const GeometricTargetModel& model,
                                                                 const CameraIntrinsics& intrinsics,
                                                                 const NoiseSpec& noise) {
  noise.validate();
  intrinsics.validate();
  std::mt19937_64 rng(noise.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  std::vector<std::vector<FeatureObservation>> frames;
  frames.reserve(theta_seq.size());
  for (const auto& theta : theta_seq) {
    const RigidTransform pose = to_rigid_transform(theta);
    std::vector<FeatureObservation> obs;
    obs.reserve(model.points.size());
    for (std::size_t j = 0; j < model.points.size(); ++j) {
      const PixelPoint exact = project(intrinsics, pose, model.points[j]);
      // Draw every variate so the stream does not depend on the outcome.
      const double u = uniform(rng);
      const double nx = gauss(rng);
      const double ny = gauss(rng);
      if (u < noise.dropout) continue;
      obs.push_back({exact + noise.sigma_px * Eigen::Vector2d(nx, ny), 1.0, static_cast<int>(j)});
    }
    frames.push_back(std::move(obs));
  }
  return frames;
}

GrayImage render_frame(const KinematicParams& theta, const GeometricTargetModel& model,
                       const CameraIntrinsics& intrinsics, const RenderOptions& options,
                       std::vector<std::string>* warnings) {
  return render_scene({{theta, &model}}, intrinsics, options, warnings);
}

GrayImage render_scene(const std::vector<std::pair<KinematicParams, const GeometricTargetModel*>>& targets,
                       const CameraIntrinsics& intrinsics, const RenderOptions& options,
                       std::vector<std::string>* warnings) {
  intrinsics.validate();
  if (options.width <= 0 || options.height <= 0) throw Error(ErrorCode::InvalidInput, "image size must be positive");
  GrayImage img(options.width, options.height, options.background);
  for (const auto& [theta, model] : targets) splat_target(img, theta, *model, intrinsics, options, warnings);
  for (double& v : img.samples()) v = std::clamp(v, 0.0, 1.0);
  return img;
}

GrayImage render_checkerboard(const CameraIntrinsics& intrinsics, const RigidTransform& board_to_camera,
                              const BoardGeometry& board, const RenderOptions& options) {
  intrinsics.validate();
  board.validate();
  Eigen::Matrix3d h;
  h.col(0) = board_to_camera.rotation.col(0);
  h.col(1) = board_to_camera.rotation.col(1);
  h.col(2) = board_to_camera.translation;
  const Eigen::Matrix3d h_inv = h.inverse();
  const double sq = board.square_size_mm;
  const double x_min = -sq, x_max = board.cols * sq;
  const double y_min = -sq, y_max = board.rows * sq;
  const double white = options.background + 0.5 * options.contrast;
  const double black = options.background - 0.5 * options.contrast;

  // Region label of a sample: 0 background, 1 white margin, 2 + square index.
  const long cells = static_cast<long>(board.rows + 2) * static_cast<long>(board.cols + 2);
  auto label = [&](double px, double py) -> long {
    const PixelPoint ideal = undistort_point(intrinsics, PixelPoint(px, py));
    const Eigen::Vector3d ray = intrinsics.pixel_to_normalized(ideal).homogeneous();
    const Eigen::Vector3d b = h_inv * ray;
    if (b.z() <= 0.0) return 0;  // behind the board plane
    const double bx = b.x() / b.z(), by = b.y() / b.z();
    if (bx < x_min - sq || bx > x_max + sq || by < y_min - sq || by > y_max + sq) return 0;
    if (bx < x_min || bx >= x_max || by < y_min || by >= y_max) return 1;
    const long ix = static_cast<long>(std::floor(bx / sq));
    const long iy = static_cast<long>(std::floor(by / sq));
    return 2 + ((ix + iy) % 2 == 0 ? 0 : cells) + (iy + 1) * (board.cols + 2) + (ix + 1);
  };
  auto shade = [&](long l) {
    if (l == 0) return options.background;
    if (l == 1 || l >= 2 + cells) return white;
    return black;
  };

  // Pixels whose four corners share a region are uniform; only the rest
  // are supersampled.
  const int w = options.width, hgt = options.height;
  std::vector<long> corner(static_cast<std::size_t>(w + 1) * static_cast<std::size_t>(hgt + 1));
  for (int y = 0; y <= hgt; ++y) {
    for (int x = 0; x <= w; ++x) corner[static_cast<std::size_t>(y) * (w + 1) + x] = label(x - 0.5, y - 0.5);
  }
  constexpr int kSuper = 4;
  GrayImage img(w, hgt);
  for (int y = 0; y < hgt; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t c = static_cast<std::size_t>(y) * (w + 1) + x;
      const long l = corner[c];
      if (corner[c + 1] == l && corner[c + w + 1] == l && corner[c + w + 2] == l) {
        img(x, y) = shade(l);
        continue;
      }
      double acc = 0.0;
      for (int sy = 0; sy < kSuper; ++sy) {
        for (int sx = 0; sx < kSuper; ++sx) {
          acc += shade(label(x - 0.5 + (sx + 0.5) / kSuper, y - 0.5 + (sy + 0.5) / kSuper));
        }
      }
      img(x, y) = acc / (kSuper * kSuper);
    }
  }
  return gaussian_blur(img, options.blur_sigma_px);
}

std::vector<RigidTransform> calibration_poses(const BoardGeometry& board, int count, double depth_mm) {
  board.validate();
  if (count <= 0) throw Error(ErrorCode::InvalidInput, "pose count must be positive");
  // (tilt about X, tilt about Y, roll about Z) in degrees, lateral offset as a fraction of depth
  static const std::array<std::array<double, 5>, 8> table = {{{25.0, 0.0, 3.0, -0.06, -0.04},
                                                              {-25.0, 5.0, -4.0, 0.05, 0.03},
                                                              {5.0, 28.0, 6.0, 0.04, -0.05},
                                                              {-5.0, -28.0, -2.0, -0.05, 0.05},
                                                              {18.0, 18.0, 10.0, 0.0, 0.0},
                                                              {-18.0, 18.0, -8.0, 0.06, 0.04},
                                                              {18.0, -18.0, 5.0, -0.04, -0.06},
                                                              {-15.0, -15.0, -12.0, 0.03, -0.02}}};
  const Eigen::Vector3d center((board.cols - 1) * 0.5 * board.square_size_mm,
                               (board.rows - 1) * 0.5 * board.square_size_mm, 0.0);
  std::vector<RigidTransform> poses;
  for (int k = 0; k < count; ++k) {
    const auto& row = table[static_cast<std::size_t>(k) % table.size()];
    const double deg = std::numbers::pi / 180.0;
    RigidTransform t;
    t.rotation = (Eigen::AngleAxisd(row[2] * deg, Eigen::Vector3d::UnitZ()) *
                  Eigen::AngleAxisd(row[1] * deg, Eigen::Vector3d::UnitY()) *
                  Eigen::AngleAxisd(row[0] * deg, Eigen::Vector3d::UnitX()))
                     .toRotationMatrix();
    const double depth = depth_mm * (1.0 + 0.05 * static_cast<double>(k / static_cast<int>(table.size())));
    t.translation = Eigen::Vector3d(row[3] * depth, row[4] * depth, depth) - t.rotation * center;
    poses.push_back(t);
  }
  return poses;
}

}  // namespace swaykin
