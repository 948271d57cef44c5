#include "swaykin/camera.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "swaykin/error.hpp"

namespace swaykin {

namespace {

constexpr double kMinDepth = 1e-9;
constexpr int kUndistortMaxIterations = 20;
constexpr double kUndistortTolerance = 1e-10;

}  // namespace

Eigen::Matrix3d CameraIntrinsics::K() const {
  Eigen::Matrix3d k;
  k << fx, s, x0, 0.0, fy, y0, 0.0, 0.0, 1.0;
  return k;
}

void CameraIntrinsics::validate() const {
  for (double v : {fx, fy, s, x0, y0, k1, k2}) {
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidInput, "intrinsics contain a non-finite value");
  }
  if (fx <= 0.0 || fy <= 0.0) throw Error(ErrorCode::InvalidInput, "focal lengths must be positive");
}

Eigen::Vector2d CameraIntrinsics::pixel_to_normalized(const PixelPoint& p) const {
  const double y = (p.y() - y0) / fy;
  const double x = (p.x() - x0 - s * y) / fx;
  return {x, y};
}

PixelPoint CameraIntrinsics::normalized_to_pixel(const Eigen::Vector2d& n) const {
  return {fx * n.x() + s * n.y() + x0, fy * n.y() + y0};
}

Eigen::Matrix4d RigidTransform::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation;
  m.topRightCorner<3, 1>() = translation;
  return m;
}

RigidTransform RigidTransform::inverse() const {
  RigidTransform inv;
  inv.rotation = rotation.transpose();
  inv.translation = -(inv.rotation * translation);
  return inv;
}

RigidTransform RigidTransform::compose(const RigidTransform& inner) const {
  RigidTransform out;
  out.rotation = rotation * inner.rotation;
  out.translation = rotation * inner.translation + translation;
  return out;
}

RigidTransform RigidTransform::from_matrix(const Eigen::Matrix4d& m) {
  RigidTransform t;
  t.rotation = m.topLeftCorner<3, 3>();
  t.translation = m.topRightCorner<3, 1>();
  return t;
}

bool RigidTransform::is_orthonormal(double tol) const {
  const Eigen::Matrix3d err = rotation * rotation.transpose() - Eigen::Matrix3d::Identity();
  return err.cwiseAbs().maxCoeff() <= tol && rotation.determinant() > 0.0;
}

PixelPoint project_camera_point(const CameraIntrinsics& intrinsics, const Eigen::Vector3d& pc,
                                Distortion distortion) {
  if (!(pc.z() > kMinDepth)) {
    throw Error(ErrorCode::BehindCamera, "point at or behind the camera plane (Z = " + std::to_string(pc.z()) + ")");
  }
  Eigen::Vector2d n(pc.x() / pc.z(), pc.y() / pc.z());
  if (distortion == Distortion::Apply) n = distort_normalized(intrinsics, n);
  return intrinsics.normalized_to_pixel(n);
}

PixelPoint project(const CameraIntrinsics& intrinsics, const RigidTransform& pose, const WorldPoint& p,
                   Distortion distortion) {
  return project_camera_point(intrinsics, pose.apply(p), distortion);
}

Eigen::Vector2d distort_normalized(const CameraIntrinsics& intrinsics, const Eigen::Vector2d& p_norm) {
  const double r2 = p_norm.squaredNorm();
  return p_norm * (1.0 + intrinsics.k1 * r2 + intrinsics.k2 * r2 * r2);
}

Eigen::Vector2d undistort_normalized(const CameraIntrinsics& intrinsics, const Eigen::Vector2d& p_distorted) {
  if (!intrinsics.has_distortion()) return p_distorted;
  Eigen::Vector2d x = p_distorted;
  for (int it = 0; it < kUndistortMaxIterations; ++it) {
    const double r2 = x.squaredNorm();
    const Eigen::Vector2d next = p_distorted / (1.0 + intrinsics.k1 * r2 + intrinsics.k2 * r2 * r2);
    const double change = (next - x).norm();
    x = next;
    if (!x.allFinite()) break;
    if (change < kUndistortTolerance) return x;
  }
  throw Error(ErrorCode::DistortionInversion, "radial distortion inversion did not converge");
}

PixelPoint undistort_point(const CameraIntrinsics& intrinsics, const PixelPoint& p) {
  if (!intrinsics.has_distortion()) return p;
  return intrinsics.normalized_to_pixel(undistort_normalized(intrinsics, intrinsics.pixel_to_normalized(p)));
}

GrayImage undistort_frame(const CameraIntrinsics& intrinsics, const GrayImage& image) {
  if (image.empty()) throw Error(ErrorCode::InvalidInput, "cannot undistort an empty image");
  if (!intrinsics.has_distortion()) return image;
  GrayImage out(image.width(), image.height(), 0.0);
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      const Eigen::Vector2d n = intrinsics.pixel_to_normalized(PixelPoint(x, y));
      const PixelPoint src = intrinsics.normalized_to_pixel(distort_normalized(intrinsics, n));
      out(x, y) = image.bilinear(src.x(), src.y(), 0.0);
    }
  }
  return out;
}

Eigen::Matrix3d nearest_rotation(const Eigen::Matrix3d& m) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  d(2, 2) = (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  return svd.matrixU() * d * svd.matrixV().transpose();
}

namespace {

// Isotropic normalization: centroid to the origin, mean distance sqrt(2).
Eigen::Matrix3d normalizing_transform(std::span<const Eigen::Vector2d> pts) {
  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
  for (const auto& p : pts) centroid += p;
  centroid /= static_cast<double>(pts.size());
  double mean_dist = 0.0;
  for (const auto& p : pts) mean_dist += (p - centroid).norm();
  mean_dist /= static_cast<double>(pts.size());
  const double scale = mean_dist > 0.0 ? std::sqrt(2.0) / mean_dist : 1.0;
  Eigen::Matrix3d t;
  t << scale, 0.0, -scale * centroid.x(), 0.0, scale, -scale * centroid.y(), 0.0, 0.0, 1.0;
  return t;
}

bool collinear(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c, double scale) {
  const Eigen::Vector2d ab = b - a;
  const Eigen::Vector2d ac = c - a;
  return std::abs(ab.x() * ac.y() - ab.y() * ac.x()) <= 1e-9 * scale * scale;
}

}  // namespace

Eigen::Matrix3d estimate_homography(std::span<const PlanarCorrespondence> pairs) {
  const std::size_t n = pairs.size();
  if (n < 4) throw Error(ErrorCode::InvalidInput, "homography needs at least 4 correspondences");

  std::vector<Eigen::Vector2d> world(n), pixel(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(pairs[i].world.z()) > 1e-9) {
      throw Error(ErrorCode::InvalidInput, "homography world points must lie on Z = 0");
    }
    world[i] = pairs[i].world.head<2>();
    pixel[i] = pairs[i].pixel;
    if (!world[i].allFinite() || !pixel[i].allFinite()) {
      throw Error(ErrorCode::InvalidInput, "non-finite correspondence");
    }
  }

  const Eigen::Matrix3d tw = normalizing_transform(world);
  const Eigen::Matrix3d tp = normalizing_transform(pixel);

  // Collinearity in the normalized world frame (where the spread is ~sqrt(2)).
  std::vector<Eigen::Vector2d> wn(n);
  for (std::size_t i = 0; i < n; ++i) wn[i] = (tw * world[i].homogeneous()).hnormalized();
  if (n == 4) {
    for (std::size_t a = 0; a < 4; ++a) {
      for (std::size_t b = a + 1; b < 4; ++b) {
        for (std::size_t c = b + 1; c < 4; ++c) {
          if (collinear(wn[a], wn[b], wn[c], 1.0)) {
            throw Error(ErrorCode::Degenerate, "three of four world points are collinear");
          }
        }
      }
    }
  }

  Eigen::MatrixXd a(2 * n, 9);
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector3d w = tw * world[i].homogeneous();
    const Eigen::Vector3d p = tp * pixel[i].homogeneous();
    const double u = p.x() / p.z();
    const double v = p.y() / p.z();
    const auto r = static_cast<Eigen::Index>(2 * i);
    a.row(r) << -w.x(), -w.y(), -w.z(), 0.0, 0.0, 0.0, u * w.x(), u * w.y(), u * w.z();
    a.row(r + 1) << 0.0, 0.0, 0.0, -w.x(), -w.y(), -w.z(), v * w.x(), v * w.y(), v * w.z();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  // A well-posed problem has a one-dimensional null space: the second
  // smallest singular value must stay clear of zero.
  if (sv[7] <= 1e-10 * sv[0]) {
    throw Error(ErrorCode::Degenerate, "homography system is rank deficient (collinear or repeated points)");
  }
  const Eigen::VectorXd h = svd.matrixV().col(8);
  Eigen::Matrix3d hn;
  hn << h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7], h[8];
  Eigen::Matrix3d hmat = tp.inverse() * hn * tw;
  if (std::abs(hmat(2, 2)) > 1e-12 * hmat.norm()) {
    hmat /= hmat(2, 2);
  } else {
    hmat /= hmat.norm();
  }
  return hmat;
}

RigidTransform estimate_planar_extrinsics(const CameraIntrinsics& intrinsics,
                                          std::span<const PlanarCorrespondence> pairs) {
  intrinsics.validate();
  std::vector<PlanarCorrespondence> ideal(pairs.begin(), pairs.end());
  if (intrinsics.has_distortion()) {
    for (auto& c : ideal) c.pixel = undistort_point(intrinsics, c.pixel);
  }
  const Eigen::Matrix3d h = estimate_homography(ideal);
  const Eigen::Matrix3d m = intrinsics.K().inverse() * h;
  const double n1 = m.col(0).norm();
  const double n2 = m.col(1).norm();
  if (n1 < 1e-15 || n2 < 1e-15) throw Error(ErrorCode::Degenerate, "degenerate homography");
  double lambda = 2.0 / (n1 + n2);
  // The target must sit in front of the camera.
  if (m(2, 2) * lambda < 0.0) lambda = -lambda;
  const Eigen::Vector3d r1 = lambda * m.col(0);
  const Eigen::Vector3d r2 = lambda * m.col(1);
  Eigen::Matrix3d r;
  r.col(0) = r1;
  r.col(1) = r2;
  r.col(2) = r1.cross(r2);
  RigidTransform pose;
  pose.rotation = nearest_rotation(r);
  pose.translation = lambda * m.col(2);
  return pose;
}

}  // namespace swaykin
