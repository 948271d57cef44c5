#include "swaykin/calibration.hpp"

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <cmath>
#include <sstream>

#include "swaykin/error.hpp"

namespace swaykin {

void BoardGeometry::validate() const {
  if (rows < 2 || cols < 2) throw Error(ErrorCode::InvalidInput, "board needs at least 2x2 inner corners");
  if (!(square_size_mm > 0.0) || !std::isfinite(square_size_mm)) {
    throw Error(ErrorCode::InvalidInput, "square size must be positive");
  }
}

std::vector<WorldPoint> BoardGeometry::corners() const {
  std::vector<WorldPoint> out;
  out.reserve(corner_count());
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) out.push_back(corner(r, c));
  }
  return out;
}

namespace {

using Vector6 = Eigen::Matrix<double, 6, 1>;

Vector6 zhang_row(const Eigen::Matrix3d& h, int i, int j) {
  Vector6 v;
  v << h(0, i) * h(0, j), h(0, i) * h(1, j) + h(1, i) * h(0, j), h(1, i) * h(1, j),
      h(2, i) * h(0, j) + h(0, i) * h(2, j), h(2, i) * h(1, j) + h(1, i) * h(2, j), h(2, i) * h(2, j);
  return v;
}

std::string condition_message(double cond) {
  std::ostringstream os;
  os << "calibration views do not constrain the intrinsics (condition number " << cond << ")";
  return os.str();
}

}  // namespace

CameraIntrinsics closed_form_intrinsics(std::span<const Eigen::Matrix3d> homographies, double* condition_number,
                                        double max_condition_number) {
  if (homographies.size() < 3) {
    throw Error(ErrorCode::IllConditioned,
                "need at least 3 views, got " + std::to_string(homographies.size()));
  }
  // Condition the problem: map pixels to a unit-scale frame first, solve
  // there, and map the intrinsics back.
  double scale = 0.0;
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  for (const auto& h : homographies) {
    const Eigen::Vector2d c = h.col(2).hnormalized();
    center += c;
  }
  center /= static_cast<double>(homographies.size());
  for (const auto& h : homographies) scale += (h.col(2).hnormalized() - center).norm();
  scale = std::max(scale / static_cast<double>(homographies.size()), 1.0);

  Eigen::Matrix3d norm;
  norm << 1.0 / scale, 0.0, -center.x() / scale, 0.0, 1.0 / scale, -center.y() / scale, 0.0, 0.0, 1.0;

  Eigen::MatrixXd v(2 * static_cast<Eigen::Index>(homographies.size()), 6);
  for (std::size_t k = 0; k < homographies.size(); ++k) {
    Eigen::Matrix3d h = norm * homographies[k];
    h /= h.norm();
    Vector6 a = zhang_row(h, 0, 1);
    Vector6 b = zhang_row(h, 0, 0) - zhang_row(h, 1, 1);
    v.row(2 * static_cast<Eigen::Index>(k)) = a.transpose() / std::max(a.norm(), 1e-300);
    v.row(2 * static_cast<Eigen::Index>(k) + 1) = b.transpose() / std::max(b.norm(), 1e-300);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(v, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double cond = sv[4] > 0.0 ? sv[0] / sv[4] : std::numeric_limits<double>::infinity();
  if (condition_number) *condition_number = cond;
  if (!(cond <= max_condition_number)) throw Error(ErrorCode::IllConditioned, condition_message(cond));

  Vector6 bvec = svd.matrixV().col(5);
  if (bvec[0] < 0.0) bvec = -bvec;
  const double b11 = bvec[0], b12 = bvec[1], b22 = bvec[2], b13 = bvec[3], b23 = bvec[4], b33 = bvec[5];
  const double den = b11 * b22 - b12 * b12;
  if (!(b11 > 0.0) || !(den > 0.0)) throw Error(ErrorCode::IllConditioned, condition_message(cond));
  const double v0 = (b12 * b13 - b11 * b23) / den;
  const double lambda = b33 - (b13 * b13 + v0 * (b12 * b13 - b11 * b23)) / b11;
  if (!(lambda / b11 > 0.0)) throw Error(ErrorCode::IllConditioned, condition_message(cond));
  const double alpha = std::sqrt(lambda / b11);
  const double beta = std::sqrt(lambda * b11 / den);
  const double gamma = -b12 * alpha * alpha * beta / lambda;
  const double u0 = gamma * v0 / beta - b13 * alpha * alpha / lambda;

  Eigen::Matrix3d kn;
  kn << alpha, gamma, u0, 0.0, beta, v0, 0.0, 0.0, 1.0;
  const Eigen::Matrix3d k = norm.inverse() * kn;
  CameraIntrinsics out;
  out.fx = k(0, 0) / k(2, 2);
  out.s = k(0, 1) / k(2, 2);
  out.x0 = k(0, 2) / k(2, 2);
  out.fy = k(1, 1) / k(2, 2);
  out.y0 = k(1, 2) / k(2, 2);
  out.validate();
  return out;
}

namespace {

constexpr int kIntrinsicParams = 7;  // fx, fy, s, x0, y0, k1, k2

CameraIntrinsics unpack_intrinsics(const Eigen::VectorXd& x) {
  CameraIntrinsics k;
  k.fx = x[0];
  k.fy = x[1];
  k.s = x[2];
  k.x0 = x[3];
  k.y0 = x[4];
  k.k1 = x[5];
  k.k2 = x[6];
  return k;
}

RigidTransform unpack_view(const Eigen::VectorXd& x, std::size_t view) {
  const Eigen::Index base = kIntrinsicParams + 6 * static_cast<Eigen::Index>(view);
  const Eigen::Vector3d rvec = x.segment<3>(base);
  RigidTransform t;
  const double angle = rvec.norm();
  t.rotation = angle > 0.0 ? Eigen::AngleAxisd(angle, rvec / angle).toRotationMatrix()
                           : Eigen::Matrix3d::Identity().eval();
  t.translation = x.segment<3>(base + 3);
  return t;
}

}  // namespace

CalibrationResult calibrate(std::span<const CalibrationView> views, const CalibrationOptions& options) {
  if (views.size() < 3) {
    throw Error(ErrorCode::IllConditioned, "need at least 3 calibration views, got " + std::to_string(views.size()));
  }
  std::size_t total = 0;
  std::vector<Eigen::Matrix3d> homographies;
  for (const auto& view : views) {
    if (view.size() < 4) throw Error(ErrorCode::InvalidInput, "each view needs at least 4 corners");
    total += view.size();
    try {
      homographies.push_back(estimate_homography(view));
    } catch (const Error& e) {
      throw Error(ErrorCode::IllConditioned, std::string("view homography failed: ") + e.what());
    }
  }

  CalibrationResult result;
  CameraIntrinsics init = closed_form_intrinsics(homographies, &result.closed_form_condition_number,
                                                 options.max_condition_number);

  Eigen::VectorXd x0(kIntrinsicParams + 6 * static_cast<Eigen::Index>(views.size()));
  x0.head<kIntrinsicParams>() << init.fx, init.fy, init.s, init.x0, init.y0, 0.0, 0.0;
  for (std::size_t v = 0; v < views.size(); ++v) {
    const RigidTransform pose = estimate_planar_extrinsics(init, views[v]);
    const Eigen::AngleAxisd aa(pose.rotation);
    const Eigen::Index base = kIntrinsicParams + 6 * static_cast<Eigen::Index>(v);
    x0.segment<3>(base) = aa.angle() * aa.axis();
    x0.segment<3>(base + 3) = pose.translation;
  }

  const ResidualFunction f = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    const CameraIntrinsics k = unpack_intrinsics(x);
    Eigen::VectorXd r(2 * static_cast<Eigen::Index>(total));
    Eigen::Index row = 0;
    for (std::size_t v = 0; v < views.size(); ++v) {
      const RigidTransform pose = unpack_view(x, v);
      for (const auto& c : views[v]) {
        const Eigen::Vector3d pc = pose.apply(c.world);
        if (!(pc.z() > 1e-9)) {
          r.setConstant(std::numeric_limits<double>::infinity());
          return r;
        }
        r.segment<2>(row) = project_camera_point(k, pc, Distortion::Apply) - c.pixel;
        row += 2;
      }
    }
    return r;
  };

  Eigen::VectorXd steps(x0.size());
  steps.head<kIntrinsicParams>() << 1e-3, 1e-3, 1e-3, 1e-3, 1e-3, 1e-6, 1e-6;
  for (std::size_t v = 0; v < views.size(); ++v) {
    const Eigen::Index base = kIntrinsicParams + 6 * static_cast<Eigen::Index>(v);
    steps.segment<3>(base).setConstant(1e-7);
    steps.segment<3>(base + 3).setConstant(1e-5);
  }

  const LmResult lm = levenberg_marquardt(f, x0, steps, options.lm);
  result.intrinsics = unpack_intrinsics(lm.params);
  result.intrinsics.validate();
  for (std::size_t v = 0; v < views.size(); ++v) result.extrinsics.push_back(unpack_view(lm.params, v));
  result.rms_px = std::sqrt(lm.sum_squares / static_cast<double>(total));
  result.iterations = lm.iterations;
  result.converged = lm.converged;
  return result;
}

}  // namespace swaykin
