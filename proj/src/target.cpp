#include "swaykin/target.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <sstream>

#include "swaykin/error.hpp"

namespace swaykin {

namespace {

constexpr double kSelfMapTolerance = 1e-6;

struct PrincipalFrame {
  Eigen::Vector3d centroid;
  Eigen::Matrix3d axes;  // columns sorted by descending spread
  Eigen::Vector3d spread;
};

PrincipalFrame principal_frame(const std::vector<WorldPoint>& pts) {
  PrincipalFrame f;
  f.centroid.setZero();
  for (const auto& p : pts) f.centroid += p;
  f.centroid /= static_cast<double>(pts.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& p : pts) cov += (p - f.centroid) * (p - f.centroid).transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
  // Eigen sorts ascending; flip to descending.
  for (int i = 0; i < 3; ++i) {
    f.axes.col(i) = eig.eigenvectors().col(2 - i);
    f.spread[i] = std::sqrt(std::max(0.0, eig.eigenvalues()[2 - i]));
  }
  if (f.axes.determinant() < 0.0) f.axes.col(2) = -f.axes.col(2);
  return f;
}

bool maps_onto_itself(const std::vector<WorldPoint>& pts, const Eigen::Vector3d& center,
                      const Eigen::Matrix3d& rotation) {
  for (const auto& p : pts) {
    const Eigen::Vector3d q = rotation * (p - center) + center;
    bool hit = false;
    for (const auto& o : pts) {
      if ((q - o).norm() <= kSelfMapTolerance) {
        hit = true;
        break;
      }
    }
    if (!hit) return false;
  }
  return true;
}

std::vector<Eigen::Matrix3d> cube_rotations() {
  std::vector<Eigen::Matrix3d> out;
  const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  for (const auto& perm : perms) {
    for (int signs = 0; signs < 8; ++signs) {
      Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
      for (int r = 0; r < 3; ++r) m(r, perm[r]) = (signs >> r) & 1 ? -1.0 : 1.0;
      if (m.determinant() > 0.0) out.push_back(m);
    }
  }
  return out;
}

std::string describe_axis_rotation(const char* axis, double deg) {
  std::ostringstream os;
  os << deg << " deg rotation about the " << axis;
  return os.str();
}

}  // namespace

void GeometricTargetModel::validate_shape() const {
  if (points.size() < 4) throw Error(ErrorCode::InvalidInput, "target model needs at least 4 points");
  for (const auto& p : points) {
    if (!p.allFinite()) throw Error(ErrorCode::InvalidInput, "target model has a non-finite point");
  }
  if (!virtual_offset.allFinite()) throw Error(ErrorCode::InvalidInput, "virtual offset is not finite");
  const PrincipalFrame f = principal_frame(points);
  if (f.spread[1] <= 1e-9 * std::max(1.0, f.spread[0])) {
    throw Error(ErrorCode::InvalidInput, "target model points are collinear");
  }
}

bool GeometricTargetModel::is_planar(double tol_mm) const {
  const PrincipalFrame f = principal_frame(points);
  const Eigen::Vector3d normal = f.axes.col(2);
  for (const auto& p : points) {
    if (std::abs(normal.dot(p - f.centroid)) > tol_mm) return false;
  }
  return true;
}

GeometricTargetModel grid_target(std::string name, int rows, int cols, double pitch_mm, bool drop_far_corner) {
  GeometricTargetModel model;
  model.name = std::move(name);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (drop_far_corner && r == rows - 1 && c == cols - 1) continue;
      model.points.emplace_back(c * pitch_mm, r * pitch_mm, 0.0);
    }
  }
  return model;
}

GeometricTargetModel shoulder_target() { return grid_target("shoulder"); }

GeometricTargetModel lumbar_target() {
  GeometricTargetModel model = grid_target("lumbar");
  model.virtual_offset = Eigen::Vector3d(0.0, 0.0, 100.0);
  return model;
}

void validate_asymmetry(const GeometricTargetModel& model, double grid_step_deg) {
  model.validate_shape();
  if (!(grid_step_deg > 0.0) || grid_step_deg > 180.0) {
    throw Error(ErrorCode::InvalidInput, "grid step must be in (0, 180] degrees");
  }
  const PrincipalFrame frame = principal_frame(model.points);
  const int steps = static_cast<int>(std::floor(360.0 / grid_step_deg + 1e-9));

  auto check_axis = [&](const Eigen::Vector3d& axis, const char* label) {
    std::vector<double> angles;
    for (int k = 1; k < steps; ++k) angles.push_back(k * grid_step_deg);
    for (double extra : {90.0, 180.0, 270.0}) angles.push_back(extra);
    for (double deg : angles) {
      if (deg >= 360.0 - 1e-9) continue;
      const Eigen::Matrix3d rot =
          Eigen::AngleAxisd(deg * std::numbers::pi / 180.0, axis.normalized()).toRotationMatrix();
      if (maps_onto_itself(model.points, frame.centroid, rot)) {
        throw Error(ErrorCode::AmbiguousTarget,
                    "model '" + model.name + "' maps onto itself under a " + describe_axis_rotation(label, deg));
      }
    }
  };

  if (model.is_planar()) {
    check_axis(frame.axes.col(2), "plane normal");
    return;
  }

  const auto cube = cube_rotations();
  for (std::size_t i = 0; i < cube.size(); ++i) {
    const Eigen::Matrix3d rot = frame.axes * cube[i] * frame.axes.transpose();
    if ((rot - Eigen::Matrix3d::Identity()).norm() < 1e-12) continue;
    if (maps_onto_itself(model.points, frame.centroid, rot)) {
      throw Error(ErrorCode::AmbiguousTarget,
                  "model '" + model.name + "' maps onto itself under cube symmetry #" + std::to_string(i));
    }
  }
  check_axis(frame.axes.col(0), "first principal axis");
  check_axis(frame.axes.col(1), "second principal axis");
  check_axis(frame.axes.col(2), "third principal axis");
}

WorldPoint virtual_point(const KinematicParams& params, const Eigen::Vector3d& delta) {
  return (motion_matrix(params) * delta.homogeneous()).head<3>();
}

std::vector<WorldPoint> transform_model(const GeometricTargetModel& model, const KinematicParams& params) {
  const Eigen::Matrix4d m = motion_matrix(params);
  std::vector<WorldPoint> out;
  out.reserve(model.points.size());
  for (const auto& p : model.points) out.push_back((m * p.homogeneous()).head<3>());
  return out;
}

}  // namespace swaykin
