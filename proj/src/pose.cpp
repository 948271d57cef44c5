#include "swaykin/pose.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>

#include "swaykin/error.hpp"

namespace swaykin {

Eigen::VectorXd reprojection_residuals(const KinematicParams& theta, const GeometricTargetModel& model,
                                       std::span<const FeatureObservation> obs, const CameraIntrinsics& intrinsics) {
  const Eigen::Matrix4d m = motion_matrix(theta);
  Eigen::VectorXd r(2 * static_cast<Eigen::Index>(obs.size()));
  for (std::size_t i = 0; i < obs.size(); ++i) {
    if (!obs[i].model_index) throw Error(ErrorCode::InvalidInput, "observation without model correspondence");
    const int idx = *obs[i].model_index;
    if (idx < 0 || static_cast<std::size_t>(idx) >= model.points.size()) {
      throw Error(ErrorCode::InvalidInput, "model index " + std::to_string(idx) + " out of range");
    }
    const Eigen::Vector3d pc = (m * model.points[idx].homogeneous()).head<3>();
    if (!(pc.z() > 1e-9)) {
      throw Error(ErrorCode::BehindCamera, "feature " + std::to_string(idx) + " of '" + model.name +
                                               "' is behind the camera");
    }
    const PixelPoint pred = project_camera_point(intrinsics, pc, Distortion::Ignore);
    r.segment<2>(2 * static_cast<Eigen::Index>(i)) = pred - obs[i].position;
  }
  return r;
}

FitReport fit_pose(const KinematicParams& init, const GeometricTargetModel& model,
                   std::span<const FeatureObservation> obs, const CameraIntrinsics& intrinsics,
                   const FitConfig& config) {
  if (obs.size() < std::max<std::size_t>(4, config.min_correspondences)) {
    throw Error(ErrorCode::InsufficientCorrespondence,
                std::to_string(obs.size()) + " observations, need at least " +
                    std::to_string(std::max<std::size_t>(4, config.min_correspondences)));
  }
  if (!init.theta.allFinite()) throw Error(ErrorCode::NonFinite, "initial parameters are not finite");

  // Residuals are evaluated in parameter space; points that wander behind
  // the camera during a trial step make the objective infinite, which LM
  // treats as a rejected step.
  const ResidualFunction f = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    try {
      return reprojection_residuals(KinematicParams(Vector6d(x)), model, obs, intrinsics);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::BehindCamera) throw;
      return Eigen::VectorXd::Constant(2 * static_cast<Eigen::Index>(obs.size()),
                                       std::numeric_limits<double>::infinity());
    }
  };
  // The starting point itself must be valid.
  reprojection_residuals(init, model, obs, intrinsics);

  Eigen::VectorXd steps(6);
  steps << config.angle_step_rad, config.angle_step_rad, config.angle_step_rad, config.translation_step_mm,
      config.translation_step_mm, config.translation_step_mm;

  const LmResult lm = levenberg_marquardt(f, init.theta, steps, config.lm);
  FitReport report;
  report.theta = KinematicParams(Vector6d(lm.params));
  report.rms_residual_px = std::sqrt(lm.sum_squares / static_cast<double>(obs.size()));
  report.iterations = lm.iterations;
  report.converged = lm.converged;
  report.degenerate_geometry = lm.jacobian_rank < 6;
  report.covariance_diagonal = lm.covariance_diagonal;
  report.objective_history = lm.accepted_costs;
  return report;
}

namespace {

// Orthonormal frame of a planar model: origin at the first point, e1 along
// the in-plane principal direction, e3 the plane normal oriented like the
// model's +Z when the model lies in Z = 0.
RigidTransform plane_frame(const GeometricTargetModel& model) {
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const auto& p : model.points) centroid += p;
  centroid /= static_cast<double>(model.points.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& p : model.points) cov += (p - centroid) * (p - centroid).transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
  Eigen::Vector3d normal = eig.eigenvectors().col(0);
  if (normal.z() < 0.0 || (normal.z() == 0.0 && normal.sum() < 0.0)) normal = -normal;

  RigidTransform frame;  // plane -> model
  if ((normal - Eigen::Vector3d::UnitZ()).norm() < 1e-12) {
    frame.rotation.setIdentity();
  } else {
    Eigen::Vector3d e1 = eig.eigenvectors().col(2);
    e1 = (e1 - e1.dot(normal) * normal).normalized();
    frame.rotation.col(0) = e1;
    frame.rotation.col(1) = normal.cross(e1);
    frame.rotation.col(2) = normal;
  }
  const Eigen::Vector3d& p0 = model.points.front();
  frame.translation = p0 - normal * normal.dot(p0 - centroid);
  return frame;
}

}  // namespace

KinematicParams initialize_first_frame(const GeometricTargetModel& model, std::span<const FeatureObservation> obs,
                                       const CameraIntrinsics& intrinsics, const FitConfig& config) {
  if (obs.size() < 4) throw Error(ErrorCode::InsufficientCorrespondence, "need at least 4 observations");
  if (!model.is_planar()) {
    const KinematicParams prior(0.0, 0.0, 0.0, 0.0, 0.0, config.nominal_depth_mm);
    return fit_pose(prior, model, obs, intrinsics, config).theta;
  }
  const RigidTransform plane_to_model = plane_frame(model);
  const RigidTransform model_to_plane = plane_to_model.inverse();
  std::vector<PlanarCorrespondence> pairs;
  pairs.reserve(obs.size());
  for (const auto& o : obs) {
    if (!o.model_index) throw Error(ErrorCode::InvalidInput, "observation without model correspondence");
    Eigen::Vector3d q = model_to_plane.apply(model.points.at(*o.model_index));
    q.z() = 0.0;
    pairs.push_back({q, o.position});
  }
  // Pixels are assumed undistorted; use the pinhole part only.
  CameraIntrinsics pinhole = intrinsics;
  pinhole.k1 = pinhole.k2 = 0.0;
  const RigidTransform plane_to_camera = estimate_planar_extrinsics(pinhole, pairs);
  return from_rigid_transform(plane_to_camera.compose(model_to_plane));
}

std::size_t PoseTrack::fitted_count() const {
  std::size_t n = 0;
  for (auto s : status) n += s == FrameStatus::Fitted;
  return n;
}

PoseTrack track_sequence(std::span<const std::vector<FeatureObservation>> frames, const GeometricTargetModel& model,
                         const CameraIntrinsics& intrinsics, double rate_hz, const TrackConfig& config) {
  if (!(rate_hz > 0.0)) throw Error(ErrorCode::InvalidInput, "sample rate must be positive");
  PoseTrack track;
  track.rate_hz = rate_hz;
  track.reports.reserve(frames.size());
  track.status.reserve(frames.size());

  std::mt19937_64 rng(config.random_seed);
  std::uniform_real_distribution<double> angle(-0.5, 0.5);
  std::uniform_real_distribution<double> lateral(-200.0, 200.0);
  std::uniform_real_distribution<double> depth(0.5 * config.fit.nominal_depth_mm, 1.5 * config.fit.nominal_depth_mm);

  std::optional<KinematicParams> last;
  const std::size_t min_obs = std::max<std::size_t>(4, config.fit.min_correspondences);
  for (const auto& obs : frames) {
    FitReport report;
    bool fitted = false;
    if (obs.size() >= min_obs) {
      try {
        if (config.init_policy == InitPolicy::RandomPerFrame) {
          const int restarts = std::max(1, config.random_restarts);
          std::optional<FitReport> best;
          for (int k = 0; k < restarts; ++k) {
            const KinematicParams init(angle(rng), angle(rng), angle(rng), lateral(rng), lateral(rng), depth(rng));
            try {
              FitReport r = fit_pose(init, model, obs, intrinsics, config.fit);
              if (r.theta.theta.allFinite() && (!best || r.rms_residual_px < best->rms_residual_px)) best = std::move(r);
            } catch (const Error& e) {
              if (e.code() == ErrorCode::InvalidInput) throw;
            }
          }
          if (best) {
            report = std::move(*best);
            fitted = true;
          }
        } else {
          const KinematicParams init = last ? *last : initialize_first_frame(model, obs, intrinsics, config.fit);
          report = fit_pose(init, model, obs, intrinsics, config.fit);
          fitted = report.theta.theta.allFinite();
        }
      } catch (const Error& e) {
        if (e.code() == ErrorCode::InvalidInput) throw;
        fitted = false;
      }
    }
    if (fitted) {
      last = report.theta;
      track.status.push_back(FrameStatus::Fitted);
    } else {
      report = FitReport{};
      report.theta = last.value_or(KinematicParams{});
      report.rms_residual_px = std::numeric_limits<double>::quiet_NaN();
      track.status.push_back(FrameStatus::Gap);
    }
    track.reports.push_back(std::move(report));
  }
  if (!last) throw Error(ErrorCode::InsufficientCorrespondence, "no frame could be fitted");
  return track;
}

}  // namespace swaykin
