#pragma once

#include <filesystem>
#include <vector>

#include "swaykin/anatomy.hpp"
#include "swaykin/calibration.hpp"
#include "swaykin/camera.hpp"
#include "swaykin/features.hpp"
#include "swaykin/metrics.hpp"
#include "swaykin/pose.hpp"
#include "swaykin/target.hpp"

namespace swaykin::io {

namespace fs = std::filesystem;

// {fx, fy, s, x0, y0, k1, k2, rms_px}
void write_intrinsics(const fs::path& path, const CameraIntrinsics& k, double rms_px);
CameraIntrinsics read_intrinsics(const fs::path& path);

// {rows, cols, square_size_mm}
void write_board(const fs::path& path, const BoardGeometry& board);
BoardGeometry read_board(const fs::path& path);

// {name, points_mm: [[x, y, z], ...], virtual_offset_mm: [x, y, z]}
void write_target(const fs::path& path, const GeometricTargetModel& model);
GeometricTargetModel read_target(const fs::path& path);

// {matrix: 4x4 row-major, axis_convention}; {rotation, translation} is accepted on input.
void write_extrinsics(const fs::path& path, const RigidTransform& t);
RigidTransform read_extrinsics(const fs::path& path);

// frame,model_index,u,v,score
void write_features_csv(const fs::path& path, const std::vector<std::vector<FeatureObservation>>& frames);
/// Rows are grouped by frame index; `frame_count` pads trailing empty frames.
std::vector<std::vector<FeatureObservation>> read_features_csv(const fs::path& path, std::size_t frame_count = 0);

// frame,t_sec,status,theta1..theta6,rms_px,iters
void write_pose_csv(const fs::path& path, const PoseTrack& track);

// t_sec,segment,AP_mm,ML_mm,SI_mm,valid
void write_trajectory_csv(const fs::path& path, const std::vector<SwayTrajectory>& trajectories);
/// One trajectory per segment, in order of first appearance. The rate is
/// recovered from the sample spacing.
std::vector<SwayTrajectory> read_trajectory_csv(const fs::path& path);

// segment,direction,bin,tpl_mm
void write_tpl_csv(const fs::path& path, const std::vector<TplResult>& rows);

// {bias_mm, loa: [lo, hi], slope, intercept, r2, n}
void write_agreement(const fs::path& path, const AgreementReport& report);

}  // namespace swaykin::io
