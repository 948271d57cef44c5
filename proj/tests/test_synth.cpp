#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "swaykin/error.hpp"
#include "swaykin/features.hpp"
#include "swaykin/kinematics.hpp"
#include "swaykin/synth.hpp"
#include "swaykin/target.hpp"
#include "test_support.hpp"

using namespace swaykin;

namespace {

const KinematicParams kBase(0.0, 0.0, 0.0, -30.0, -30.0, 1000.0);

SwayProfile zero_profile() {
  SwayProfile p;
  p.ap = p.ml = p.si = {0.0, 0.3};
  for (auto& r : p.rotation) r = {0.0, 0.2};
  p.duration_sec = 5.0;
  return p;
}

std::vector<PixelPoint> projections(const KinematicParams& theta, const GeometricTargetModel& model,
                                    const CameraIntrinsics& k) {
  std::vector<PixelPoint> out;
  for (const auto& p : model.points) out.push_back(project(k, to_rigid_transform(theta), p));
  return out;
}

}  // namespace

TEST(Trajectory, ZeroAmplitudeIsConstant) {
  const auto seq = generate_trajectory(zero_profile(), kBase);
  ASSERT_EQ(seq.size(), 150u);
  for (const auto& t : seq) EXPECT_EQ(t.theta, kBase.theta);
}

TEST(Trajectory, ApRangeMatchesAmplitude) {
  SwayProfile p = zero_profile();
  p.ap = {10.0, 0.3};
  p.duration_sec = 60.0;
  const auto seq = generate_trajectory(p, kBase);
  double lo = 1e9, hi = -1e9;
  for (const auto& t : seq) {
    lo = std::min(lo, t[5]);
    hi = std::max(hi, t[5]);
    EXPECT_EQ(t[3], kBase[3]);
  }
  EXPECT_GE(lo, 990.0 - 1e-9);
  EXPECT_LE(hi, 1010.0 + 1e-9);
  EXPECT_NEAR(lo, 990.0, 0.05);
  EXPECT_NEAR(hi, 1010.0, 0.05);
}

TEST(Trajectory, DeterministicPerSeed) {
  SwayProfile p;
  p.duration_sec = 10.0;
  const auto a = generate_trajectory(p, kBase);
  const auto b = generate_trajectory(p, kBase);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].theta, b[i].theta);
  p.seed = 99;
  const auto c = generate_trajectory(p, kBase);
  EXPECT_NE(a[5].theta, c[5].theta);
}

TEST(Trajectory, ProfileValidation) {
  SwayProfile p;
  p.rate_hz = 0.0;
  EXPECT_THROW(p.validate(), Error);
  SwayProfile q;
  q.duration_sec = -1.0;
  EXPECT_THROW(q.validate(), Error);
  NoiseSpec n;
  n.dropout = 1.0;
  EXPECT_THROW(n.validate(), Error);
  n.dropout = 0.0;
  n.sigma_px = -0.1;
  EXPECT_THROW(n.validate(), Error);
}

TEST(Observations, NoiselessEqualProjections) {
  const auto model = shoulder_target();
  const auto k = fixtures::default_camera();
  SwayProfile p;
  p.duration_sec = 2.0;
  const auto seq = generate_trajectory(p, kBase);
  const auto frames = render_observations(seq, model, k, NoiseSpec{});
  for (std::size_t f = 0; f < seq.size(); ++f) {
    const auto expect = projections(seq[f], model, k);
    ASSERT_EQ(frames[f].size(), model.size());
    for (const auto& o : frames[f]) EXPECT_EQ(o.position, expect[*o.model_index]);
  }
}

TEST(Observations, NoiseStandardDeviation) {
  const auto model = shoulder_target();
  const auto k = fixtures::default_camera();
  const std::vector<KinematicParams> seq(700, kBase);
  NoiseSpec noise;
  noise.sigma_px = 0.5;
  const auto frames = render_observations(seq, model, k, noise);
  const auto expect = projections(kBase, model, k);
  double sx = 0.0, sy = 0.0, mx = 0.0;
  std::size_t n = 0;
  for (const auto& f : frames) {
    for (const auto& o : f) {
      const PixelPoint d = o.position - expect[*o.model_index];
      sx += d.x() * d.x();
      sy += d.y() * d.y();
      mx += d.x();
      ++n;
    }
  }
  ASSERT_GE(n, 10000u);
  EXPECT_NEAR(std::sqrt(sx / n), 0.5, 0.025);
  EXPECT_NEAR(std::sqrt(sy / n), 0.5, 0.025);
  EXPECT_LT(std::abs(mx / n), 0.02);
}

TEST(Observations, DropoutBinomialCounts) {
  const auto model = shoulder_target();
  const auto k = fixtures::default_camera();
  const std::vector<KinematicParams> seq(1000, kBase);
  for (double p : {0.01, 0.3, 0.999}) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      NoiseSpec noise;
      noise.dropout = p;
      noise.seed = seed;
      const auto frames = render_observations(seq, model, k, noise);
      double kept = 0.0;
      for (const auto& f : frames) kept += static_cast<double>(f.size());
      const double trials = 1000.0 * static_cast<double>(model.size());
      const double expect = trials * (1.0 - p);
      const double sd = std::sqrt(trials * p * (1.0 - p));
      EXPECT_NEAR(kept, expect, 4.0 * sd + 1.0) << p;
    }
  }
}

TEST(Observations, SeededAndBehindCameraRejected) {
  const auto model = shoulder_target();
  const auto k = fixtures::default_camera();
  const std::vector<KinematicParams> seq(10, kBase);
  NoiseSpec noise;
  noise.sigma_px = 0.2;
  noise.dropout = 0.1;
  const auto a = render_observations(seq, model, k, noise);
  const auto b = render_observations(seq, model, k, noise);
  for (std::size_t f = 0; f < a.size(); ++f) {
    ASSERT_EQ(a[f].size(), b[f].size());
    for (std::size_t i = 0; i < a[f].size(); ++i) EXPECT_EQ(a[f][i].position, b[f][i].position);
  }
  const std::vector<KinematicParams> behind(1, KinematicParams(0, 0, 0, 0, 0, -500));
  EXPECT_THROW(render_observations(behind, model, k, NoiseSpec{}), Error);
}

TEST(Render, EmptyModelIsUniform) {
  GeometricTargetModel empty;
  RenderOptions opt;
  opt.width = 64;
  opt.height = 48;
  const GrayImage img = render_frame(kBase, empty, fixtures::default_camera(), opt);
  ASSERT_EQ(img.width(), 64);
  for (double v : img.samples()) EXPECT_EQ(v, opt.background);
}

TEST(Render, OutOfBoundsFeatureSkippedWithWarning) {
  const auto model = shoulder_target();
  std::vector<std::string> warnings;
  const KinematicParams far_left(0, 0, 0, -400, 0, 1000);
  render_frame(far_left, model, fixtures::default_camera(), {}, &warnings);
  EXPECT_FALSE(warnings.empty());
}

TEST(Render, DetectorRecoversFeatures) {
  const auto model = shoulder_target();
  const auto k = fixtures::default_camera();
  const KinematicParams theta(0.03, -0.05, 0.04, -20.0, 10.0, 1000.0);
  const GrayImage img = render_frame(theta, model, k);
  const auto truth = projections(theta, model, k);
  const auto found = detect_corners(img);
  std::size_t hit = 0;
  for (const auto& t : truth) {
    for (const auto& d : found) {
      if ((d.position - t).norm() < 0.5) {
        ++hit;
        break;
      }
    }
  }
  EXPECT_GE(static_cast<double>(hit), 0.95 * static_cast<double>(truth.size()));
}

TEST(Render, PatchSizeDoesNotMoveCenters) {
  const auto model = shoulder_target();
  const auto k = fixtures::default_camera();
  const KinematicParams theta(0.02, 0.03, -0.02, 5.0, -15.0, 1000.0);
  RenderOptions big;
  big.patch_radius_px = 24.0;
  const auto small_hits = detect_corners(render_frame(theta, model, k));
  const auto big_hits = detect_corners(render_frame(theta, model, k, big));
  const auto truth = projections(theta, model, k);
  for (const auto& t : truth) {
    const FeatureObservation* a = nullptr;
    const FeatureObservation* b = nullptr;
    for (const auto& d : small_hits)
      if ((d.position - t).norm() < 1.0) a = &d;
    for (const auto& d : big_hits)
      if ((d.position - t).norm() < 1.0) b = &d;
    ASSERT_TRUE(a && b);
    EXPECT_LT((a->position - b->position).norm(), 0.1);
  }
}

TEST(Render, SaddleCentroidMatchesProjection) {
  GeometricTargetModel single;
  single.name = "one";
  single.points = {WorldPoint(0, 0, 0)};
  const auto k = fixtures::default_camera();
  std::mt19937_64 rng(30);
  std::uniform_real_distribution<double> u(-100.0, 100.0);
  RenderOptions opt;
  opt.width = opt.height = 2048;
  for (int trial = 0; trial < 20; ++trial) {
    const KinematicParams theta(0, 0, 0, u(rng), u(rng), 1000.0);
    const PixelPoint c = project(k, to_rigid_transform(theta), single.points[0]);
    const GrayImage img = render_frame(theta, single, k, opt);
    double w = 0.0;
    PixelPoint m = PixelPoint::Zero();
    const int r = static_cast<int>(opt.patch_radius_px) + 3;
    for (int y = static_cast<int>(c.y()) - r; y <= static_cast<int>(c.y()) + r; ++y) {
      for (int x = static_cast<int>(c.x()) - r; x <= static_cast<int>(c.x()) + r; ++x) {
        const double a = std::abs(img(x, y) - opt.background);
        w += a;
        m += a * PixelPoint(x, y);
      }
    }
    EXPECT_LT((m / w - c).norm(), 0.05) << trial;
  }
}

TEST(Render, CheckerboardAndCalibrationPoses) {
  const BoardGeometry board{6, 8, 25.0};
  const auto poses = calibration_poses(board, 5);
  ASSERT_EQ(poses.size(), 5u);
  for (std::size_t i = 0; i < poses.size(); ++i) {
    EXPECT_TRUE(poses[i].is_orthonormal());
    for (std::size_t j = 0; j < i; ++j) EXPECT_GT((poses[i].rotation - poses[j].rotation).norm(), 1e-3);
  }
  RenderOptions opt;
  const GrayImage img = render_checkerboard(fixtures::default_camera(), poses[0], board, opt);
  double lo = 1.0, hi = 0.0;
  for (double v : img.samples()) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  EXPECT_LT(lo, 0.2);
  EXPECT_GT(hi, 0.8);
}
