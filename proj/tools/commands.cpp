#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "swaykin/anatomy.hpp"
#include "swaykin/calibration.hpp"
#include "swaykin/error.hpp"
#include "swaykin/features.hpp"
#include "swaykin/image.hpp"
#include "swaykin/io.hpp"
#include "swaykin/metrics.hpp"
#include "swaykin/pipeline.hpp"
#include "swaykin/pose.hpp"
#include "swaykin/synth.hpp"
#include "swaykin/target.hpp"

namespace swaykin::cli {

using nlohmann::json;

namespace {

// Runs fn(0..n-1) on up to `jobs` threads. The first exception is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

json load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

void save_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw UsageError("cannot create " + dir.string() + ": " + ec.message());
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw UsageError(std::string("bad value for '") + key + "': " + e.what());
  }
}

std::vector<fs::path> list_files(const fs::path& dir, const std::string& extension) {
  if (!fs::is_directory(dir)) throw UsageError("not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == extension) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

KinematicParams theta_from_json(const json& j, const char* what) {
  std::vector<double> v;
  try {
    v = j.get<std::vector<double>>();
  } catch (const json::exception&) {
    throw UsageError(std::string(what) + " must be an array of six numbers");
  }
  if (v.size() != 6) throw UsageError(std::string(what) + " must be an array of six numbers");
  KinematicParams p(v[0], v[1], v[2], v[3], v[4], v[5]);
  if (!p.is_valid()) throw UsageError(std::string(what) + " is not a valid pose");
  return p;
}

json theta_to_json(const KinematicParams& p) {
  return json::array({p[0], p[1], p[2], p[3], p[4], p[5]});
}

RigidTransform transform_from_json(const json& j) {
  RigidTransform t;
  try {
    if (j.contains("matrix")) {
      const auto m = j.at("matrix").get<std::vector<std::vector<double>>>();
      if (m.size() != 4 || std::any_of(m.begin(), m.end(), [](const auto& r) { return r.size() != 4; })) {
        throw UsageError("board_extrinsics matrix must be 4x4");
      }
      Eigen::Matrix4d mat;
      for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) mat(r, c) = m[r][c];
      t = RigidTransform::from_matrix(mat);
    } else {
      if (j.contains("rotation")) {
        const auto r = j.at("rotation").get<std::vector<std::vector<double>>>();
        if (r.size() != 3 || std::any_of(r.begin(), r.end(), [](const auto& row) { return row.size() != 3; })) {
          throw UsageError("board_extrinsics rotation must be 3x3");
        }
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b) t.rotation(a, b) = r[a][b];
      }
      if (j.contains("translation")) {
        const auto v = j.at("translation").get<std::array<double, 3>>();
        t.translation = Eigen::Vector3d(v[0], v[1], v[2]);
      }
    }
  } catch (const json::exception& e) {
    throw UsageError(std::string("bad board_extrinsics: ") + e.what());
  }
  if (!t.is_orthonormal(1e-9)) throw UsageError("board_extrinsics rotation is not orthonormal");
  return t;
}

double mean_fitted_rms(const PoseTrack& track) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < track.size(); ++i) {
    if (track.status[i] != FrameStatus::Fitted) continue;
    sum += track.reports[i].rms_residual_px;
    ++n;
  }
  return n ? sum / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
}

// ---------------------------------------------------------------- simulate

struct SimSegment {
  std::string name;
  GeometricTargetModel model;
  KinematicParams base;
  SwayProfile profile;
  NoiseSpec noise;
};

struct Scenario {
  CameraIntrinsics intrinsics;
  int width = 2048;
  int height = 2048;
  RigidTransform board_extrinsics;
  std::vector<SimSegment> segments;
  RenderOptions render;
  int calibration_views = 0;
  BoardGeometry calibration_board;
  double calibration_depth_mm = 1000.0;
};

SinusoidComponent parse_component(const json& j, SinusoidComponent c, const char* amplitude_key) {
  c.amplitude = get_or(j, amplitude_key, c.amplitude);
  c.frequency_hz = get_or(j, "frequency_hz", c.frequency_hz);
  return c;
}

SwayProfile parse_profile(const json& j, SwayProfile p) {
  if (j.contains("ap")) p.ap = parse_component(j["ap"], p.ap, "amplitude_mm");
  if (j.contains("ml")) p.ml = parse_component(j["ml"], p.ml, "amplitude_mm");
  if (j.contains("si")) p.si = parse_component(j["si"], p.si, "amplitude_mm");
  if (j.contains("rotation")) {
    const json& r = j["rotation"];
    if (!r.is_array() || r.size() != 3) throw UsageError("profile.rotation must list three components");
    for (std::size_t k = 0; k < 3; ++k) p.rotation[k] = parse_component(r[k], p.rotation[k], "amplitude_rad");
  }
  p.duration_sec = get_or(j, "duration_sec", p.duration_sec);
  p.rate_hz = get_or(j, "rate_hz", p.rate_hz);
  p.seed = get_or(j, "seed", p.seed);
  try {
    p.validate();
  } catch (const Error& e) {
    throw UsageError(std::string("profile: ") + e.what());
  }
  return p;
}

NoiseSpec parse_noise(const json& j, NoiseSpec n) {
  n.sigma_px = get_or(j, "sigma_px", n.sigma_px);
  n.dropout = get_or(j, "dropout", n.dropout);
  n.seed = get_or(j, "seed", n.seed);
  try {
    n.validate();
  } catch (const Error& e) {
    throw UsageError(std::string("noise: ") + e.what());
  }
  return n;
}

GeometricTargetModel model_from_ref(const std::string& ref, const fs::path& base) {
  if (ref == "shoulder") return shoulder_target();
  if (ref == "lumbar") return lumbar_target();
  try {
    return io::read_target(resolve(base, ref));
  } catch (const Error& e) {
    throw UsageError("model_ref '" + ref + "': " + e.what());
  }
}

Scenario parse_scenario(const fs::path& path) {
  const json j = load_config(path);
  const fs::path base = path.parent_path();
  Scenario s;

  const json camera = j.value("camera", json::object());
  s.width = get_or(camera, "width", 2048);
  s.height = get_or(camera, "height", 2048);
  s.intrinsics.fx = get_or(camera, "fx", 4000.0);
  s.intrinsics.fy = get_or(camera, "fy", s.intrinsics.fx);
  s.intrinsics.s = get_or(camera, "s", 0.0);
  s.intrinsics.x0 = get_or(camera, "x0", s.width / 2.0);
  s.intrinsics.y0 = get_or(camera, "y0", s.height / 2.0);
  s.intrinsics.k1 = get_or(camera, "k1", 0.0);
  s.intrinsics.k2 = get_or(camera, "k2", 0.0);
  if (s.width <= 0 || s.height <= 0) throw UsageError("camera size must be positive");
  try {
    s.intrinsics.validate();
  } catch (const Error& e) {
    throw UsageError(std::string("camera: ") + e.what());
  }
  s.render.width = s.width;
  s.render.height = s.height;

  const SwayProfile profile = parse_profile(j.value("profile", json::object()), SwayProfile{});
  const NoiseSpec noise = parse_noise(j.value("noise", json::object()), NoiseSpec{});
  if (j.contains("board_extrinsics")) s.board_extrinsics = transform_from_json(j["board_extrinsics"]);

  json segments;
  if (j.contains("segments")) {
    segments = j["segments"];
  } else if (j.contains("model_ref")) {
    const std::string ref = j["model_ref"].get<std::string>();
    segments = json::array({{{"name", ref == "lumbar" ? "lower" : "upper"}, {"model_ref", ref}}});
    if (j.contains("base_pose")) segments[0]["base_pose"] = j["base_pose"];
  } else {
    segments = json::array({{{"name", "upper"}, {"model_ref", "shoulder"}, {"base_pose", {0, 0, 0, -30, -130, 1000}}},
                            {{"name", "lower"}, {"model_ref", "lumbar"}, {"base_pose", {0, 0, 0, -30, 70, 1000}}}});
  }
  if (!segments.is_array() || segments.empty()) throw UsageError("scenario needs at least one segment");
  std::set<std::string> names;
  for (std::size_t k = 0; k < segments.size(); ++k) {
    const json& seg = segments[k];
    SimSegment out;
    out.name = get_or<std::string>(seg, "name", "segment" + std::to_string(k));
    if (out.name.empty() || out.name.find_first_of(",/\\ ") != std::string::npos) {
      throw UsageError("segment name '" + out.name + "' must be non-empty without commas, slashes or spaces");
    }
    if (!names.insert(out.name).second) throw UsageError("duplicate segment name '" + out.name + "'");
    out.model = model_from_ref(get_or<std::string>(seg, "model_ref", "shoulder"), base);
    out.base = seg.contains("base_pose") ? theta_from_json(seg["base_pose"], "base_pose")
                                         : KinematicParams(0, 0, 0, -30, -30, 1000);
    SwayProfile p = profile;
    p.seed += k;
    out.profile = seg.contains("profile") ? parse_profile(seg["profile"], p) : p;
    out.profile.duration_sec = profile.duration_sec;
    out.profile.rate_hz = profile.rate_hz;
    NoiseSpec n = noise;
    n.seed += k;
    out.noise = seg.contains("noise") ? parse_noise(seg["noise"], n) : n;
    s.segments.push_back(std::move(out));
  }

  const json render = j.value("render", json::object());
  s.render.patch_radius_px = get_or(render, "patch_radius_px", s.render.patch_radius_px);
  s.render.blur_sigma_px = get_or(render, "blur_sigma_px", s.render.blur_sigma_px);
  s.render.contrast = get_or(render, "contrast", s.render.contrast);
  s.render.background = get_or(render, "background", s.render.background);

  if (j.contains("calibration")) {
    const json& c = j["calibration"];
    s.calibration_views = get_or(c, "views", 5);
    const json b = c.value("board", json::object());
    s.calibration_board.rows = get_or(b, "rows", 6);
    s.calibration_board.cols = get_or(b, "cols", 8);
    s.calibration_board.square_size_mm = get_or(b, "square_size_mm", 25.0);
    s.calibration_depth_mm = get_or(c, "depth_mm", 1000.0);
    try {
      s.calibration_board.validate();
    } catch (const Error& e) {
      throw UsageError(std::string("calibration board: ") + e.what());
    }
    if (s.calibration_views < 1) throw UsageError("calibration.views must be positive");
  }
  return s;
}

std::string frame_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%05zu.pgm", i);
  return buf;
}

}  // namespace

int run_simulate(const SimulateArgs& args) {
  const Scenario s = parse_scenario(args.scenario);
  ensure_dir(args.out);

  io::write_intrinsics(args.out / "intrinsics.json", s.intrinsics, 0.0);
  io::write_extrinsics(args.out / "board_extrinsics.json", s.board_extrinsics);
  const AnatomicalFrame frame(s.board_extrinsics);

  std::vector<std::vector<KinematicParams>> truth(s.segments.size());
  json track_segments = json::array();
  std::size_t frame_count = 0;
  for (std::size_t k = 0; k < s.segments.size(); ++k) {
    const SimSegment& seg = s.segments[k];
    truth[k] = generate_trajectory(seg.profile, seg.base);
    frame_count = truth[k].size();
    const auto obs = render_observations(truth[k], seg.model, s.intrinsics, seg.noise);

    io::write_target(args.out / ("target_" + seg.name + ".json"), seg.model);
    io::write_features_csv(args.out / ("features_" + seg.name + ".csv"), obs);

    PoseTrack pose;
    pose.rate_hz = seg.profile.rate_hz;
    for (const auto& theta : truth[k]) {
      FitReport r;
      r.theta = theta;
      r.converged = true;
      pose.reports.push_back(r);
      pose.status.push_back(FrameStatus::Fitted);
    }
    io::write_pose_csv(args.out / ("truth_pose_" + seg.name + ".csv"), pose);
    io::write_trajectory_csv(args.out / ("truth_" + seg.name + ".csv"),
                             {anatomical_trajectory(std::span<const KinematicParams>(truth[k]), seg.profile.rate_hz,
                                                    seg.model, frame, seg.name)});

    track_segments.push_back({{"name", seg.name},
                              {"target", "target_" + seg.name + ".json"},
                              {"features", "features_" + seg.name + ".csv"},
                              {"initial_theta", theta_to_json(seg.base)}});
  }

  json track = {{"intrinsics", "intrinsics.json"},
                {"board_extrinsics", "board_extrinsics.json"},
                {"rate_hz", s.segments.front().profile.rate_hz},
                {"frame_count", frame_count},
                {"source", "features"},
                {"segments", track_segments},
                {"max_gap_sec", 0.5},
                {"smooth", true},
                {"sg_window_sec", 0.5},
                {"sg_order", 2},
                {"match_gate_px", 20.0}};

  if (args.render_frames) {
    const fs::path dir = args.out / "frames";
    ensure_dir(dir);
    std::mutex warn_mutex;
    std::set<std::string> warnings;
    parallel_for(frame_count, args.jobs, [&](std::size_t i) {
      std::vector<std::pair<KinematicParams, const GeometricTargetModel*>> scene;
      for (std::size_t k = 0; k < s.segments.size(); ++k) scene.emplace_back(truth[k][i], &s.segments[k].model);
      std::vector<std::string> w;
      write_pgm(dir / frame_name(i), render_scene(scene, s.intrinsics, s.render, &w));
      if (!w.empty()) {
        std::lock_guard lock(warn_mutex);
        warnings.insert(w.begin(), w.end());
      }
    });
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
    track["frames"] = "frames";
  }

  if (s.calibration_views > 0) {
    const fs::path dir = args.out / "calibration";
    ensure_dir(dir);
    io::write_board(args.out / "board.json", s.calibration_board);
    const auto poses = calibration_poses(s.calibration_board, s.calibration_views, s.calibration_depth_mm);
    parallel_for(poses.size(), args.jobs, [&](std::size_t i) {
      char name[32];
      std::snprintf(name, sizeof name, "view_%02zu.pgm", i);
      write_pgm(dir / name, render_checkerboard(s.intrinsics, poses[i], s.calibration_board, s.render));
    });
  }

  save_json(args.out / "track.json", track);
  std::cout << "simulated " << frame_count << " frames for " << s.segments.size() << " segment(s) into "
            << args.out.string() << '\n';
  return 0;
}

// --------------------------------------------------------------- calibrate

int run_calibrate(const CalibrateArgs& args) {
  if (!fs::exists(args.board)) throw UsageError("board descriptor not found: " + args.board.string());
  BoardGeometry board;
  try {
    board = io::read_board(args.board);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  const auto files = list_files(args.frames, ".pgm");
  if (files.empty()) throw UsageError("no .pgm images in " + args.frames.string());

  std::vector<CalibrationView> views;
  for (const auto& f : files) {
    const GrayImage img = read_pgm(f);
    try {
      views.push_back(find_board_corners(img, board));
    } catch (const Error& e) {
      std::cerr << "warning: skipping " << f.filename().string() << ": " << e.what() << '\n';
    }
  }
  if (views.empty()) throw Error(ErrorCode::InsufficientCorrespondence, "the board was not found in any image");

  const CalibrationResult result = calibrate(views);
  if (!args.out.parent_path().empty()) ensure_dir(args.out.parent_path());
  io::write_intrinsics(args.out, result.intrinsics, result.rms_px);
  const auto& k = result.intrinsics;
  std::cout << std::setprecision(6) << "calibrated from " << views.size() << " view(s): fx " << k.fx << " fy " << k.fy
            << " s " << k.s << " x0 " << k.x0 << " y0 " << k.y0 << " k1 " << k.k1 << " k2 " << k.k2 << "; rms "
            << result.rms_px << " px" << (result.converged ? "" : " (not converged)") << '\n';
  return 0;
}

// ------------------------------------------------------------------- track

namespace {

struct TrackSegment {
  std::string name;
  GeometricTargetModel model;
  fs::path features;
  std::optional<KinematicParams> initial_theta;
};

struct PipelineConfig {
  CameraIntrinsics intrinsics;
  RigidTransform board_extrinsics;
  double rate_hz = 30.0;
  std::size_t frame_count = 0;
  bool use_frames = false;
  fs::path frames;
  std::vector<TrackSegment> segments;
  PostprocessOptions post;
  double match_gate_px = 20.0;
  TrackConfig track;
};

PipelineConfig parse_pipeline(const TrackArgs& args) {
  const json j = load_config(args.config);
  const fs::path base = args.config.parent_path();
  PipelineConfig c;
  try {
    c.intrinsics = io::read_intrinsics(resolve(base, get_or<std::string>(j, "intrinsics", "intrinsics.json")));
    c.board_extrinsics = j.contains("board_extrinsics")
                             ? io::read_extrinsics(resolve(base, j["board_extrinsics"].get<std::string>()))
                             : RigidTransform{};
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  c.rate_hz = args.rate_hz.value_or(get_or(j, "rate_hz", 30.0));
  if (!(c.rate_hz > 0.0) || !std::isfinite(c.rate_hz)) throw UsageError("rate_hz must be positive");
  c.frame_count = get_or<std::size_t>(j, "frame_count", 0);

  const std::string source = get_or<std::string>(j, "source", j.contains("frames") ? "frames" : "features");
  if (source != "frames" && source != "features") throw UsageError("source must be 'frames' or 'features'");
  c.use_frames = args.frames.has_value() || source == "frames";
  if (args.frames) {
    c.frames = *args.frames;
  } else if (c.use_frames) {
    if (!j.contains("frames")) throw UsageError("source is 'frames' but no frames directory is configured");
    c.frames = resolve(base, j["frames"].get<std::string>());
  }

  if (!j.contains("segments") || !j["segments"].is_array() || j["segments"].empty()) {
    throw UsageError("config needs a non-empty 'segments' array");
  }
  std::set<std::string> names;
  for (const auto& s : j["segments"]) {
    TrackSegment seg;
    seg.name = get_or<std::string>(s, "name", "");
    if (seg.name.empty() || seg.name.find_first_of(",/\\ ") != std::string::npos) {
      throw UsageError("segment name '" + seg.name + "' must be non-empty without commas, slashes or spaces");
    }
    if (!names.insert(seg.name).second) throw UsageError("duplicate segment name '" + seg.name + "'");
    if (!s.contains("target")) throw UsageError("segment '" + seg.name + "' has no target");
    try {
      seg.model = io::read_target(resolve(base, s["target"].get<std::string>()));
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
    if (!c.use_frames) {
      if (!s.contains("features")) throw UsageError("segment '" + seg.name + "' has no features CSV");
      seg.features = resolve(base, s["features"].get<std::string>());
      if (!fs::exists(seg.features)) throw UsageError("features CSV not found: " + seg.features.string());
    }
    if (s.contains("initial_theta")) seg.initial_theta = theta_from_json(s["initial_theta"], "initial_theta");
    if (c.use_frames && !seg.initial_theta) {
      throw UsageError("segment '" + seg.name + "' needs initial_theta to match features in raw frames");
    }
    c.segments.push_back(std::move(seg));
  }

  c.post.max_gap_sec = args.max_gap_sec.value_or(get_or(j, "max_gap_sec", c.post.max_gap_sec));
  c.post.smooth = !args.no_smooth && get_or(j, "smooth", true);
  c.post.sg_window_sec = args.sg_window_sec.value_or(get_or(j, "sg_window_sec", c.post.sg_window_sec));
  c.post.sg_order = args.sg_order.value_or(get_or(j, "sg_order", c.post.sg_order));
  c.match_gate_px = get_or(j, "match_gate_px", c.match_gate_px);
  if (c.post.max_gap_sec < 0.0 || !(c.post.sg_window_sec > 0.0) || c.post.sg_order < 0 || !(c.match_gate_px > 0.0)) {
    throw UsageError("filter and gap settings must be positive");
  }
  const std::string policy = get_or<std::string>(j, "init_policy", "warm_start");
  if (policy == "warm_start") {
    c.track.init_policy = InitPolicy::WarmStart;
  } else if (policy == "random") {
    c.track.init_policy = InitPolicy::RandomPerFrame;
  } else {
    throw UsageError("init_policy must be 'warm_start' or 'random'");
  }
  c.track.random_seed = get_or<std::uint64_t>(j, "seed", 0);
  return c;
}

// Labels unlabelled detections frame by frame, predicting each frame's
// features from the previous frame's fit.
std::vector<std::vector<FeatureObservation>> label_sequence(const std::vector<std::vector<FeatureObservation>>& detections,
                                                            const TrackSegment& seg, const PipelineConfig& c) {
  if (!seg.initial_theta) throw UsageError("segment '" + seg.name + "' needs initial_theta to label features");
  std::vector<std::vector<FeatureObservation>> out(detections.size());
  KinematicParams predicted = *seg.initial_theta;
  for (std::size_t i = 0; i < detections.size(); ++i) {
    out[i] = match_to_model(detections[i], seg.model, predicted, c.intrinsics, c.match_gate_px,
                            c.track.fit.min_correspondences);
    if (out[i].empty()) continue;
    try {
      const FitReport r = fit_pose(predicted, seg.model, out[i], c.intrinsics, c.track.fit);
      if (r.theta.is_valid()) predicted = r.theta;
    } catch (const Error&) {
      // Keep the last prediction; the frame is re-fitted by the tracker.
    }
  }
  return out;
}

}  // namespace

int run_track(const TrackArgs& args) {
  const PipelineConfig c = parse_pipeline(args);
  ensure_dir(args.out);

  std::vector<std::vector<FeatureObservation>> frame_detections;
  if (c.use_frames) {
    const auto files = list_files(c.frames, ".pgm");
    if (files.empty()) throw UsageError("no .pgm frames in " + c.frames.string());
    frame_detections.resize(files.size());
    parallel_for(files.size(), args.jobs, [&](std::size_t i) {
      GrayImage img = read_pgm(files[i]);
      if (c.intrinsics.has_distortion()) img = undistort_frame(c.intrinsics, img);
      frame_detections[i] = detect_corners(img);
    });
  }

  const AnatomicalFrame anatomical(c.board_extrinsics);
  std::vector<PoseTrack> tracks(c.segments.size());
  std::vector<SwayTrajectory> trajectories(c.segments.size());
  std::vector<GapReport> gaps(c.segments.size());
  parallel_for(c.segments.size(), args.jobs, [&](std::size_t k) {
    const TrackSegment& seg = c.segments[k];
    std::vector<std::vector<FeatureObservation>> obs;
    if (c.use_frames) {
      obs = label_sequence(frame_detections, seg, c);
    } else {
      obs = io::read_features_csv(seg.features, c.frame_count);
      undistort_observations(obs, c.intrinsics);
      const bool labelled = std::all_of(obs.begin(), obs.end(), [](const auto& f) {
        return std::all_of(f.begin(), f.end(), [](const FeatureObservation& o) { return o.model_index.has_value(); });
      });
      if (!labelled) obs = label_sequence(obs, seg, c);
    }
    if (obs.empty()) throw UsageError("segment '" + seg.name + "' has no frames");
    tracks[k] = track_sequence(obs, seg.model, c.intrinsics, c.rate_hz, c.track);
    const SwayTrajectory raw = anatomical_trajectory(tracks[k], seg.model, anatomical, seg.name);
    trajectories[k] = postprocess_trajectory(raw, c.post, &gaps[k]);
  });

  json meta = {{"axis_convention", AnatomicalFrame::kAxisConvention},
               {"columns", "AP_mm, ML_mm, SI_mm in the anatomical frame"},
               {"rate_hz", c.rate_hz},
               {"source", c.use_frames ? "frames" : "features"},
               {"smooth", c.post.smooth},
               {"sg_window_sec", c.post.sg_window_sec},
               {"sg_order", c.post.sg_order},
               {"max_gap_sec", c.post.max_gap_sec},
               {"segments", json::array()}};
  for (std::size_t k = 0; k < c.segments.size(); ++k) {
    const auto& name = c.segments[k].name;
    io::write_pose_csv(args.out / ("pose_" + name + ".csv"), tracks[k]);
    io::write_trajectory_csv(args.out / ("trajectory_" + name + ".csv"), {trajectories[k]});
    const std::size_t fitted = tracks[k].fitted_count();
    const double rms = mean_fitted_rms(tracks[k]);
    json unfilled = json::array();
    for (const auto& [a, b] : gaps[k].unfilled) unfilled.push_back({a, b});
    meta["segments"].push_back({{"name", name},
                                {"frames", tracks[k].size()},
                                {"fitted", fitted},
                                {"gaps", tracks[k].size() - fitted},
                                {"interpolated_samples", gaps[k].filled_samples},
                                {"unfilled_ranges", unfilled},
                                {"mean_rms_px", rms}});
    if (gaps[k].leading_gap || gaps[k].trailing_gap || !gaps[k].unfilled.empty()) {
      std::cerr << "warning: segment '" << name << "' keeps " << gaps[k].unfilled.size()
                << " unfilled gap(s) in its trajectory\n";
    }
    std::cout << std::fixed << std::setprecision(4) << name << ": frames " << tracks[k].size() << ", fitted "
              << fitted << ", gaps " << tracks[k].size() - fitted << ", mean rms " << rms << " px\n";
  }
  save_json(args.out / "metadata.json", meta);
  return 0;
}

// ----------------------------------------------------------------- analyze

namespace {

using Participant = std::pair<std::string, std::vector<SwayTrajectory>>;

std::vector<SwayTrajectory> read_trajectory_dir(const fs::path& dir) {
  std::vector<SwayTrajectory> out;
  for (const auto& f : list_files(dir, ".csv")) {
    if (f.filename().string().rfind("trajectory", 0) != 0) continue;
    for (auto& t : io::read_trajectory_csv(f)) out.push_back(std::move(t));
  }
  return out;
}

// A directory holds either one participant's trajectory CSVs or one
// subdirectory per participant.
std::vector<Participant> read_condition(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw UsageError("not a directory: " + dir.string());
  std::vector<Participant> out;
  auto own = read_trajectory_dir(dir);
  if (!own.empty()) {
    out.emplace_back(dir.filename().string(), std::move(own));
    return out;
  }
  std::vector<fs::path> subdirs;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_directory()) subdirs.push_back(e.path());
  }
  std::sort(subdirs.begin(), subdirs.end());
  for (const auto& s : subdirs) {
    auto t = read_trajectory_dir(s);
    if (!t.empty()) out.emplace_back(s.filename().string(), std::move(t));
  }
  if (out.empty()) throw UsageError("no trajectory CSVs under " + dir.string());
  return out;
}

StanceBins parse_bins(const std::string& text) {
  std::vector<double> edges;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      std::size_t used = 0;
      edges.push_back(std::stod(cell, &used));
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw UsageError("bad bin edge '" + cell + "'");
    }
  }
  try {
    return StanceBins::from_edges(edges);
  } catch (const Error& e) {
    throw UsageError(std::string("--bins: ") + e.what());
  }
}

using TplKey = std::tuple<std::string, Direction, std::string>;

std::vector<std::vector<TplResult>> tpl_for(const std::vector<Participant>& participants, const StanceBins& bins,
                                            int jobs) {
  std::vector<std::vector<TplResult>> out(participants.size());
  parallel_for(participants.size(), jobs, [&](std::size_t i) {
    for (const auto& traj : participants[i].second) {
      auto rows = tpl_table(traj, bins);
      out[i].insert(out[i].end(), rows.begin(), rows.end());
    }
  });
  return out;
}

void write_tpl_set(const fs::path& dir, const std::vector<Participant>& participants,
                   const std::vector<std::vector<TplResult>>& rows) {
  ensure_dir(dir);
  if (participants.size() == 1) {
    io::write_tpl_csv(dir / "tpl.csv", rows.front());
    return;
  }
  for (std::size_t i = 0; i < participants.size(); ++i) {
    io::write_tpl_csv(dir / ("tpl_" + participants[i].first + ".csv"), rows[i]);
  }
}

}  // namespace

int run_analyze(const AnalyzeArgs& args) {
  const StanceBins bins = parse_bins(args.bins);
  const auto cond_a = read_condition(args.traj);
  const auto tpl_a = tpl_for(cond_a, bins, args.jobs);
  write_tpl_set(args.out, cond_a, tpl_a);
  std::cout << "wrote TPL for " << cond_a.size() << " participant(s)\n";
  if (!args.compare) return 0;

  const auto cond_b = read_condition(*args.compare);
  const auto tpl_b = tpl_for(cond_b, bins, args.jobs);
  write_tpl_set(args.out / "compare", cond_b, tpl_b);

  std::map<std::string, std::size_t> index_b;
  for (std::size_t i = 0; i < cond_b.size(); ++i) index_b[cond_b[i].first] = i;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < cond_a.size(); ++i) {
    const auto it = index_b.find(cond_a[i].first);
    if (it == index_b.end()) {
      std::cerr << "warning: participant '" << cond_a[i].first << "' has no counterpart in the second condition\n";
      continue;
    }
    pairs.emplace_back(i, it->second);
  }
  if (pairs.size() < 2) throw UsageError("a comparison needs at least two participants present in both conditions");

  auto lookup = [](const std::vector<TplResult>& rows) {
    std::map<TplKey, double> m;
    for (const auto& r : rows) m[{r.segment, r.direction, r.bin}] = r.value_mm;
    return m;
  };
  std::vector<std::map<TplKey, double>> maps_a, maps_b;
  for (const auto& [ia, ib] : pairs) {
    maps_a.push_back(lookup(tpl_a[ia]));
    maps_b.push_back(lookup(tpl_b[ib]));
  }

  std::ofstream out(args.out / "cohens_d.csv");
  if (!out) throw Error(ErrorCode::Io, "cannot write " + (args.out / "cohens_d.csv").string());
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "segment,direction,bin,n,mean_a,sem_a,mean_b,sem_b,cohens_d\n";
  for (const auto& row : tpl_a[pairs.front().first]) {
    const TplKey key{row.segment, row.direction, row.bin};
    Eigen::MatrixXd values(static_cast<Eigen::Index>(pairs.size()), 2);
    bool complete = true;
    for (std::size_t p = 0; p < pairs.size() && complete; ++p) {
      const auto a = maps_a[p].find(key);
      const auto b = maps_b[p].find(key);
      if (a == maps_a[p].end() || b == maps_b[p].end()) {
        complete = false;
        break;
      }
      values(static_cast<Eigen::Index>(p), 0) = a->second;
      values(static_cast<Eigen::Index>(p), 1) = b->second;
    }
    if (!complete) {
      std::cerr << "warning: " << row.segment << '/' << to_string(row.direction) << '/' << row.bin
                << " is missing for some participants; skipped\n";
      continue;
    }
    const Eigen::VectorXd sem = morey_sem(cousineau_morey(values));
    const Eigen::VectorXd a = values.col(0);
    const Eigen::VectorXd b = values.col(1);
    const double d = cohens_d(std::span<const double>(a.data(), a.size()), std::span<const double>(b.data(), b.size()));
    out << row.segment << ',' << to_string(row.direction) << ',' << row.bin << ',' << pairs.size() << ',' << a.mean()
        << ',' << sem[0] << ',' << b.mean() << ',' << sem[1] << ',' << d << '\n';
  }
  std::cout << "wrote Cohen's d for " << pairs.size() << " paired participant(s)\n";
  return 0;
}

// ------------------------------------------------------------------- agree

namespace {

SwayTrajectory pick_segment(const fs::path& path, const std::optional<std::string>& segment) {
  auto all = io::read_trajectory_csv(path);
  if (all.empty()) throw UsageError(path.string() + " holds no samples");
  if (!segment) return all.front();
  for (auto& t : all) {
    if (t.segment == *segment) return t;
  }
  throw UsageError(path.string() + " has no segment '" + *segment + "'");
}

// Linear interpolation at time t; NaN outside the range or next to an
// invalid sample.
double sample_at(const SwayTrajectory& traj, int axis, double t) {
  const double pos = (t - traj.t0) * traj.rate_hz;
  const double last = static_cast<double>(traj.size() - 1);
  if (pos < -1e-9 || pos > last + 1e-9) return std::numeric_limits<double>::quiet_NaN();
  const double clamped = std::clamp(pos, 0.0, last);
  auto i = static_cast<std::size_t>(std::floor(clamped));
  if (i + 1 >= traj.size()) i = traj.size() >= 2 ? traj.size() - 2 : 0;
  const double w = clamped - static_cast<double>(i);
  if (traj.size() == 1) return traj.valid[0] ? traj.samples[0][axis] : std::numeric_limits<double>::quiet_NaN();
  if ((w < 1.0 && !traj.valid[i]) || (w > 0.0 && !traj.valid[i + 1])) return std::numeric_limits<double>::quiet_NaN();
  const double lo = traj.valid[i] ? traj.samples[i][axis] : 0.0;
  const double hi = traj.valid[i + 1] ? traj.samples[i + 1][axis] : 0.0;
  return (1.0 - w) * lo + w * hi;
}

}  // namespace

int run_agree(const AgreeArgs& args) {
  Axis axis;
  if (args.axis == "AP") {
    axis = Axis::AP;
  } else if (args.axis == "ML") {
    axis = Axis::ML;
  } else if (args.axis == "SI") {
    axis = Axis::SI;
  } else {
    throw UsageError("--axis must be AP, ML or SI");
  }
  SwayTrajectory a, b;
  try {
    a = pick_segment(args.a, args.segment);
    b = pick_segment(args.b, args.segment);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }

  const double start = std::max(a.t0, b.t0);
  const double end = std::min(a.time(a.size() - 1), b.time(b.size() - 1));
  if (!(end > start)) throw Error(ErrorCode::InvalidInput, "the two trajectories do not overlap in time");
  const double tol = 1e-9;
  if (std::abs(a.t0 - b.t0) > tol || std::abs(a.time(a.size() - 1) - b.time(b.size() - 1)) > 0.5 / args.rate_hz) {
    std::cerr << std::setprecision(6) << "warning: durations differ; comparing the overlap " << start << " s to " << end
              << " s\n";
  }
  const auto count = static_cast<std::size_t>(std::floor((end - start) * args.rate_hz + tol)) + 1;
  std::vector<double> va, vb;
  const int k = static_cast<int>(axis);
  for (std::size_t i = 0; i < count; ++i) {
    const double t = start + static_cast<double>(i) / args.rate_hz;
    const double x = sample_at(a, k, t);
    const double y = sample_at(b, k, t);
    if (std::isfinite(x) && std::isfinite(y)) {
      va.push_back(x);
      vb.push_back(y);
    }
  }
  const AgreementReport r = bland_altman(va, vb);
  if (!args.out.parent_path().empty()) ensure_dir(args.out.parent_path());
  io::write_agreement(args.out, r);
  std::cout << std::setprecision(6) << args.axis << ": n " << r.n << ", bias " << r.bias_mm << " mm, limits ["
            << r.loa_low << ", " << r.loa_high << "] mm, slope " << r.slope << ", r2 " << r.r2 << '\n';
  return 0;
}

}  // namespace swaykin::cli
