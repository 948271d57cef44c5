#include "swaykin/io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

#include "json.hpp"
#include "swaykin/error.hpp"

namespace swaykin::io {

using nlohmann::json;

namespace {

json load_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Io, "malformed JSON in " + path.string() + ": " + e.what());
  }
}

void save_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << std::setprecision(17) << j.dump(2) << '\n';
}

template <typename T>
T field(const json& j, const char* key, const fs::path& path) {
  if (!j.contains(key)) throw Error(ErrorCode::Io, path.string() + " lacks field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Io, path.string() + ": bad field '" + key + "': " + e.what());
  }
}

std::ofstream open_csv(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double to_double(const std::string& s, const fs::path& path, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size() && s.find_first_not_of(" \r", used) != std::string::npos) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    if (s == "nan" || s == "NaN" || s == "-nan") return std::numeric_limits<double>::quiet_NaN();
    throw Error(ErrorCode::Io, path.string() + ":" + std::to_string(line) + ": not a number '" + s + "'");
  }
}

}  // namespace

void write_intrinsics(const fs::path& path, const CameraIntrinsics& k, double rms_px) {
  save_json(path, json{{"fx", k.fx}, {"fy", k.fy}, {"s", k.s}, {"x0", k.x0}, {"y0", k.y0},
                       {"k1", k.k1}, {"k2", k.k2}, {"rms_px", rms_px}});
}

CameraIntrinsics read_intrinsics(const fs::path& path) {
  const json j = load_json(path);
  CameraIntrinsics k;
  k.fx = field<double>(j, "fx", path);
  k.fy = field<double>(j, "fy", path);
  k.s = j.value("s", 0.0);
  k.x0 = field<double>(j, "x0", path);
  k.y0 = field<double>(j, "y0", path);
  k.k1 = j.value("k1", 0.0);
  k.k2 = j.value("k2", 0.0);
  k.validate();
  return k;
}

void write_board(const fs::path& path, const BoardGeometry& board) {
  save_json(path, json{{"rows", board.rows}, {"cols", board.cols}, {"square_size_mm", board.square_size_mm}});
}

BoardGeometry read_board(const fs::path& path) {
  const json j = load_json(path);
  BoardGeometry b;
  b.rows = field<int>(j, "rows", path);
  b.cols = field<int>(j, "cols", path);
  b.square_size_mm = field<double>(j, "square_size_mm", path);
  b.validate();
  return b;
}

void write_target(const fs::path& path, const GeometricTargetModel& model) {
  json pts = json::array();
  for (const auto& p : model.points) pts.push_back({p.x(), p.y(), p.z()});
  save_json(path, json{{"name", model.name},
                       {"points_mm", pts},
                       {"virtual_offset_mm", {model.virtual_offset.x(), model.virtual_offset.y(), model.virtual_offset.z()}}});
}

GeometricTargetModel read_target(const fs::path& path) {
  const json j = load_json(path);
  GeometricTargetModel m;
  m.name = field<std::string>(j, "name", path);
  for (const auto& p : field<std::vector<std::array<double, 3>>>(j, "points_mm", path)) {
    m.points.emplace_back(p[0], p[1], p[2]);
  }
  if (j.contains("virtual_offset_mm")) {
    const auto v = field<std::array<double, 3>>(j, "virtual_offset_mm", path);
    m.virtual_offset = Eigen::Vector3d(v[0], v[1], v[2]);
  }
  m.validate_shape();
  return m;
}

void write_extrinsics(const fs::path& path, const RigidTransform& t) {
  const Eigen::Matrix4d m = t.matrix();
  json rows = json::array();
  for (int r = 0; r < 4; ++r) rows.push_back({m(r, 0), m(r, 1), m(r, 2), m(r, 3)});
  save_json(path, json{{"matrix", rows}, {"axis_convention", "board X->ML, Y->SI, Z->AP"}});
}

RigidTransform read_extrinsics(const fs::path& path) {
  const json j = load_json(path);
  RigidTransform t;
  if (j.contains("matrix")) {
    const auto rows = field<std::vector<std::vector<double>>>(j, "matrix", path);
    if (rows.size() != 4) throw Error(ErrorCode::Io, path.string() + ": matrix must be 4x4");
    Eigen::Matrix4d m;
    for (int r = 0; r < 4; ++r) {
      if (rows[r].size() != 4) throw Error(ErrorCode::Io, path.string() + ": matrix must be 4x4");
      for (int c = 0; c < 4; ++c) m(r, c) = rows[r][c];
    }
    t = RigidTransform::from_matrix(m);
  } else {
    const auto rot = field<std::vector<std::vector<double>>>(j, "rotation", path);
    const auto tr = field<std::array<double, 3>>(j, "translation", path);
    if (rot.size() != 3) throw Error(ErrorCode::Io, path.string() + ": rotation must be 3x3");
    for (int r = 0; r < 3; ++r) {
      if (rot[r].size() != 3) throw Error(ErrorCode::Io, path.string() + ": rotation must be 3x3");
      for (int c = 0; c < 3; ++c) t.rotation(r, c) = rot[r][c];
    }
    t.translation = Eigen::Vector3d(tr[0], tr[1], tr[2]);
  }
  if (!t.is_orthonormal(1e-9)) throw Error(ErrorCode::Io, path.string() + ": rotation is not orthonormal");
  return t;
}

void write_features_csv(const fs::path& path, const std::vector<std::vector<FeatureObservation>>& frames) {
  auto out = open_csv(path);
  out << "frame,model_index,u,v,score\n";
  for (std::size_t f = 0; f < frames.size(); ++f) {
    for (const auto& o : frames[f]) {
      out << f << ',' << (o.model_index ? *o.model_index : -1) << ',' << o.position.x() << ',' << o.position.y()
          << ',' << o.score << '\n';
    }
  }
}

std::vector<std::vector<FeatureObservation>> read_features_csv(const fs::path& path, std::size_t frame_count) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  std::vector<std::vector<FeatureObservation>> frames(frame_count);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split(line);
    if (cells.size() != 5) throw Error(ErrorCode::Io, path.string() + ":" + std::to_string(line_no) + ": expected 5 columns");
    const double frame = to_double(cells[0], path, line_no);
    if (!(frame >= 0.0)) throw Error(ErrorCode::Io, path.string() + ":" + std::to_string(line_no) + ": bad frame index");
    const auto f = static_cast<std::size_t>(frame);
    if (f >= frames.size()) frames.resize(f + 1);
    FeatureObservation o;
    const int idx = static_cast<int>(to_double(cells[1], path, line_no));
    if (idx >= 0) o.model_index = idx;
    o.position = PixelPoint(to_double(cells[2], path, line_no), to_double(cells[3], path, line_no));
    o.score = to_double(cells[4], path, line_no);
    frames[f].push_back(o);
  }
  return frames;
}

void write_pose_csv(const fs::path& path, const PoseTrack& track) {
  auto out = open_csv(path);
  out << "frame,t_sec,status,theta1,theta2,theta3,theta4,theta5,theta6,rms_px,iters\n";
  for (std::size_t i = 0; i < track.size(); ++i) {
    const auto& r = track.reports[i];
    out << i << ',' << track.time(i) << ',' << (track.status[i] == FrameStatus::Fitted ? "fitted" : "gap");
    for (int k = 0; k < 6; ++k) out << ',' << r.theta[k];
    out << ',' << r.rms_residual_px << ',' << r.iterations << '\n';
  }
}

void write_trajectory_csv(const fs::path& path, const std::vector<SwayTrajectory>& trajectories) {
  auto out = open_csv(path);
  out << "t_sec,segment,AP_mm,ML_mm,SI_mm,valid\n";
  for (const auto& traj : trajectories) {
    for (std::size_t i = 0; i < traj.size(); ++i) {
      const auto& s = traj.samples[i];
      out << traj.time(i) << ',' << traj.segment << ',' << s[0] << ',' << s[1] << ',' << s[2] << ','
          << (traj.valid[i] ? 1 : 0) << '\n';
    }
  }
}

std::vector<SwayTrajectory> read_trajectory_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  std::vector<SwayTrajectory> out;
  std::map<std::string, std::size_t> index;
  std::map<std::string, std::vector<double>> times;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split(line);
    if (cells.size() != 6) throw Error(ErrorCode::Io, path.string() + ":" + std::to_string(line_no) + ": expected 6 columns");
    const std::string& seg = cells[1];
    auto it = index.find(seg);
    if (it == index.end()) {
      it = index.emplace(seg, out.size()).first;
      out.emplace_back();
      out.back().segment = seg;
    }
    auto& traj = out[it->second];
    times[seg].push_back(to_double(cells[0], path, line_no));
    traj.samples.emplace_back(to_double(cells[2], path, line_no), to_double(cells[3], path, line_no),
                              to_double(cells[4], path, line_no));
    traj.valid.push_back(to_double(cells[5], path, line_no) != 0.0);
  }
  for (auto& traj : out) {
    const auto& t = times[traj.segment];
    traj.t0 = t.front();
    if (t.size() < 2) throw Error(ErrorCode::Io, path.string() + ": segment '" + traj.segment + "' has one sample");
    const double dt = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
    if (!(dt > 0.0)) throw Error(ErrorCode::Io, path.string() + ": non-increasing time column");
    for (std::size_t i = 1; i < t.size(); ++i) {
      if (std::abs((t[i] - t[i - 1]) - dt) > 1e-6 * std::max(1.0, dt) + 1e-9) {
        throw Error(ErrorCode::Io, path.string() + ": segment '" + traj.segment + "' is not uniformly sampled");
      }
    }
    traj.rate_hz = 1.0 / dt;
    // Snap to a round rate when the spacing came from one.
    const double rounded = std::round(traj.rate_hz * 1e6) / 1e6;
    if (std::abs(rounded - traj.rate_hz) < 1e-6) traj.rate_hz = rounded;
    for (std::size_t i = 0; i < traj.size(); ++i) {
      if (!traj.valid[i]) traj.samples[i].setConstant(std::numeric_limits<double>::quiet_NaN());
    }
  }
  return out;
}

void write_tpl_csv(const fs::path& path, const std::vector<TplResult>& rows) {
  auto out = open_csv(path);
  out << "segment,direction,bin,tpl_mm\n";
  for (const auto& r : rows) out << r.segment << ',' << to_string(r.direction) << ',' << r.bin << ',' << r.value_mm << '\n';
}

void write_agreement(const fs::path& path, const AgreementReport& r) {
  save_json(path, json{{"bias_mm", r.bias_mm},
                       {"loa", {r.loa_low, r.loa_high}},
                       {"slope", r.slope},
                       {"intercept", r.intercept},
                       {"r2", r.r2},
                       {"n", r.n}});
}

}  // namespace swaykin::io
