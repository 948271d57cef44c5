#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace swaykin::cli {

namespace fs = std::filesystem;

/// Bad arguments or configuration; maps to exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CalibrateArgs {
  fs::path frames;
  fs::path board;
  fs::path out;
};

struct SimulateArgs {
  fs::path scenario;
  fs::path out;
  bool render_frames = false;
  int jobs = 1;
};

struct TrackArgs {
  fs::path config;
  fs::path out;
  int jobs = 1;
  std::optional<fs::path> frames;
  std::optional<double> rate_hz;
  std::optional<double> max_gap_sec;
  std::optional<double> sg_window_sec;
  std::optional<int> sg_order;
  bool no_smooth = false;
};

struct AnalyzeArgs {
  fs::path traj;
  std::optional<fs::path> compare;
  std::string bins = "0,20,40,60";
  fs::path out;
  int jobs = 1;
};

struct AgreeArgs {
  fs::path a;
  fs::path b;
  double rate_hz = 30.0;
  fs::path out;
  std::string axis = "AP";
  std::optional<std::string> segment;
};

int run_calibrate(const CalibrateArgs& args);
int run_simulate(const SimulateArgs& args);
int run_track(const TrackArgs& args);
int run_analyze(const AnalyzeArgs& args);
int run_agree(const AgreeArgs& args);

}  // namespace swaykin::cli
