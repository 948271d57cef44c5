#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "swaykin/error.hpp"

int main(int argc, char** argv) {
  using namespace swaykin::cli;

  CLI::App app{"swaykin: monocular postural sway estimation"};
  app.require_subcommand(1);

  CalibrateArgs cal;
  auto* calibrate = app.add_subcommand("calibrate", "Estimate camera intrinsics from checkerboard images");
  calibrate->add_option("--frames", cal.frames, "Directory of PGM checkerboard images")->required();
  calibrate->add_option("--board", cal.board, "Board descriptor JSON")->required();
  calibrate->add_option("--out", cal.out, "Output intrinsics JSON")->required();

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic sway scenario");
  simulate->add_option("--scenario", sim.scenario, "Scenario JSON")->required();
  simulate->add_option("--out", sim.out, "Output directory")->required();
  simulate->add_flag("--render-frames", sim.render_frames, "Also write PGM frames");
  simulate->add_option("--jobs", sim.jobs, "Worker threads")->check(CLI::PositiveNumber);

  TrackArgs trk;
  auto* track = app.add_subcommand("track", "Track targets and write anatomical trajectories");
  track->add_option("--config", trk.config, "Pipeline config JSON")->required();
  track->add_option("--out", trk.out, "Output directory")->required();
  track->add_option("--jobs", trk.jobs, "Worker threads")->check(CLI::PositiveNumber);
  track->add_option("--frames", trk.frames, "Frame directory (overrides the config)");
  track->add_option("--rate", trk.rate_hz, "Frame rate in Hz (overrides the config)");
  track->add_option("--max-gap", trk.max_gap_sec, "Longest gap to interpolate, seconds");
  track->add_option("--sg-window", trk.sg_window_sec, "Savitzky-Golay window, seconds");
  track->add_option("--sg-order", trk.sg_order, "Savitzky-Golay polynomial order");
  track->add_flag("--no-smooth", trk.no_smooth, "Skip Savitzky-Golay smoothing");

  AnalyzeArgs ana;
  auto* analyze = app.add_subcommand("analyze", "Total path length per stance bin");
  analyze->add_option("--traj", ana.traj, "Trajectory directory")->required();
  analyze->add_option("--compare", ana.compare, "Second condition directory for Cohen's d");
  analyze->add_option("--bins", ana.bins, "Four ascending bin edges in seconds");
  analyze->add_option("--out", ana.out, "Output directory")->required();
  analyze->add_option("--jobs", ana.jobs, "Worker threads")->check(CLI::PositiveNumber);

  AgreeArgs agr;
  auto* agree = app.add_subcommand("agree", "Bland-Altman agreement between two trajectories");
  agree->add_option("--a", agr.a, "Reference trajectory CSV")->required();
  agree->add_option("--b", agr.b, "Test trajectory CSV")->required();
  agree->add_option("--rate", agr.rate_hz, "Common resampling rate, Hz")->check(CLI::PositiveNumber);
  agree->add_option("--out", agr.out, "Output report JSON")->required();
  agree->add_option("--axis", agr.axis, "AP, ML or SI");
  agree->add_option("--segment", agr.segment, "Segment label to compare");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*calibrate) return run_calibrate(cal);
    if (*simulate) return run_simulate(sim);
    if (*track) return run_track(trk);
    if (*analyze) return run_analyze(ana);
    if (*agree) return run_agree(agr);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const swaykin::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == swaykin::ErrorCode::Io ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
