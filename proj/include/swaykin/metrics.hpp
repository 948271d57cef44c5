#pragma once

#include <Eigen/Core>
#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "swaykin/anatomy.hpp"

namespace swaykin {

enum class Direction { AP, ML, SI, APML, APSI, MLSI };

inline constexpr std::array<Direction, 6> kAllDirections = {Direction::AP,   Direction::ML,   Direction::SI,
                                                            Direction::APML, Direction::APSI, Direction::MLSI};

std::string_view to_string(Direction d);
Direction parse_direction(std::string_view s);

/// Half-open interval [begin, end) in stance seconds.
struct TimeInterval {
  double begin = 0.0;
  double end = 0.0;
  bool contains(double t) const noexcept { return t >= begin && t < end; }
  double length() const noexcept { return end - begin; }
};

struct StanceBins {
  std::array<TimeInterval, 3> bins{{{0.0, 20.0}, {20.0, 40.0}, {40.0, 60.0}}};
  std::array<std::string, 3> labels{{"early", "mid", "late"}};

  /// Four ascending edges. Throws InvalidInput otherwise.
  static StanceBins from_edges(std::span<const double> edges);
  TimeInterval total() const { return {bins[0].begin, bins[2].end}; }
};

/// Path length of the trajectory projected on `direction`, summing steps
/// i -> i+1 whose left sample lies in `bin` and whose endpoints are both
/// valid. Throws InvalidInput with fewer than 2 valid samples in the bin.
double total_path_length(const SwayTrajectory& traj, Direction direction, const TimeInterval& bin);

struct TplResult {
  std::string segment;
  Direction direction;
  std::string bin;
  double value_mm;
  std::size_t excluded_steps;  // steps dropped because an endpoint was invalid
};

std::vector<TplResult> tpl_table(const SwayTrajectory& traj, const StanceBins& bins);

struct BinnedTrajectory {
  std::array<SwayTrajectory, 3> parts;
  std::array<std::size_t, 3> counts{};
  std::vector<std::string> warnings;
};

/// Splits by half-open bin membership of sample times; warns when a bin
/// holds fewer samples than its length implies.
BinnedTrajectory bin_trajectory(const SwayTrajectory& traj, const StanceBins& bins);

/// Removes between-participant offsets: x'_ij = x_ij - mean_i + grand mean.
/// Rows are participants, columns conditions. Throws InvalidInput on NaN
/// cells or fewer than 2 conditions.
Eigen::MatrixXd cousineau_morey(const Eigen::MatrixXd& values);

/// Per-condition SEM of normalized data with the Morey sqrt(C / (C - 1)) correction.
Eigen::VectorXd morey_sem(const Eigen::MatrixXd& normalized);

/// (mean_b - mean_a) / pooled SD. Throws InvalidInput for samples with fewer
/// than 2 values or zero pooled SD.
double cohens_d(std::span<const double> a, std::span<const double> b);

struct SampleSummary {
  double mean;
  double sd;
  std::size_t n;
};
double cohens_d(const SampleSummary& a, const SampleSummary& b);

struct AgreementReport {
  double bias_mm = 0.0;
  double sd_mm = 0.0;
  double loa_low = 0.0;
  double loa_high = 0.0;
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t n = 0;
};

/// Bland-Altman on differences b - a (limits bias +- 1.96 SD) plus ordinary
/// least squares of b on a.
AgreementReport bland_altman(std::span<const double> a, std::span<const double> b);

double mean(std::span<const double> x);
double sample_sd(std::span<const double> x);

}  // namespace swaykin
