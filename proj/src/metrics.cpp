#include "swaykin/metrics.hpp"

#include <cmath>
#include <numeric>

#include "swaykin/error.hpp"

namespace swaykin {

std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::AP: return "AP";
    case Direction::ML: return "ML";
    case Direction::SI: return "SI";
    case Direction::APML: return "APML";
    case Direction::APSI: return "APSI";
    case Direction::MLSI: return "MLSI";
  }
  return "?";
}

Direction parse_direction(std::string_view s) {
  for (Direction d : kAllDirections) {
    if (to_string(d) == s) return d;
  }
  throw Error(ErrorCode::InvalidInput, "unknown direction '" + std::string(s) + "'");
}

StanceBins StanceBins::from_edges(std::span<const double> edges) {
  if (edges.size() != 4) throw Error(ErrorCode::InvalidInput, "stance bins need exactly four edges");
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    if (!(edges[i] < edges[i + 1])) throw Error(ErrorCode::InvalidInput, "bin edges must be ascending");
  }
  StanceBins b;
  for (std::size_t i = 0; i < 3; ++i) b.bins[i] = {edges[i], edges[i + 1]};
  return b;
}

namespace {

// The selected coordinates; a 1D direction leaves the second one at zero.
Eigen::Vector2d project(const Eigen::Vector3d& s, Direction d) {
  switch (d) {
    case Direction::AP: return {s[0], 0.0};
    case Direction::ML: return {s[1], 0.0};
    case Direction::SI: return {s[2], 0.0};
    case Direction::APML: return {s[0], s[1]};
    case Direction::APSI: return {s[0], s[2]};
    case Direction::MLSI: return {s[1], s[2]};
  }
  return {0.0, 0.0};
}

struct PathSum {
  double length = 0.0;
  std::size_t valid_in_bin = 0;
  std::size_t excluded = 0;
};

PathSum path_sum(const SwayTrajectory& traj, Direction direction, const TimeInterval& bin) {
  traj.validate();
  PathSum out;
  const std::size_t n = traj.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (!bin.contains(traj.time(i))) continue;
    if (traj.valid[i]) ++out.valid_in_bin;
    if (i + 1 >= n) continue;
    if (!traj.valid[i] || !traj.valid[i + 1]) {
      ++out.excluded;
      continue;
    }
    out.length += (project(traj.samples[i + 1], direction) - project(traj.samples[i], direction)).norm();
  }
  return out;
}

}  // namespace

double total_path_length(const SwayTrajectory& traj, Direction direction, const TimeInterval& bin) {
  const PathSum s = path_sum(traj, direction, bin);
  if (s.valid_in_bin < 2) {
    throw Error(ErrorCode::InvalidInput, "fewer than two valid samples in [" + std::to_string(bin.begin) + ", " +
                                             std::to_string(bin.end) + ")");
  }
  return s.length;
}

std::vector<TplResult> tpl_table(const SwayTrajectory& traj, const StanceBins& bins) {
  std::vector<TplResult> out;
  for (Direction d : kAllDirections) {
    for (std::size_t b = 0; b < 3; ++b) {
      const PathSum s = path_sum(traj, d, bins.bins[b]);
      if (s.valid_in_bin < 2) {
        throw Error(ErrorCode::InvalidInput, "segment '" + traj.segment + "' has fewer than two valid samples in bin " +
                                                 bins.labels[b]);
      }
      out.push_back({traj.segment, d, bins.labels[b], s.length, s.excluded});
    }
  }
  return out;
}

BinnedTrajectory bin_trajectory(const SwayTrajectory& traj, const StanceBins& bins) {
  traj.validate();
  BinnedTrajectory out;
  for (std::size_t b = 0; b < 3; ++b) {
    auto& part = out.parts[b];
    part.segment = traj.segment;
    part.rate_hz = traj.rate_hz;
    bool first = true;
    for (std::size_t i = 0; i < traj.size(); ++i) {
      const double t = traj.time(i);
      if (!bins.bins[b].contains(t)) continue;
      if (first) {
        part.t0 = t;
        first = false;
      }
      part.samples.push_back(traj.samples[i]);
      part.valid.push_back(traj.valid[i]);
    }
    out.counts[b] = part.samples.size();
    const auto expected = static_cast<std::size_t>(std::llround(bins.bins[b].length() * traj.rate_hz));
    if (out.counts[b] < expected) {
      out.warnings.push_back("bin '" + bins.labels[b] + "' holds " + std::to_string(out.counts[b]) + " of " +
                             std::to_string(expected) + " expected samples");
    }
  }
  return out;
}

Eigen::MatrixXd cousineau_morey(const Eigen::MatrixXd& values) {
  if (values.cols() < 2) throw Error(ErrorCode::InvalidInput, "need at least two conditions");
  if (values.rows() < 1) throw Error(ErrorCode::InvalidInput, "need at least one participant");
  if (!values.allFinite()) throw Error(ErrorCode::InvalidInput, "matrix has missing cells");
  const double grand = values.mean();
  Eigen::MatrixXd out = values;
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    out.row(i).array() += grand - values.row(i).mean();
  }
  return out;
}

Eigen::VectorXd morey_sem(const Eigen::MatrixXd& normalized) {
  const auto n = static_cast<double>(normalized.rows());
  const auto c = static_cast<double>(normalized.cols());
  if (normalized.rows() < 2 || normalized.cols() < 2) {
    throw Error(ErrorCode::InvalidInput, "need at least two participants and two conditions");
  }
  const double correction = std::sqrt(c / (c - 1.0));
  Eigen::VectorXd sem(normalized.cols());
  for (Eigen::Index j = 0; j < normalized.cols(); ++j) {
    const Eigen::VectorXd col = normalized.col(j);
    const double m = col.mean();
    const double var = (col.array() - m).square().sum() / (n - 1.0);
    sem[j] = correction * std::sqrt(var) / std::sqrt(n);
  }
  return sem;
}

double mean(std::span<const double> x) {
  if (x.empty()) throw Error(ErrorCode::InvalidInput, "mean of an empty sample");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double sample_sd(std::span<const double> x) {
  if (x.size() < 2) throw Error(ErrorCode::InvalidInput, "standard deviation needs at least two values");
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

double cohens_d(const SampleSummary& a, const SampleSummary& b) {
  if (a.n < 2 || b.n < 2) throw Error(ErrorCode::InvalidInput, "each sample needs at least two values");
  double pooled;
  if (a.n == b.n) {
    pooled = std::sqrt(0.5 * (a.sd * a.sd + b.sd * b.sd));
  } else {
    const auto na = static_cast<double>(a.n), nb = static_cast<double>(b.n);
    pooled = std::sqrt(((na - 1.0) * a.sd * a.sd + (nb - 1.0) * b.sd * b.sd) / (na + nb - 2.0));
  }
  if (!(pooled > 0.0)) throw Error(ErrorCode::InvalidInput, "pooled standard deviation is zero");
  return (b.mean - a.mean) / pooled;
}

double cohens_d(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw Error(ErrorCode::InvalidInput, "each sample needs at least two values");
  return cohens_d(SampleSummary{mean(a), sample_sd(a), a.size()}, SampleSummary{mean(b), sample_sd(b), b.size()});
}

AgreementReport bland_altman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::InvalidInput, "paired series differ in length");
  if (a.size() < 3) throw Error(ErrorCode::InvalidInput, "need at least three pairs");
  const std::size_t n = a.size();
  std::vector<double> diff(n);
  for (std::size_t i = 0; i < n; ++i) diff[i] = b[i] - a[i];

  AgreementReport r;
  r.n = n;
  r.bias_mm = mean(diff);
  r.sd_mm = sample_sd(diff);
  r.loa_low = r.bias_mm - 1.96 * r.sd_mm;
  r.loa_high = r.bias_mm + 1.96 * r.sd_mm;

  const double ma = mean(a);
  const double mb = mean(b);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (a[i] - ma) * (a[i] - ma);
    sxy += (a[i] - ma) * (b[i] - mb);
    syy += (b[i] - mb) * (b[i] - mb);
  }
  if (!(sxx > 0.0)) throw Error(ErrorCode::InvalidInput, "reference series has zero variance");
  r.slope = sxy / sxx;
  r.intercept = mb - r.slope * ma;
  r.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return r;
}

}  // namespace swaykin
