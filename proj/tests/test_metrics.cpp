#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "swaykin/error.hpp"
#include "swaykin/metrics.hpp"

using namespace swaykin;

namespace {

SwayTrajectory make(const std::vector<Eigen::Vector3d>& samples, double rate = 30.0) {
  SwayTrajectory s;
  s.segment = "seg";
  s.rate_hz = rate;
  s.samples = samples;
  s.valid.assign(samples.size(), true);
  return s;
}

SwayTrajectory random_walk(std::mt19937_64& rng, std::size_t n, double rate = 30.0) {
  std::normal_distribution<double> step(0.0, 0.5);
  std::vector<Eigen::Vector3d> s{Eigen::Vector3d::Zero()};
  while (s.size() < n) s.push_back(s.back() + Eigen::Vector3d(step(rng), step(rng), step(rng)));
  return make(s, rate);
}

// Direct re-summation, written independently of the library's projection.
double brute_tpl(const SwayTrajectory& t, Direction d, const TimeInterval& bin) {
  int a = -1, b = -1;
  switch (d) {
    case Direction::AP: a = 0; break;
    case Direction::ML: a = 1; break;
    case Direction::SI: a = 2; break;
    case Direction::APML: a = 0, b = 1; break;
    case Direction::APSI: a = 0, b = 2; break;
    case Direction::MLSI: a = 1, b = 2; break;
  }
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    if (!bin.contains(t.time(i)) || !t.valid[i] || !t.valid[i + 1]) continue;
    const double dx = t.samples[i + 1][a] - t.samples[i][a];
    const double dy = b < 0 ? 0.0 : t.samples[i + 1][b] - t.samples[i][b];
    sum += std::sqrt(dx * dx + dy * dy);
  }
  return sum;
}

SwayTrajectory sinusoid_ap(double amp, double freq, double duration, double rate = 30.0) {
  std::vector<Eigen::Vector3d> s;
  const auto n = static_cast<std::size_t>(std::llround(duration * rate)) + 1;
  for (std::size_t i = 0; i < n; ++i) s.emplace_back(amp * std::sin(2.0 * M_PI * freq * i / rate), 0.0, 0.0);
  return make(s, rate);
}

}  // namespace

TEST(Tpl, StationaryIsZero) {
  const auto t = make(std::vector<Eigen::Vector3d>(100, Eigen::Vector3d(1, 2, 3)));
  for (Direction d : kAllDirections) EXPECT_EQ(total_path_length(t, d, {0, 60}), 0.0);
}

TEST(Tpl, ThreeFourFive) {
  const auto t = make({Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(3, 4, 0)});
  EXPECT_DOUBLE_EQ(total_path_length(t, Direction::APML, {0, 60}), 5.0);
  EXPECT_DOUBLE_EQ(total_path_length(t, Direction::AP, {0, 60}), 3.0);
  EXPECT_DOUBLE_EQ(total_path_length(t, Direction::ML, {0, 60}), 4.0);
}

TEST(Tpl, SinusoidAnalyticArcLength) {
  const auto t = sinusoid_ap(10.0, 0.3, 20.0);
  const double tpl = total_path_length(t, Direction::AP, {0, 20});
  EXPECT_NEAR(tpl, 240.0, 2.4);
}

TEST(Tpl, MatchesBruteForceOnRandomWalks) {
  std::mt19937_64 rng(20);
  for (int trial = 0; trial < 50; ++trial) {
    auto t = random_walk(rng, 1800);
    std::bernoulli_distribution drop(0.02);
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (drop(rng)) {
        t.valid[i] = false;
        t.samples[i] = Eigen::Vector3d::Constant(std::nan(""));
      }
    }
    for (Direction d : kAllDirections) {
      for (const TimeInterval& bin : StanceBins{}.bins) {
        const double ref = brute_tpl(t, d, bin);
        EXPECT_NEAR(total_path_length(t, d, bin), ref, 1e-12 * std::max(1.0, ref));
      }
    }
  }
}

TEST(Tpl, TooFewValidSamples) {
  const auto t = make({Eigen::Vector3d(0, 0, 0)});
  EXPECT_THROW(total_path_length(t, Direction::AP, {0, 60}), Error);
  const auto u = make(std::vector<Eigen::Vector3d>(10, Eigen::Vector3d::Zero()));
  EXPECT_THROW(total_path_length(u, Direction::AP, {40, 60}), Error);
}

TEST(Tpl, BinsAddUpToTotal) {
  std::mt19937_64 rng(21);
  const auto t = random_walk(rng, 1800);
  for (Direction d : kAllDirections) {
    double parts = 0.0;
    for (const auto& bin : StanceBins{}.bins) parts += total_path_length(t, d, bin);
    EXPECT_NEAR(parts, total_path_length(t, d, {0, 60}), 1e-9);
  }
}

TEST(Tpl, PlanarTriangleInequalityAndConstantAxis) {
  std::mt19937_64 rng(22);
  auto t = random_walk(rng, 600);
  const TimeInterval all{0, 60};
  EXPECT_LE(total_path_length(t, Direction::APML, all),
            total_path_length(t, Direction::AP, all) + total_path_length(t, Direction::ML, all) + 1e-9);
  for (auto& s : t.samples) s[1] = 7.0;
  EXPECT_DOUBLE_EQ(total_path_length(t, Direction::APML, all), total_path_length(t, Direction::AP, all));
}

TEST(Tpl, TableCoversEveryDirectionAndBin) {
  std::mt19937_64 rng(23);
  const auto t = random_walk(rng, 1800);
  const auto table = tpl_table(t, StanceBins{});
  ASSERT_EQ(table.size(), 18u);
  EXPECT_EQ(table[0].bin, "early");
  EXPECT_EQ(table[0].segment, "seg");
}

TEST(Bins, CountsAndHalfOpenBoundary) {
  const auto t = make(std::vector<Eigen::Vector3d>(1800, Eigen::Vector3d::Zero()));
  const auto b = bin_trajectory(t, StanceBins{});
  EXPECT_EQ(b.counts[0], 600u);
  EXPECT_EQ(b.counts[1], 600u);
  EXPECT_EQ(b.counts[2], 600u);
  EXPECT_TRUE(b.warnings.empty());
  EXPECT_DOUBLE_EQ(b.parts[1].t0, 20.0);
}

TEST(Bins, ShortTrajectoryWarns) {
  const auto t = make(std::vector<Eigen::Vector3d>(1500, Eigen::Vector3d::Zero()));
  const auto b = bin_trajectory(t, StanceBins{});
  EXPECT_EQ(b.counts[2], 300u);
  EXPECT_FALSE(b.warnings.empty());
}

TEST(Bins, FromEdges) {
  const double good[] = {0, 10, 30, 45};
  const auto b = StanceBins::from_edges(good);
  EXPECT_DOUBLE_EQ(b.bins[1].begin, 10.0);
  EXPECT_DOUBLE_EQ(b.total().end, 45.0);
  const double bad[] = {0, 30, 10, 45};
  EXPECT_THROW(StanceBins::from_edges(bad), Error);
  const double few[] = {0, 30, 45};
  EXPECT_THROW(StanceBins::from_edges(few), Error);
}

TEST(Direction, RoundTripNames) {
  for (Direction d : kAllDirections) EXPECT_EQ(parse_direction(to_string(d)), d);
  EXPECT_THROW(parse_direction("XY"), Error);
}

TEST(CousineauMorey, IdenticalParticipantsUnchanged) {
  Eigen::MatrixXd m(4, 2);
  m << 1, 2, 1, 2, 1, 2, 1, 2;
  EXPECT_LT((cousineau_morey(m) - m).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(CousineauMorey, OffsetRemoved) {
  Eigen::MatrixXd m(3, 2);
  m << 1, 2, 1, 2, 11, 12;
  const Eigen::MatrixXd n = cousineau_morey(m);
  EXPECT_LT((n.row(0) - n.row(2)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((n.colwise().mean() - m.colwise().mean()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(CousineauMorey, RandomMatrixProperties) {
  std::mt19937_64 rng(24);
  std::normal_distribution<double> n(150.0, 30.0);
  Eigen::MatrixXd m(14, 2);
  for (int i = 0; i < 14; ++i)
    for (int j = 0; j < 2; ++j) m(i, j) = n(rng);
  const Eigen::MatrixXd c = cousineau_morey(m);
  EXPECT_LT((c.colwise().mean() - m.colwise().mean()).cwiseAbs().maxCoeff(), 1e-12);
  const Eigen::VectorXd rows = c.rowwise().mean();
  EXPECT_LT((rows.array() - rows.mean()).abs().maxCoeff(), 1e-12);
}

TEST(CousineauMorey, MoreySemCorrection) {
  Eigen::MatrixXd m(4, 2);
  m << 1, 3, 2, 5, 3, 4, 4, 8;
  const Eigen::MatrixXd c = cousineau_morey(m);
  const Eigen::VectorXd sem = morey_sem(c);
  for (int j = 0; j < 2; ++j) {
    const double mu = c.col(j).mean();
    const double var = (c.col(j).array() - mu).square().sum() / 3.0;
    EXPECT_NEAR(sem[j], std::sqrt(var * 2.0) / 2.0, 1e-12);
  }
}

TEST(CousineauMorey, Errors) {
  Eigen::MatrixXd one(3, 1);
  one << 1, 2, 3;
  EXPECT_THROW(cousineau_morey(one), Error);
  Eigen::MatrixXd nan(2, 2);
  nan << 1, 2, std::nan(""), 4;
  EXPECT_THROW(cousineau_morey(nan), Error);
}

TEST(CohensD, IdenticalIsZero) {
  const std::vector<double> a{1, 2, 3, 4};
  EXPECT_EQ(cohens_d(a, a), 0.0);
}

TEST(CohensD, PaperTableAnchor) {
  const double n = 14.0;
  const double d = cohens_d(SampleSummary{147.1, 5.9 * std::sqrt(n), 14}, SampleSummary{177.8, 11.1 * std::sqrt(n), 14});
  EXPECT_NEAR(d, 0.92, 0.02);
}

TEST(CohensD, ShiftAndSwap) {
  std::mt19937_64 rng(25);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> a(14), b(14);
  for (auto& v : a) v = n(rng);
  for (auto& v : b) v = n(rng) + 0.5;
  const double d = cohens_d(a, b);
  EXPECT_EQ(cohens_d(b, a), -d);
  const double sd = std::sqrt((sample_sd(a) * sample_sd(a) + sample_sd(b) * sample_sd(b)) / 2.0);
  std::vector<double> b2 = b;
  for (auto& v : b2) v += 2.0;
  EXPECT_NEAR(cohens_d(a, b2), d + 2.0 / sd, 1e-12);
  EXPECT_NEAR(d, (mean(b) - mean(a)) / sd, 1e-12);
}

TEST(CohensD, UnequalSizesUsePooledVariance) {
  const std::vector<double> a{1, 2, 3}, b{2, 4, 6, 8, 10};
  const double sa = sample_sd(a), sb = sample_sd(b);
  const double pooled = std::sqrt((2 * sa * sa + 4 * sb * sb) / 6.0);
  EXPECT_NEAR(cohens_d(a, b), (6.0 - 2.0) / pooled, 1e-12);
}

TEST(CohensD, Errors) {
  const std::vector<double> one{1}, c{2, 2, 2};
  EXPECT_THROW(cohens_d(one, c), Error);
  EXPECT_THROW(cohens_d(c, c), Error);
}

TEST(BlandAltman, Identical) {
  const std::vector<double> a{1, 2, 3, 5, 8};
  const auto r = bland_altman(a, a);
  EXPECT_EQ(r.bias_mm, 0.0);
  EXPECT_EQ(r.loa_low, 0.0);
  EXPECT_EQ(r.loa_high, 0.0);
  EXPECT_NEAR(r.slope, 1.0, 1e-12);
  EXPECT_NEAR(r.r2, 1.0, 1e-12);
  EXPECT_EQ(r.n, 5u);
}

TEST(BlandAltman, ConstantOffset) {
  const std::vector<double> a{1, 2, 3, 5, 8};
  std::vector<double> b = a;
  for (auto& v : b) v += 0.3;
  const auto r = bland_altman(a, b);
  EXPECT_NEAR(r.bias_mm, 0.3, 1e-12);
  EXPECT_NEAR(r.loa_high - r.loa_low, 0.0, 1e-12);
  EXPECT_NEAR(r.slope, 1.0, 1e-12);
  EXPECT_NEAR(r.intercept, 0.3, 1e-12);
}

TEST(BlandAltman, PaperEnvelopeNoise) {
  std::mt19937_64 rng(26);
  std::normal_distribution<double> noise(0.0, 0.265);
  std::vector<double> a, b;
  for (int i = 0; i < 1800; ++i) {
    a.push_back(10.0 * std::sin(2.0 * M_PI * 0.3 * i / 30.0));
    b.push_back(a.back() + noise(rng));
  }
  const auto r = bland_altman(a, b);
  EXPECT_LT(std::abs(r.bias_mm), 0.02);
  EXPECT_NEAR(r.loa_high, 0.52, 0.03);
  EXPECT_NEAR(r.loa_low, -0.52, 0.03);
  EXPECT_LE(r.loa_low, r.bias_mm);
  EXPECT_LE(r.bias_mm, r.loa_high);
  EXPECT_GT(r.r2, 0.99);
}

TEST(BlandAltman, Errors) {
  const std::vector<double> a{1, 2, 3}, b{1, 2}, c{4, 4, 4};
  EXPECT_THROW(bland_altman(a, b), Error);
  EXPECT_THROW(bland_altman(b, b), Error);
  EXPECT_THROW(bland_altman(c, a), Error);
}
