#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "test_util.hpp"
#include "zw3d/pipeline.hpp"

using namespace zw3d;
using zw3d::testing::TempDir;

namespace {

FeatureVector random_feature(std::mt19937_64& rng, Role role = Role::two_d) {
  std::normal_distribution<double> g;
  std::vector<double> raw(kFeatureBits);
  for (double& v : raw) v = g(rng);
  return zscore(raw, role);
}

FeatureVector shifted(const FeatureVector& f, double distance) {
  FeatureVector out = f;
  for (double& v : out.values) v += std::sqrt(distance);
  return out;
}

Watermark random_watermark(std::mt19937_64& rng) {
  BitMatrix m(40, 40);
  for (int r = 0; r < 40; ++r)
    for (int c = 0; c < 40; ++c) m.set(r, c, rng() & 1);
  return Watermark(m);
}

}  // namespace

TEST(FeatureDistance, Definition) {
  std::mt19937_64 rng(1);
  const FeatureVector a = random_feature(rng);
  EXPECT_EQ(feature_distance(a, a), 0.0);
  EXPECT_NEAR(feature_distance(a, shifted(a, 1.0)), 1.0, 1e-12);
  EXPECT_THROW(feature_distance(std::vector<double>(3), std::vector<double>(4)), Error);
}

TEST(FeatureDistance, CorrelationIdentity) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 50; ++t) {
    const FeatureVector a = random_feature(rng), b = random_feature(rng);
    double dot = 0;
    for (int i = 0; i < kFeatureBits; ++i) dot += a.values[i] * b.values[i];
    const double nk = kFeatureBits;
    ASSERT_NEAR(feature_distance(a, b), (2.0 * (nk - 1.0) - 2.0 * dot) / nk, 1e-10);
  }
}

TEST(FuseScores, Examples) {
  EXPECT_NEAR(fuse_scores(0.1, 0.3, 0.1), 0.10312500000000001, 1e-12);
  EXPECT_EQ(fuse_scores(0.0, 0.4), 0.0);
  EXPECT_EQ(fuse_scores(0.4, 0.0), 0.0);
  EXPECT_THROW(fuse_scores(-0.1, 0.4), Error);
  EXPECT_THROW(fuse_scores(0.1, 0.4, -1.0), Error);
  EXPECT_EQ(fused_ber(0.0, 0.2), 0.0);
  const double f = fused_ber(0.0619, 0.0628, 0.1);
  EXPECT_GE(f, 0.0619);
  EXPECT_LE(f, 0.06235);
}

TEST(FuseScores, Properties) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(1e-3, 4.0), ug(0.0, 2.0);
  for (int t = 0; t < 10000; ++t) {
    const double a = u(rng), b = u(rng), g = ug(rng);
    const double f = fuse_scores(a, b, g);
    const double hm = 2.0 / (1.0 / a + 1.0 / b);
    ASSERT_NEAR(fuse_scores(a, a, g), a, 1e-12 * a);
    ASSERT_NEAR(fuse_scores(a, b, 0.0), std::min(a, b), 1e-12 * std::max(a, b));
    ASSERT_EQ(f, fuse_scores(b, a, g));
    ASSERT_GE(f, std::min(a, b) * (1 - 1e-12));
    ASSERT_LE(f, hm * (1 + 1e-12));
    // Larger gamma moves the score towards the harmonic mean.
    ASSERT_LE(f, fuse_scores(a, b, g + 0.5) * (1 + 1e-12));
  }
}

TEST(Thresholds, Calibration) {
  EXPECT_LT(threshold_for_rate({0.8}, 0.01), 0.8);
  EXPECT_EQ(realized_rate(std::vector<double>{0.8}, threshold_for_rate({0.8}, 0.01)), 0.0);

  std::vector<double> grid;
  for (int i = 0; i <= 100; ++i) grid.push_back(1.0 + i * 0.01);
  const double t = threshold_for_rate(grid, 0.01);
  EXPECT_GT(t, grid[0]);
  EXPECT_LT(t, grid[1]);
  EXPECT_NEAR(realized_rate(grid, t), 1.0 / 101.0, 1e-12);

  const double all = threshold_for_rate(grid, 1.0);
  EXPECT_GT(all, grid.back());
  EXPECT_EQ(realized_rate(grid, all), 1.0);
  EXPECT_EQ(threshold_for_rate(grid, 0.0), 0.0);
  EXPECT_THROW(threshold_for_rate({}, 0.01), Error);
  EXPECT_THROW(threshold_for_rate(grid, 1.5), Error);
}

TEST(Thresholds, RealizedRateNeverExceedsTarget) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.1, 3.0);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> d(1 + rng() % 300);
    for (double& x : d) x = u(rng);
    const double target = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    ASSERT_LE(realized_rate(d, threshold_for_rate(d, target)), target + 1e-12);
  }
}

TEST(Thresholds, CalibrateFromFeatures) {
  std::mt19937_64 rng(5);
  std::vector<FeaturePair> clips;
  for (int i = 0; i < 12; ++i) clips.push_back({random_feature(rng), random_feature(rng, Role::depth)});
  const CalibrationReport rep = calibrate_thresholds(clips, 0.05);
  const ImpostorDistances imp = impostor_distances(clips);
  ASSERT_EQ(imp.d_2d.size(), 66u);
  EXPECT_LE(rep.realized_2d, 0.05);
  EXPECT_LE(rep.realized_fusion, 0.05);
  EXPECT_GT(rep.thresholds.t_2d, 0.0);
  const std::string csv = calibration_csv(rep);
  EXPECT_EQ(csv.rfind("threshold,value,target_pfp,realized_pfp\n", 0), 0u);
  EXPECT_NE(csv.find("T_fusion,"), std::string::npos);
  EXPECT_THROW(calibrate_thresholds(std::span<const FeaturePair>(clips.data(), 1)), Error);
}

class MatchTest : public ::testing::Test {
 protected:
  void SetUp() override {
    std::mt19937_64 rng(6);
    q2d = random_feature(rng);
    qdepth = random_feature(rng, Role::depth);
    const double dist[3] = {0.9, 0.01, 0.5};
    const char* ids[3] = {"far", "near", "mid"};
    for (int i = 0; i < 3; ++i)
      db.register_record(make_record(ids[i], {shifted(q2d, dist[i]), shifted(qdepth, dist[i])}, random_watermark(rng),
                                     random_watermark(rng)));
  }

  TempDir dir{"match"};
  Registry db = Registry::open(dir / "db.zw3d");
  FeatureVector q2d, qdepth;
};

TEST_F(MatchTest, FusedThresholdSelectsNearest) {
  const auto hits = match_query(db, q2d, qdepth, {0.0, 0.0, 0.1}, MatchMode::fused);
  ASSERT_EQ(hits.size(), 1u);
  EXPECT_EQ(hits[0].id, "near");
  EXPECT_NEAR(hits[0].d_fused, 0.01, 1e-12);
  EXPECT_EQ(hits[0].decision, Decision::match_fused);
}

TEST_F(MatchTest, ZeroThresholdsNeverMatch) {
  EXPECT_TRUE(match_query(db, q2d, qdepth, {0.0, 0.0, 0.0}, MatchMode::fused).empty());
  EXPECT_TRUE(match_query(db, q2d, qdepth, {0.0, 0.0, 0.0}, MatchMode::independent).empty());
}

TEST_F(MatchTest, SortedAscending) {
  const auto hits = match_query(db, q2d, qdepth, {0.0, 0.0, 1.0}, MatchMode::fused);
  ASSERT_EQ(hits.size(), 3u);
  EXPECT_EQ(hits[0].id, "near");
  EXPECT_EQ(hits[1].id, "mid");
  EXPECT_EQ(hits[2].id, "far");
}

TEST_F(MatchTest, IndependentModeEitherChannel) {
  // 2D alone decides.
  auto hits = match_query(db, q2d, qdepth, {0.6, 0.0, 0.0}, MatchMode::independent);
  ASSERT_EQ(hits.size(), 2u);
  EXPECT_EQ(hits[0].decision, Decision::match_2d);
  EXPECT_TRUE(hits[0].matched_2d);
  EXPECT_FALSE(hits[0].matched_depth);
  // Depth alone decides.
  hits = match_query(db, q2d, qdepth, {0.0, 0.02, 0.0}, MatchMode::independent);
  ASSERT_EQ(hits.size(), 1u);
  EXPECT_EQ(hits[0].decision, Decision::match_depth);
  EXPECT_EQ(hits[0].id, "near");
}

TEST_F(MatchTest, SelfQueryHasZeroDistance) {
  const auto& rec = db.record("mid");
  const auto hits = match_query(db, rec.fn_2d, rec.fn_depth, {0.05, 0.05, 0.05}, MatchMode::independent);
  ASSERT_EQ(hits.size(), 1u);
  EXPECT_EQ(hits[0].id, "mid");
  EXPECT_EQ(hits[0].d_2d, 0.0);
  EXPECT_EQ(hits[0].d_depth, 0.0);
}

TEST_F(MatchTest, IdentifyRecoversWatermarkForGenuineQuery) {
  const auto& rec = db.record("near");
  const IdentifyResult r = identify(db.lookup_ownership("near"), {rec.fn_2d, rec.fn_depth});
  EXPECT_EQ(r.ber_2d, 0.0);
  EXPECT_EQ(r.ber_depth, 0.0);
  EXPECT_EQ(r.recovered_2d, rec.w_2d);
}

TEST_F(MatchTest, ClosedRegistryRejected) {
  db.close();
  try {
    match_query(db, q2d, qdepth, {0.1, 0.1, 0.1}, MatchMode::fused);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::closed);
  }
}

TEST(FuseScores, HeterogeneityAndMonotonicity) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(1e-3, 4.0), frac(0.0, 1.0);
  for (int t = 0; t < 10000; ++t) {
    double s1 = u(rng), s2 = u(rng);
    if (s1 > s2) std::swap(s1, s2);
    const double eps = frac(rng) * s1;
    if (eps > 0 && s1 - eps > 0) ASSERT_GT(fuse_scores(s1, s2), fuse_scores(s1 - eps, s2 + eps));
    const double up = u(rng) * 0.1 + 1e-6;
    ASSERT_GT(fuse_scores(s1 + up, s2), fuse_scores(s1, s2));
    ASSERT_GT(fuse_scores(s1, s2 + up), fuse_scores(s1, s2));
  }
}
