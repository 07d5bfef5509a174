#include <gtest/gtest.h>

#include <random>

#include "test_util.hpp"
#include "zw3d/vss.hpp"

using namespace zw3d;
using namespace zw3d::testing;

namespace {

BitMatrix random_bits(int side, std::mt19937_64& rng) {
  BitMatrix m(side, side);
  for (int r = 0; r < side; ++r)
    for (int c = 0; c < side; ++c) m.set(r, c, rng() & 1);
  return m;
}

FeatureVector random_feature(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  FeatureVector f;
  f.values.resize(kFeatureBits);
  for (double& v : f.values) v = g(rng);
  return f;
}

int block_sum(const BitMatrix& s, int bi, int bj) {
  return s.get(2 * bi, 2 * bj) + s.get(2 * bi, 2 * bj + 1) + s.get(2 * bi + 1, 2 * bj) + s.get(2 * bi + 1, 2 * bj + 1);
}

}  // namespace

TEST(Binarize, SplitAtLowerMedian) {
  FeatureVector f;
  for (int i = 0; i < 1600; ++i) f.values.push_back(i < 800 ? -1.0 : 1.0);
  const auto bits = binarize_feature(f);
  EXPECT_EQ(std::count(bits.begin(), bits.end(), 1), 800);
  for (int i = 0; i < 1600; ++i) ASSERT_EQ(bits[i], i < 800 ? 0 : 1);

  FeatureVector mono;
  for (int i = 1; i <= 1600; ++i) mono.values.push_back(i);
  const auto mb = binarize_feature(mono);
  for (int i = 1; i <= 1600; ++i) ASSERT_EQ(mb[i - 1], i > 800 ? 1 : 0);

  FeatureVector spike{std::vector<double>(1600, 0.0)};
  spike.values[37] = 5.0;
  const auto sb = binarize_feature(spike);
  EXPECT_EQ(std::count(sb.begin(), sb.end(), 1), 1);
  EXPECT_EQ(sb[37], 1);
}

TEST(Binarize, DegenerateRejected) {
  FeatureVector f{std::vector<double>(1600, 0.0), Role::two_d, true};
  try {
    binarize_feature(f);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::degenerate);
  }
}

TEST(Rearrange, RowMajor) {
  std::vector<std::uint8_t> v(1600, 1);
  const BitMatrix ones = rearrange(v);
  EXPECT_EQ(ones.count(), 1600u);
  std::vector<std::uint8_t> first(1600, 0);
  first[0] = 1;
  const BitMatrix m = rearrange(first);
  EXPECT_EQ(m.get(0, 0), 1);
  EXPECT_EQ(m.count(), 1u);

  std::mt19937_64 rng(3);
  for (auto& b : v) b = rng() & 1;
  const BitMatrix r = rearrange(v);
  EXPECT_TRUE(std::equal(v.begin(), v.end(), r.bits().begin()));
  EXPECT_THROW(rearrange(std::vector<std::uint8_t>(1599)), Error);
}

TEST(MasterShare, BlockOrientation) {
  BitMatrix v(40, 40);
  v.set(0, 0, true);
  const Share m = build_master_share(v);
  EXPECT_EQ(m.bits.get(0, 0), 1);
  EXPECT_EQ(m.bits.get(0, 1), 0);
  EXPECT_EQ(m.bits.get(1, 0), 0);
  EXPECT_EQ(m.bits.get(1, 1), 1);
  EXPECT_EQ(m.bits.get(0, 2), 0);
  EXPECT_EQ(m.bits.get(0, 3), 1);
  EXPECT_EQ(m.bits.get(1, 2), 1);
  EXPECT_EQ(m.bits.get(1, 3), 0);

  std::mt19937_64 rng(4);
  const BitMatrix r = random_bits(40, rng);
  EXPECT_EQ(build_master_share(r.complement()).bits, build_master_share(r).bits.complement());
}

TEST(OwnershipShare, FourCases) {
  for (int vbit = 0; vbit < 2; ++vbit)
    for (int wbit = 0; wbit < 2; ++wbit) {
      const Share m = build_master_share(BitMatrix(40, 40, vbit));
      const Share o = build_ownership_share(m, Watermark(BitMatrix(40, 40, wbit)));
      // Same orientation exactly when the watermark bit is white.
      EXPECT_EQ(o.diagonal(0, 0), wbit ? m.diagonal(0, 0) : !m.diagonal(0, 0));
      const StackResult s = stack_shares(m, o);
      EXPECT_EQ(block_sum(s.bits, 0, 0), wbit ? 2 : 0);
      EXPECT_EQ(recover_watermark(s).bits.get(0, 0), wbit);
    }
}

TEST(Share, InvariantEnforced) {
  EXPECT_THROW(Share(BitMatrix(80, 80, 1), ShareKind::master), Error);
  EXPECT_THROW(Share(BitMatrix(80, 80, 0), ShareKind::ownership), Error);
  EXPECT_THROW(Share(BitMatrix(40, 40, 0), ShareKind::master), Error);
  EXPECT_THROW(Watermark(BitMatrix(41, 40)), Error);
}

TEST(RecoverWatermark, BlockSumThreshold) {
  StackResult s;
  s.bits.set(0, 0, true);
  s.bits.set(1, 1, true);
  s.bits.set(2, 2, true);  // block (1,1) sum 1
  const Watermark w = recover_watermark(s);
  EXPECT_EQ(w.bits.get(0, 0), 1);
  EXPECT_EQ(w.bits.get(1, 1), 0);
  EXPECT_EQ(w.bits.count(), 1u);
}

TEST(RoundTrip, RandomFeaturesAndWatermarks) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 200; ++t) {
    const FeatureVector fn = random_feature(rng);
    const Watermark w(random_bits(40, rng));
    const Share m = master_share_from_feature(fn);
    const Share o = build_ownership_share(m, w);
    ASSERT_EQ(recover_watermark(stack_shares(m, o)), w);
  }
}

TEST(RoundTrip, LocalityOfFeatureBitErrors) {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 100; ++t) {
    const BitMatrix v = random_bits(40, rng);
    const Watermark w(random_bits(40, rng));
    const Share o = build_ownership_share(build_master_share(v), w);
    BitMatrix q = v;
    const int flips = static_cast<int>(rng() % 50);
    for (int f = 0; f < flips; ++f) {
      const int r = static_cast<int>(rng() % 40), c = static_cast<int>(rng() % 40);
      q.set(r, c, !q.get(r, c));
    }
    const Watermark got = recover_watermark(stack_shares(build_master_share(q), o));
    // Exactly the positions where the feature bits differ are wrong.
    ASSERT_DOUBLE_EQ(ber(got, w), ber(q, v));
    for (int r = 0; r < 40; ++r)
      for (int c = 0; c < 40; ++c) ASSERT_EQ(got.bits.get(r, c) != w.bits.get(r, c), q.get(r, c) != v.get(r, c));
  }
}

TEST(Secrecy, OwnershipShareIndependentOfWatermark) {
  // 2x2 contingency of (watermark bit, ownership orientation) over random masters.
  std::mt19937_64 rng(13);
  double n[2][2] = {};
  for (int t = 0; t < 10; ++t) {
    const Share m = build_master_share(random_bits(40, rng));
    const Watermark w(random_bits(40, rng));
    const Share o = build_ownership_share(m, w);
    for (int bi = 0; bi < 40; ++bi)
      for (int bj = 0; bj < 40; ++bj) n[w.bits.get(bi, bj)][o.diagonal(bi, bj)] += 1;
  }
  const double total = n[0][0] + n[0][1] + n[1][0] + n[1][1];
  double chi2 = 0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      const double e = (n[a][0] + n[a][1]) * (n[0][b] + n[1][b]) / total;
      chi2 += (n[a][b] - e) * (n[a][b] - e) / e;
    }
  EXPECT_LT(chi2, 10.83);  // p = 0.001, one degree of freedom
  // Each orientation appears about half the time.
  EXPECT_NEAR((n[0][1] + n[1][1]) / total, 0.5, 0.02);
}

TEST(Ber, Definition) {
  std::mt19937_64 rng(14);
  const Watermark w(random_bits(40, rng));
  EXPECT_EQ(ber(w, w), 0.0);
  EXPECT_EQ(ber(w, Watermark(w.bits.complement())), 1.0);
  BitMatrix one = w.bits;
  one.set(5, 7, !one.get(5, 7));
  EXPECT_DOUBLE_EQ(ber(w, Watermark(one)), 0.000625);
}

TEST(Pbm, RoundTripAndInkConvention) {
  TempDir dir("vss");
  std::mt19937_64 rng(15);
  const BitMatrix m = random_bits(40, rng);
  write_pbm(dir.path() / "w.pbm", m);
  EXPECT_EQ(read_pbm(dir.path() / "w.pbm"), m);
  EXPECT_EQ(read_watermark(dir.path() / "w.pbm").bits, m);
  // White pixels are stored as 0 bits in P4.
  write_pbm(dir.path() / "white.pbm", BitMatrix(8, 8, 1));
  const pnm::Bitmap bm = pnm::read_bitmap(dir.path() / "white.pbm");
  EXPECT_EQ(std::count(bm.ink.begin(), bm.ink.end(), 1), 0);
  write_pbm(dir.path() / "small.pbm", BitMatrix(8, 8));
  EXPECT_THROW(read_watermark(dir.path() / "small.pbm"), Error);
}
