#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include "test_util.hpp"
#include "zw3d/frameio.hpp"

using namespace zw3d;
using zw3d::testing::TempDir;

TEST(LoadClip, ReadsConsecutiveGrayFrames) {
  TempDir dir("load");
  const auto seq = zw3d::testing::noise_clip(64, 64, 10, 1, 3, Role::depth);
  save_clip(dir.path(), seq);
  const FrameSequence loaded = load_clip(dir.path(), Role::depth);
  EXPECT_EQ(loaded.length(), 10);
  EXPECT_EQ(loaded.width(), 64);
  EXPECT_EQ(loaded.height(), 64);
  EXPECT_EQ(loaded.frames, seq.frames);
}

TEST(LoadClip, ColorFramesDispatchToPpm) {
  TempDir dir("color");
  save_clip(dir.path(), zw3d::testing::noise_clip(16, 8, 3, 3, 5));
  EXPECT_TRUE(std::filesystem::exists(dir / "frame_000000.ppm"));
  const FrameSequence loaded = load_clip(dir.path(), Role::two_d);
  EXPECT_TRUE(loaded.is_color());
  EXPECT_EQ(loaded.width(), 16);
  EXPECT_EQ(loaded.height(), 8);
}

TEST(LoadClip, RejectsMixedDimensions) {
  TempDir dir("mixed");
  pnm::write_image(dir / "frame_000000.pgm", Image8(8, 8, 1, 10));
  pnm::write_image(dir / "frame_000001.pgm", Image8(9, 8, 1, 10));
  try {
    load_clip(dir.path(), Role::depth);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::shape);
    EXPECT_NE(std::string(e.what()).find("mixed dimensions"), std::string::npos);
  }
}

TEST(LoadClip, RejectsGapInNumbering) {
  TempDir dir("gap");
  pnm::write_image(dir / "frame_000000.pgm", Image8(8, 8, 1, 10));
  pnm::write_image(dir / "frame_000002.pgm", Image8(8, 8, 1, 10));
  EXPECT_THROW(load_clip(dir.path(), Role::depth), Error);
}

TEST(LoadClip, RejectsMissingDirectoryAndSixteenBitFrames) {
  TempDir dir("depth16");
  EXPECT_THROW(load_clip(dir / "nope", Role::two_d), Error);
  {
    std::ofstream out(dir / "frame_000000.pgm", std::ios::binary);
    out << "P5\n2 2\n65535\n" << std::string(8, '\0');
  }
  try {
    load_clip(dir.path(), Role::depth);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("bit depth"), std::string::npos);
  }
}

TEST(LoadClip, DepthRoleMustBeGray) {
  TempDir dir("depthrgb");
  save_clip(dir.path(), zw3d::testing::noise_clip(4, 4, 2, 3, 1));
  EXPECT_THROW(load_clip(dir.path(), Role::depth), Error);
}

TEST(Luminance, Rec601Weights) {
  Image8 px(3, 1, 3);
  for (int c = 0; c < 3; ++c) px.at(0, 0, c) = 255;
  px.at(2, 0, 0) = 255;
  const ImageD y = to_luminance(px);
  EXPECT_DOUBLE_EQ(y.at(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(y.at(1, 0), 0.0);
  EXPECT_NEAR(y.at(2, 0), 0.299, 1e-15);
}

TEST(NormalizeClip, OutputShapeAndRange) {
  const auto seq = zw3d::testing::noise_clip(37, 23, 7, 3, 11);
  const NormalizedClip clip = normalize_clip(seq);
  EXPECT_EQ(clip.volume.width(), 320);
  EXPECT_EQ(clip.volume.height(), 320);
  EXPECT_EQ(clip.volume.frames(), 100);
  for (double v : clip.volume.data()) {
    ASSERT_GE(v, 0.0);
    ASSERT_LE(v, 1.0);
  }
}

TEST(NormalizeClip, ConstantClipStaysConstant) {
  for (int len : {1, 13, 250}) {
    const auto seq = zw3d::testing::constant_clip(17, 31, len, 1, 0, Role::depth);
    FrameSequence half = seq;
    for (auto& f : half.frames)
      for (auto& p : f.data()) p = 255;
    // 0 and 255 give exactly 0 and 1; mid-gray checked through luminance below.
    const NormalizedClip black = normalize_clip(seq), white = normalize_clip(half);
    for (double v : black.volume.data()) ASSERT_EQ(v, 0.0);
    for (double v : white.volume.data()) ASSERT_NEAR(v, 1.0, 1e-15);
  }
  // Value 0.5 after scaling: a synthetic volume through resize + smoothing.
  ImageD img(9, 5);
  for (auto& p : img.data()) p = 0.5;
  const ImageD out = smooth_gaussian3(resize_bilinear(img, 320, 320));
  for (double v : out.data()) ASSERT_NEAR(v, 0.5, 1e-15);
}

TEST(NormalizeClip, IdentityWithoutSmoothing) {
  const auto seq = zw3d::testing::noise_clip(320, 320, 100, 1, 21, Role::depth);
  const NormalizedClip clip = normalize_clip(seq, NormalizeOptions{320, 100, false});
  for (int k = 0; k < 100; ++k)
    for (int i = 0; i < 320; i += 7)
      for (int j = 0; j < 320; ++j) ASSERT_EQ(clip.volume.at(i, j, k), seq.frames[k].at(j, i) / 255.0);
}

TEST(NormalizeClip, NearestIndexTemporalMapping) {
  // Frame k (1-based) of a 50-frame clip is constant k/50, up to 8-bit rounding.
  FrameSequence seq;
  seq.role = Role::depth;
  for (int k = 1; k <= 50; ++k) seq.frames.emplace_back(4, 4, 1, static_cast<std::uint8_t>(5 * k));
  const NormalizedClip clip = normalize_clip(seq, NormalizeOptions{8, 100, false});
  for (int kd = 1; kd <= 100; ++kd) {
    const int expected_src = (kd - 1) / 2 + 1;  // floor((k_dst-1)*50/100)+1
    EXPECT_DOUBLE_EQ(clip.volume.at(3, 3, kd - 1), 5.0 * expected_src / 255.0) << kd;
  }
}

TEST(NormalizeClip, CommutesWithHorizontalFlip) {
  const auto seq = zw3d::testing::noise_clip(45, 29, 9, 3, 4);
  FrameSequence flipped = seq;
  for (auto& f : flipped.frames) f = flip_horizontal(f);
  const NormalizedClip a = normalize_clip(seq);
  const NormalizedClip b = normalize_clip(flipped);
  for (int k = 0; k < 100; k += 3)
    for (int i = 0; i < 320; ++i)
      for (int j = 0; j < 320; ++j) ASSERT_NEAR(a.volume.at(i, 319 - j, k), b.volume.at(i, j, k), 1e-9);
}

TEST(NormalizeClip, RejectsEmptySequence) {
  FrameSequence empty;
  EXPECT_THROW(normalize_clip(empty), Error);
}
