#pragma once

// Procedural DIBR clips for tests and desk-scale evaluation: a panning
// sinusoidal texture with a few moving textured ellipses, and a matching
// depth map (smooth background ramp, flat nearer objects).

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "zw3d/frameio.hpp"
#include "zw3d/vss.hpp"

namespace zw3d {

struct CorpusOptions {
  int clips = 20;
  int frames = 64;
  int width = 128;
  int height = 128;
  std::uint64_t seed = 7;
};

struct SyntheticClip {
  std::string id;
  FrameSequence two_d;
  FrameSequence depth;
  Watermark w_2d;
  Watermark w_depth;
};

namespace corpus_detail {

struct Wave {
  double fx, fy, phase, amp;
};

struct Blob {
  double x, y, vx, vy, rx, ry, angle;
  double color[3];
  double stripe_freq, stripe_phase;
  double depth;
};

inline Watermark random_watermark(std::mt19937_64& rng) {
  std::bernoulli_distribution coin(0.5);
  BitMatrix m(kWatermarkSide, kWatermarkSide);
  for (int i = 0; i < kWatermarkSide; ++i)
    for (int j = 0; j < kWatermarkSide; ++j) m.set(i, j, coin(rng));
  return Watermark(std::move(m));
}

inline std::uint8_t quantize(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

}  // namespace corpus_detail

inline std::string clip_id(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "clip_%03d", index);
  return buf;
}

inline SyntheticClip generate_clip(int index, const CorpusOptions& opt) {
  using namespace corpus_detail;
  std::mt19937_64 rng(opt.seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(index));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double two_pi = 2.0 * std::numbers::pi;
  const int w = opt.width, h = opt.height;

  std::vector<Wave> waves[3];
  for (auto& channel : waves)
    for (int n = 0; n < 5; ++n) {
      const double freq = 0.01 + 0.07 * u(rng), dir = two_pi * u(rng);
      channel.push_back({freq * std::cos(dir), freq * std::sin(dir), two_pi * u(rng), 0.05 + 0.1 * u(rng)});
    }
  const double base[3] = {0.25 + 0.5 * u(rng), 0.25 + 0.5 * u(rng), 0.25 + 0.5 * u(rng)};
  const double pan_x = u(rng) - 0.5, pan_y = u(rng) - 0.5;

  const double ramp_dir = two_pi * u(rng);
  const double ramp_lo = 0.1 + 0.2 * u(rng), ramp_span = 0.1 + 0.25 * u(rng);

  std::vector<Blob> blobs(3 + static_cast<int>(u(rng) * 3));
  for (auto& b : blobs) {
    b.rx = 0.06 * w + 0.16 * w * u(rng);
    b.ry = 0.06 * h + 0.16 * h * u(rng);
    b.x = b.rx + (w - 2 * b.rx) * u(rng);
    b.y = b.ry + (h - 2 * b.ry) * u(rng);
    const double speed = 0.5 + 1.5 * u(rng), dir = two_pi * u(rng);
    b.vx = speed * std::cos(dir);
    b.vy = speed * std::sin(dir);
    b.angle = std::numbers::pi * u(rng);
    for (double& c : b.color) c = u(rng);
    b.stripe_freq = 0.05 + 0.2 * u(rng);
    b.stripe_phase = two_pi * u(rng);
    b.depth = 0.6 + 0.35 * u(rng);
  }

  SyntheticClip clip;
  clip.id = clip_id(index);
  clip.two_d.role = Role::two_d;
  clip.depth.role = Role::depth;
  for (int t = 0; t < opt.frames; ++t) {
    Image8 rgb(w, h, 3), dep(w, h, 1);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const double px = x + pan_x * t, py = y + pan_y * t;
        double c[3];
        for (int ch = 0; ch < 3; ++ch) {
          c[ch] = base[ch];
          for (const auto& wv : waves[ch]) c[ch] += wv.amp * std::sin(two_pi * (wv.fx * px + wv.fy * py) + wv.phase);
        }
        const double along = ((x - w / 2.0) * std::cos(ramp_dir) + (y - h / 2.0) * std::sin(ramp_dir)) / w + 0.5;
        double d = ramp_lo + ramp_span * along;
        for (const auto& b : blobs) {
          const double dx = x - b.x, dy = y - b.y;
          const double ex = (dx * std::cos(b.angle) + dy * std::sin(b.angle)) / b.rx;
          const double ey = (-dx * std::sin(b.angle) + dy * std::cos(b.angle)) / b.ry;
          if (ex * ex + ey * ey > 1.0 || b.depth <= d) continue;
          const double stripe = 0.75 + 0.25 * std::sin(two_pi * b.stripe_freq * (dx + dy) + b.stripe_phase);
          for (int ch = 0; ch < 3; ++ch) c[ch] = b.color[ch] * stripe;
          d = b.depth;
        }
        for (int ch = 0; ch < 3; ++ch) rgb.at(x, y, ch) = quantize(c[ch]);
        dep.at(x, y) = quantize(d);
      }
    clip.two_d.frames.push_back(std::move(rgb));
    clip.depth.frames.push_back(std::move(dep));
    // Advance blobs, bouncing off the frame edges.
    for (auto& b : blobs) {
      b.x += b.vx;
      b.y += b.vy;
      if (b.x < 0 || b.x > w) b.vx = -b.vx;
      if (b.y < 0 || b.y > h) b.vy = -b.vy;
    }
  }
  clip.w_2d = random_watermark(rng);
  clip.w_depth = random_watermark(rng);
  return clip;
}

inline std::vector<SyntheticClip> generate_corpus(const CorpusOptions& opt) {
  std::vector<SyntheticClip> out;
  out.reserve(opt.clips);
  for (int i = 0; i < opt.clips; ++i) out.push_back(generate_clip(i, opt));
  return out;
}

// <dir>/<id>/{2d,depth}/frame_NNNNNN.*, <dir>/<id>/wm_2d.pbm, wm_depth.pbm
inline void write_clip(const std::filesystem::path& dir, const SyntheticClip& clip) {
  const auto root = dir / clip.id;
  save_clip(root / "2d", clip.two_d);
  save_clip(root / "depth", clip.depth);
  write_pbm(root / "wm_2d.pbm", clip.w_2d.bits);
  write_pbm(root / "wm_depth.pbm", clip.w_depth.bits);
}

inline SyntheticClip read_clip(const std::filesystem::path& clip_dir) {
  SyntheticClip clip;
  clip.id = clip_dir.filename().string();
  clip.two_d = load_clip(clip_dir / "2d", Role::two_d);
  clip.depth = load_clip(clip_dir / "depth", Role::depth);
  clip.w_2d = read_watermark(clip_dir / "wm_2d.pbm");
  clip.w_depth = read_watermark(clip_dir / "wm_depth.pbm");
  return clip;
}

// Clip directories of a corpus, sorted by name.
inline std::vector<std::filesystem::path> corpus_clip_dirs(const std::filesystem::path& dir) {
  require(std::filesystem::is_directory(dir), ErrorKind::io, "missing corpus directory " + dir.string());
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.is_directory() && std::filesystem::is_directory(e.path() / "2d")) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace zw3d
