#pragma once

// Frame-sequence loading and the canonical luminance volume every feature is
// computed from.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "zw3d/error.hpp"
#include "zw3d/image.hpp"
#include "zw3d/pnm.hpp"

namespace zw3d {

enum class Role { two_d, depth, synthesized };

inline std::string_view to_string(Role r) {
  switch (r) {
    case Role::two_d: return "2d";
    case Role::depth: return "depth";
    case Role::synthesized: return "synthesized";
  }
  return "?";
}

struct FrameRate {
  int num = 25;
  int den = 1;
};

struct FrameSequence {
  std::vector<Image8> frames;
  Role role = Role::two_d;
  FrameRate fps;

  int length() const noexcept { return static_cast<int>(frames.size()); }
  int width() const { return frames.at(0).width(); }
  int height() const { return frames.at(0).height(); }
  bool is_color() const { return frames.at(0).channels() == 3; }
};

// Throws unless all frames share size and channel count and depth frames are gray.
inline void validate(const FrameSequence& seq) {
  require(!seq.frames.empty(), ErrorKind::shape, "empty sequence");
  const Image8& first = seq.frames.front();
  for (const Image8& f : seq.frames) {
    require(f.width() == first.width() && f.height() == first.height(), ErrorKind::shape,
            "mixed dimensions");
    require(f.channels() == first.channels(), ErrorKind::shape, "mixed channel counts");
  }
  if (seq.role == Role::depth)
    require(first.channels() == 1, ErrorKind::shape, "depth frames must be single-channel");
}

inline std::string frame_filename(int index, bool color) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%06d.%s", index, color ? "ppm" : "pgm");
  return buf;
}

inline FrameSequence load_clip(const std::filesystem::path& dir, Role role) {
  namespace fs = std::filesystem;
  require(fs::is_directory(dir), ErrorKind::io, "missing clip directory " + dir.string());

  std::map<int, fs::path> by_index;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    // frame_NNNNNN.pgm | frame_NNNNNN.ppm
    if (name.size() != 16 || name.rfind("frame_", 0) != 0) continue;
    const std::string ext = name.substr(12);
    if (ext != ".pgm" && ext != ".ppm") continue;
    int idx = -1;
    auto [p, ec] = std::from_chars(name.data() + 6, name.data() + 12, idx);
    if (ec != std::errc{} || p != name.data() + 12) continue;
    require(by_index.emplace(idx, entry.path()).second, ErrorKind::io,
            "duplicate frame index " + std::to_string(idx) + " in " + dir.string());
  }
  require(!by_index.empty(), ErrorKind::io, "no frames in " + dir.string());

  FrameSequence seq;
  seq.role = role;
  int expected = 0;
  for (const auto& [idx, path] : by_index) {
    require(idx == expected, ErrorKind::io,
            "gap in numbering at frame " + std::to_string(expected) + " in " + dir.string());
    seq.frames.push_back(pnm::read_image(path));
    ++expected;
  }
  validate(seq);
  return seq;
}

inline void save_clip(const std::filesystem::path& dir, const FrameSequence& seq) {
  validate(seq);
  std::filesystem::create_directories(dir);
  for (int k = 0; k < seq.length(); ++k)
    pnm::write_image(dir / frame_filename(k, seq.is_color()), seq.frames[k]);
}

// Rec.601 luma in [0,1]. Gray input is scaled by 1/255.
inline ImageD to_luminance(const Image8& frame) {
  ImageD out(frame.width(), frame.height());
  for (int y = 0; y < frame.height(); ++y)
    for (int x = 0; x < frame.width(); ++x) {
      if (frame.channels() == 3)
        out.at(x, y) = (0.299 * frame.at(x, y, 0) + 0.587 * frame.at(x, y, 1) + 0.114 * frame.at(x, y, 2)) / 255.0;
      else
        out.at(x, y) = frame.at(x, y) / 255.0;
    }
  return out;
}

// Half-pixel-centred bilinear resampling; same-size input is returned unchanged.
inline ImageD resize_bilinear(const ImageD& in, int out_w, int out_h) {
  ImageD out(out_w, out_h);
  const double sx_scale = static_cast<double>(in.width()) / out_w;
  const double sy_scale = static_cast<double>(in.height()) / out_h;
  auto source = [](int dst, double scale, int src_len, int& i0, int& i1, double& frac) {
    double s = (dst + 0.5) * scale - 0.5;
    s = std::clamp(s, 0.0, static_cast<double>(src_len - 1));
    i0 = static_cast<int>(std::floor(s));
    i1 = std::min(i0 + 1, src_len - 1);
    frac = s - i0;
  };
  std::vector<int> x0(out_w), x1(out_w);
  std::vector<double> fx(out_w);
  for (int x = 0; x < out_w; ++x) source(x, sx_scale, in.width(), x0[x], x1[x], fx[x]);
  for (int y = 0; y < out_h; ++y) {
    int y0, y1;
    double fy;
    source(y, sy_scale, in.height(), y0, y1, fy);
    for (int x = 0; x < out_w; ++x) {
      const double top = (1.0 - fx[x]) * in.at(x0[x], y0) + fx[x] * in.at(x1[x], y0);
      const double bottom = (1.0 - fx[x]) * in.at(x0[x], y1) + fx[x] * in.at(x1[x], y1);
      out.at(x, y) = (1.0 - fy) * top + fy * bottom;
    }
  }
  return out;
}

// 3x3 Gaussian (sigma 0.5), replicate border, result clamped to [0,1].
inline ImageD smooth_gaussian3(const ImageD& in) {
  const double side = std::exp(-1.0 / (2.0 * 0.25));
  const double norm = 1.0 + 2.0 * side;
  const double k_side = side / norm;
  const double k_mid = 1.0 / norm;
  const int w = in.width(), h = in.height();
  ImageD tmp(w, h), out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      tmp.at(x, y) = k_side * (in.at(std::max(x - 1, 0), y) + in.at(std::min(x + 1, w - 1), y)) +
                     k_mid * in.at(x, y);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double v = k_side * (tmp.at(x, std::max(y - 1, 0)) + tmp.at(x, std::min(y + 1, h - 1))) +
                       k_mid * tmp.at(x, y);
      out.at(x, y) = std::clamp(v, 0.0, 1.0);
    }
  return out;
}

struct NormalizeOptions {
  int size = 320;
  int frames = 100;
  bool smoothing = true;  // off only for exact-identity checks
};

struct NormalizedClip {
  Volume volume;
  Role role = Role::two_d;
};

// Source frame (0-based) feeding output frame k_dst (0-based): nearest index.
inline int temporal_source(int k_dst, int src_len, int dst_len) {
  return static_cast<int>((static_cast<long long>(k_dst) * src_len) / dst_len);
}

inline NormalizedClip normalize_clip(const FrameSequence& seq, const NormalizeOptions& opt = {}) {
  require(!seq.frames.empty(), ErrorKind::shape, "empty sequence");
  validate(seq);
  NormalizedClip clip{Volume(opt.size, opt.size, opt.frames), seq.role};
  int cached_src = -1;
  ImageD cached;
  for (int k = 0; k < opt.frames; ++k) {
    const int src = temporal_source(k, seq.length(), opt.frames);
    if (src != cached_src) {
      cached = resize_bilinear(to_luminance(seq.frames[src]), opt.size, opt.size);
      if (opt.smoothing) cached = smooth_gaussian3(cached);
      cached_src = src;
    }
    std::copy(cached.data().begin(), cached.data().end(), clip.volume.frame(k).begin());
  }
  return clip;
}

}  // namespace zw3d
