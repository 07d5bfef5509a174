#pragma once

// Depth-image-based rendering with a horizontal-shift warp.
//
// Each pixel gets the signed disparity p = round(B*w/2 * (depth - c)) where B
// is the baseline as a fraction of frame width and c the convergence depth.
// The left view moves pixels to x + p, the right view to x - p. Larger depth
// values are nearer and win collisions; holes take the value of whichever
// horizontal neighbour lies further back.

#include <cmath>
#include <utility>
#include <vector>

#include "zw3d/error.hpp"
#include "zw3d/frameio.hpp"
#include "zw3d/image.hpp"

namespace zw3d {

struct BaselineConfig {
  double baseline_fraction = 0.05;
  double convergence_depth = 0.5;

  void validate() const {
    require(baseline_fraction > 0.0 && baseline_fraction <= 0.1, ErrorKind::invalid_argument,
            "baseline fraction must lie in (0, 0.1]");
    require(convergence_depth >= 0.0 && convergence_depth <= 1.0, ErrorKind::invalid_argument,
            "convergence depth must lie in [0, 1]");
  }
};

inline int disparity(std::uint8_t depth, int width, const BaselineConfig& cfg) {
  const double half = cfg.baseline_fraction * width / 2.0;
  return static_cast<int>(std::lround(half * (depth / 255.0 - cfg.convergence_depth)));
}

namespace detail {

// direction +1 renders the left view, -1 the right view.
inline Image8 warp_view(const Image8& frame, const Image8& depth, const BaselineConfig& cfg, int direction) {
  const int w = frame.width(), h = frame.height(), ch = frame.channels();
  Image8 out(w, h, ch);
  std::vector<int> zbuf(w);
  for (int y = 0; y < h; ++y) {
    std::fill(zbuf.begin(), zbuf.end(), -1);
    for (int x = 0; x < w; ++x) {
      const std::uint8_t d = depth.at(x, y);
      const int tx = x + direction * disparity(d, w, cfg);
      if (tx < 0 || tx >= w || d <= zbuf[tx]) continue;
      zbuf[tx] = d;
      for (int c = 0; c < ch; ++c) out.at(tx, y, c) = frame.at(x, y, c);
    }
    for (int x = 0; x < w; ++x) {
      if (zbuf[x] >= 0) continue;
      int l = x - 1, r = x + 1;
      while (l >= 0 && zbuf[l] < 0) --l;
      while (r < w && zbuf[r] < 0) ++r;
      int src;
      if (l < 0 && r >= w)
        continue;  // nothing landed in this row
      else if (l < 0)
        src = r;
      else if (r >= w)
        src = l;
      else
        src = zbuf[l] <= zbuf[r] ? l : r;
      // zbuf stays negative here, so holes only ever copy landed pixels.
      for (int c = 0; c < ch; ++c) out.at(x, y, c) = out.at(src, y, c);
    }
  }
  return out;
}

}  // namespace detail

// Returns (left, right).
inline std::pair<Image8, Image8> synthesize_views(const Image8& frame, const Image8& depth,
                                                   const BaselineConfig& cfg) {
  cfg.validate();
  require(frame.width() == depth.width() && frame.height() == depth.height(), ErrorKind::shape,
          "frame and depth map differ in size");
  require(depth.channels() == 1, ErrorKind::shape, "depth map must be single-channel");
  return {detail::warp_view(frame, depth, cfg, +1), detail::warp_view(frame, depth, cfg, -1)};
}

inline std::pair<FrameSequence, FrameSequence> synthesize_clip(const FrameSequence& seq2d,
                                                               const FrameSequence& seqdepth,
                                                               const BaselineConfig& cfg) {
  validate(seq2d);
  validate(seqdepth);
  require(seq2d.length() == seqdepth.length(), ErrorKind::shape, "frame count mismatch between 2D and depth clips");
  FrameSequence left{{}, Role::synthesized, seq2d.fps}, right{{}, Role::synthesized, seq2d.fps};
  for (int k = 0; k < seq2d.length(); ++k) {
    auto [l, r] = synthesize_views(seq2d.frames[k], seqdepth.frames[k], cfg);
    left.frames.push_back(std::move(l));
    right.frames.push_back(std::move(r));
  }
  return {std::move(left), std::move(right)};
}

}  // namespace zw3d
