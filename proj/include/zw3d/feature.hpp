#pragma once

// Ring-partitioned centroid feature over TIRI-based deviations.
//
// Pipeline: TIRI (temporal weighted mean) -> per-frame max deviation against
// the 8-neighbourhood of the TIRI -> arctan normalisation by the TIRI ->
// TIRI-weighted centroids on concentric rings -> z-score.

#include <algorithm>
#include <cmath>
#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <span>
#include <vector>

#include "zw3d/error.hpp"
#include "zw3d/frameio.hpp"
#include "zw3d/image.hpp"

namespace zw3d {

struct FeatureGeometry {
  int size = 320;            // normalised frame side
  int frames = 100;          // K
  int rings = 16;            // N
  double ring_width = 10.0;  // r
  int tiri_stride = 5;       // TIRI samples frames stride, 2*stride, ..., frames
  double tiri_decay = 1.0;   // a in w_k = a^k

  int length() const noexcept { return rings * frames; }
  double center() const noexcept { return (size - 1) / 2.0; }
};

inline constexpr int kDiscard = -1;

struct TiriImage {
  int size = 0;
  std::vector<double> pixels;  // row-major

  double at(int i, int j) const { return pixels[static_cast<std::size_t>(i) * size + j]; }
  double& at(int i, int j) { return pixels[static_cast<std::size_t>(i) * size + j]; }
};

// Values on the border rows/columns are zero and flagged invalid.
struct DeviationStack {
  Volume values;
  bool valid(int i, int j) const noexcept {
    return i > 0 && j > 0 && i < values.height() - 1 && j < values.width() - 1;
  }
};

struct NormalizedDeviationStack {
  Volume values;
  bool valid(int i, int j) const noexcept {
    return i > 0 && j > 0 && i < values.height() - 1 && j < values.width() - 1;
  }
};

struct FeatureVector {
  std::vector<double> values;
  Role role = Role::two_d;
  bool degenerate = false;

  std::size_t size() const noexcept { return values.size(); }
};

namespace detail {

inline void check_clip(const NormalizedClip& clip, const FeatureGeometry& g) {
  const Volume& v = clip.volume;
  require(v.width() == g.size && v.height() == g.size && v.frames() == g.frames, ErrorKind::shape,
          "normalised clip does not match feature geometry");
  require(g.tiri_stride > 0 && g.frames % g.tiri_stride == 0, ErrorKind::invalid_argument,
          "TIRI stride must divide the frame count");
}

// Max and min of the TIRI over the 8 neighbours of each interior pixel.
struct NeighbourRange {
  std::vector<double> lo, hi;
};

inline NeighbourRange neighbour_range(const TiriImage& tiri) {
  const int n = tiri.size;
  NeighbourRange r{std::vector<double>(tiri.pixels.size(), 0.0), std::vector<double>(tiri.pixels.size(), 0.0)};
  for (int i = 1; i < n - 1; ++i)
    for (int j = 1; j < n - 1; ++j) {
      double lo = INFINITY, hi = -INFINITY;
      for (int di = -1; di <= 1; ++di)
        for (int dj = -1; dj <= 1; ++dj) {
          if (di == 0 && dj == 0) continue;
          const double t = tiri.at(i + di, j + dj);
          lo = std::min(lo, t);
          hi = std::max(hi, t);
        }
      r.lo[static_cast<std::size_t>(i) * n + j] = lo;
      r.hi[static_cast<std::size_t>(i) * n + j] = hi;
    }
  return r;
}

// |t - x| is maximised over a set of t at its minimum or maximum.
inline double max_abs_deviation(double lo, double hi, double x) {
  return std::max(std::fabs(hi - x), std::fabs(lo - x));
}

inline double arctan_ratio(double dev, double tiri) {
  if (tiri == 0.0) return dev == 0.0 ? 0.0 : std::numbers::pi / 2.0;
  return std::atan(dev / tiri);
}

}  // namespace detail

inline TiriImage compute_tiri(const NormalizedClip& clip, const FeatureGeometry& g = {}) {
  detail::check_clip(clip, g);
  const Volume& vol = clip.volume;
  TiriImage tiri{g.size, std::vector<double>(vol.frame_size(), 0.0)};
  double weight_sum = 0.0;
  for (int k = g.tiri_stride; k <= g.frames; k += g.tiri_stride) {
    const double w = std::pow(g.tiri_decay, k);
    const auto frame = vol.frame(k - 1);
    for (std::size_t p = 0; p < frame.size(); ++p) tiri.pixels[p] += w * frame[p];
    weight_sum += w;
  }
  for (double& p : tiri.pixels) p /= weight_sum;
  return tiri;
}

inline DeviationStack tiri_deviation(const NormalizedClip& clip, const TiriImage& tiri,
                                     const FeatureGeometry& g = {}) {
  detail::check_clip(clip, g);
  require(tiri.size == g.size, ErrorKind::shape, "TIRI size mismatch");
  const auto range = detail::neighbour_range(tiri);
  const int n = g.size;
  DeviationStack dev{Volume(n, n, g.frames)};
  for (int k = 0; k < g.frames; ++k)
    for (int i = 1; i < n - 1; ++i)
      for (int j = 1; j < n - 1; ++j) {
        const std::size_t p = static_cast<std::size_t>(i) * n + j;
        dev.values.at(i, j, k) = detail::max_abs_deviation(range.lo[p], range.hi[p], clip.volume.at(i, j, k));
      }
  return dev;
}

inline NormalizedDeviationStack normalize_deviation(const DeviationStack& dev, const TiriImage& tiri) {
  const Volume& d = dev.values;
  require(tiri.size == d.width() && tiri.size == d.height(), ErrorKind::shape, "TIRI size mismatch");
  NormalizedDeviationStack out{Volume(d.width(), d.height(), d.frames())};
  for (int k = 0; k < d.frames(); ++k)
    for (int i = 1; i < d.height() - 1; ++i)
      for (int j = 1; j < d.width() - 1; ++j)
        out.values.at(i, j, k) = detail::arctan_ratio(d.at(i, j, k), tiri.at(i, j));
  return out;
}

// Zero-based row/column; returns the ring number or kDiscard outside the
// largest ring. Ring n is the annulus [n*r, (n+1)*r) around the frame centre.
inline int ring_index(int i, int j, const FeatureGeometry& g = {}) {
  const double di = i - g.center();
  const double dj = j - g.center();
  const double dist = std::sqrt(di * di + dj * dj);
  const int n = static_cast<int>(std::floor(dist / g.ring_width));
  return n < g.rings ? n : kDiscard;
}

namespace detail {

// Interior pixels that fall in a ring, with their ring and TIRI weight.
struct RingLayout {
  std::vector<std::uint32_t> pixel;
  std::vector<int> ring;
  std::vector<double> weight_sum;  // per ring
};

inline RingLayout ring_layout(const TiriImage& tiri, const FeatureGeometry& g) {
  RingLayout lay;
  lay.weight_sum.assign(g.rings, 0.0);
  for (int i = 1; i < g.size - 1; ++i)
    for (int j = 1; j < g.size - 1; ++j) {
      const int n = ring_index(i, j, g);
      if (n == kDiscard) continue;
      lay.pixel.push_back(static_cast<std::uint32_t>(i * g.size + j));
      lay.ring.push_back(n);
      lay.weight_sum[n] += tiri.at(i, j);
    }
  return lay;
}

inline void centroids_into(std::span<double> f, int k, std::span<const double> numer,
                           const RingLayout& lay, const FeatureGeometry& g) {
  for (int n = 0; n < g.rings; ++n)
    f[static_cast<std::size_t>(k) * g.rings + n] = lay.weight_sum[n] > 0.0 ? numer[n] / lay.weight_sum[n] : 0.0;
}

}  // namespace detail

// Intermediate feature f, laid out frame-major: f[k*N + n] = v(n, k).
inline std::vector<double> ring_centroids(const NormalizedDeviationStack& norm, const TiriImage& tiri,
                                          const FeatureGeometry& g = {}) {
  const Volume& nv = norm.values;
  require(nv.width() == g.size && nv.height() == g.size && nv.frames() == g.frames && tiri.size == g.size,
          ErrorKind::shape, "deviation stack does not match feature geometry");
  const auto lay = detail::ring_layout(tiri, g);
  std::vector<double> f(g.length(), 0.0);
  std::vector<double> numer(g.rings);
  for (int k = 0; k < g.frames; ++k) {
    std::fill(numer.begin(), numer.end(), 0.0);
    const auto frame = nv.frame(k);
    for (std::size_t q = 0; q < lay.pixel.size(); ++q)
      numer[lay.ring[q]] += tiri.pixels[lay.pixel[q]] * frame[lay.pixel[q]];
    detail::centroids_into(f, k, numer, lay, g);
  }
  return f;
}

inline FeatureVector zscore(std::span<const double> f, Role role = Role::two_d) {
  require(f.size() >= 2, ErrorKind::shape, "feature too short to normalise");
  const double count = static_cast<double>(f.size());
  double mean = 0.0;
  for (double x : f) mean += x;
  mean /= count;
  double ss = 0.0;
  for (double x : f) ss += (x - mean) * (x - mean);
  const double sigma = std::sqrt(ss / (count - 1.0));

  FeatureVector out{std::vector<double>(f.size(), 0.0), role, false};
  if (sigma < 1e-12) {
    out.degenerate = true;
    return out;
  }
  for (std::size_t i = 0; i < f.size(); ++i) out.values[i] = (f[i] - mean) / sigma;
  return out;
}

// Same arithmetic as the stage-by-stage composition, one frame at a time.
inline FeatureVector extract_feature(const NormalizedClip& clip, const FeatureGeometry& g = {}) {
  const TiriImage tiri = compute_tiri(clip, g);
  const auto range = detail::neighbour_range(tiri);
  const auto lay = detail::ring_layout(tiri, g);
  std::vector<double> f(g.length(), 0.0);
  std::vector<double> numer(g.rings);
  for (int k = 0; k < g.frames; ++k) {
    std::fill(numer.begin(), numer.end(), 0.0);
    const auto frame = clip.volume.frame(k);
    for (std::size_t q = 0; q < lay.pixel.size(); ++q) {
      const std::uint32_t p = lay.pixel[q];
      const double t = tiri.pixels[p];
      const double dev = detail::max_abs_deviation(range.lo[p], range.hi[p], frame[p]);
      numer[lay.ring[q]] += t * detail::arctan_ratio(dev, t);
    }
    detail::centroids_into(f, k, numer, lay, g);
  }
  return zscore(f, clip.role == Role::depth ? Role::depth : Role::two_d);
}

// Little-endian float64 dump for cross-checking against external tools.
inline void write_f64(const std::filesystem::path& path, std::span<const double> values) {
  static_assert(std::endian::native == std::endian::little, "dump format assumes a little-endian host");
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::io, "cannot create " + path.string());
  out.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(double)));
  require(static_cast<bool>(out), ErrorKind::io, "write failed for " + path.string());
}

}  // namespace zw3d
