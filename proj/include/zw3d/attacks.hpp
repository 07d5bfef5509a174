#pragma once

// The 26 single-attack instances used for robustness testing: 14 families,
// signal (GB AF MF CC CB GT GN LI), geometric (RS CR RT FL) and temporal
// (FR FD).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "zw3d/error.hpp"
#include "zw3d/frameio.hpp"
#include "zw3d/image.hpp"

namespace zw3d {

enum class AttackFamily { GB, AF, MF, CC, CB, GT, GN, LI, RS, CR, RT, FL, FR, FD };

enum class FlipAxis { vertical, horizontal };

struct AttackSpec {
  AttackFamily family = AttackFamily::FL;
  // Window side (GB AF MF), signed fraction (CC CB), gamma (GT), variance (GN),
  // logo side (LI), scale (RS), edge fraction (CR), degrees (RT), rate (FR FD).
  double value = 0.0;
  FlipAxis axis = FlipAxis::vertical;  // FL only
  std::optional<std::uint64_t> seed;   // GN FR FD
};

inline constexpr std::array<const char*, 14> kFamilyCodes = {"gb", "af", "mf", "cc", "cb", "gt", "gn",
                                                             "li", "rs", "cr", "rt", "fl", "fr", "fd"};

inline std::string family_code(AttackFamily f) { return kFamilyCodes[static_cast<int>(f)]; }

inline AttackFamily parse_family(const std::string& code) {
  std::string lower = code;
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  for (std::size_t i = 0; i < kFamilyCodes.size(); ++i)
    if (lower == kFamilyCodes[i]) return static_cast<AttackFamily>(i);
  fail(ErrorKind::invalid_argument, "unknown attack family '" + code + "'");
}

inline bool is_stochastic(AttackFamily f) {
  return f == AttackFamily::GN || f == AttackFamily::FR || f == AttackFamily::FD;
}

namespace detail {

inline bool close_to(double a, double b) { return std::fabs(a - b) < 1e-9; }

inline bool in_set(double v, std::initializer_list<double> allowed) {
  return std::any_of(allowed.begin(), allowed.end(), [&](double a) { return close_to(v, a); });
}

inline std::string trim_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace detail

inline void validate(const AttackSpec& s) {
  bool ok = false;
  switch (s.family) {
    case AttackFamily::GB:
    case AttackFamily::AF:
    case AttackFamily::MF: ok = detail::in_set(s.value, {9, 15}); break;
    case AttackFamily::CC:
    case AttackFamily::CB: ok = detail::in_set(s.value, {-0.3, 0.3}); break;
    case AttackFamily::GT: ok = detail::in_set(s.value, {0.6, 1.4}); break;
    case AttackFamily::GN: ok = detail::in_set(s.value, {0.005, 0.01}); break;
    case AttackFamily::LI: ok = detail::in_set(s.value, {32, 64}); break;
    case AttackFamily::RS: ok = detail::in_set(s.value, {0.5, 0.2}); break;
    case AttackFamily::CR: ok = detail::in_set(s.value, {0.05, 0.1}); break;
    case AttackFamily::RT: ok = detail::in_set(s.value, {45, 90}); break;
    case AttackFamily::FL: ok = true; break;
    case AttackFamily::FR:
    case AttackFamily::FD: ok = detail::in_set(s.value, {0.05}); break;
  }
  require(ok, ErrorKind::invalid_argument,
          "invalid parameter " + detail::trim_number(s.value) + " for attack " + family_code(s.family));
  require(!is_stochastic(s.family) || s.seed.has_value(), ErrorKind::invalid_argument,
          "attack " + family_code(s.family) + " needs a seed");
}

// Row label in the style of the published tables, e.g. "GB 9x9", "CC -30".
inline std::string attack_label(const AttackSpec& s) {
  std::string code = family_code(s.family);
  std::transform(code.begin(), code.end(), code.begin(), [](unsigned char c) { return std::toupper(c); });
  const auto pct = [](double v) { return detail::trim_number(std::round(v * 100.0)); };
  switch (s.family) {
    case AttackFamily::GB:
    case AttackFamily::AF:
    case AttackFamily::MF:
    case AttackFamily::LI: {
      const std::string n = detail::trim_number(s.value);
      return code + " " + n + "x" + n;
    }
    case AttackFamily::CC:
    case AttackFamily::CB: return code + " " + (s.value > 0 ? "+" : "") + pct(s.value);
    case AttackFamily::GT:
    case AttackFamily::GN: return code + " " + detail::trim_number(s.value);
    case AttackFamily::RS: return code + " 1/" + detail::trim_number(std::round(1.0 / s.value));
    case AttackFamily::CR:
    case AttackFamily::FR:
    case AttackFamily::FD: return code + " " + pct(s.value) + "%";
    case AttackFamily::RT: return code + " " + detail::trim_number(s.value);
    case AttackFamily::FL: return code + (s.axis == FlipAxis::vertical ? " Vertical" : " Horizontal");
  }
  return code;
}

// Parses a CLI parameter for a family: "9", "9x9", "-30", "+30%", "0.6",
// "1/2", "5%", "45", "vertical" ...
inline AttackSpec parse_attack(const std::string& family, const std::string& param,
                               std::optional<std::uint64_t> seed = std::nullopt) {
  AttackSpec s;
  s.family = parse_family(family);
  s.seed = seed;
  std::string p = param;
  std::transform(p.begin(), p.end(), p.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s.family == AttackFamily::FL) {
    require(p == "vertical" || p == "horizontal", ErrorKind::invalid_argument,
            "flip parameter must be vertical or horizontal");
    s.axis = p == "vertical" ? FlipAxis::vertical : FlipAxis::horizontal;
  } else {
    if ((s.family == AttackFamily::FR || s.family == AttackFamily::FD) && p.empty()) p = "5%";
    require(!p.empty(), ErrorKind::invalid_argument, "attack " + family + " needs a parameter");
    if (const auto x = p.find('x'); x != std::string::npos) p = p.substr(0, x);
    bool percent = false;
    if (!p.empty() && p.back() == '%') {
      percent = true;
      p.pop_back();
    }
    double v = 0.0;
    try {
      if (const auto slash = p.find('/'); slash != std::string::npos)
        v = std::stod(p.substr(0, slash)) / std::stod(p.substr(slash + 1));
      else
        v = std::stod(p);
    } catch (const std::exception&) {
      fail(ErrorKind::invalid_argument, "cannot parse attack parameter '" + param + "'");
    }
    const bool fractional = s.family == AttackFamily::CC || s.family == AttackFamily::CB ||
                            s.family == AttackFamily::CR || s.family == AttackFamily::FR ||
                            s.family == AttackFamily::FD;
    if (percent || (fractional && std::fabs(v) >= 1.0)) v /= 100.0;
    s.value = v;
  }
  validate(s);
  return s;
}

// All 26 instances in table order.
inline std::vector<AttackSpec> attack_catalog(std::uint64_t seed = 1) {
  using F = AttackFamily;
  std::vector<AttackSpec> out;
  auto add = [&](F f, double v, FlipAxis axis = FlipAxis::vertical) {
    AttackSpec s{f, v, axis, std::nullopt};
    if (is_stochastic(f)) s.seed = seed;
    out.push_back(s);
  };
  for (double w : {9.0, 15.0}) add(F::GB, w);
  for (double w : {9.0, 15.0}) add(F::AF, w);
  for (double w : {9.0, 15.0}) add(F::MF, w);
  for (double v : {-0.3, 0.3}) add(F::CC, v);
  for (double v : {-0.3, 0.3}) add(F::CB, v);
  for (double g : {0.6, 1.4}) add(F::GT, g);
  for (double v : {0.005, 0.01}) add(F::GN, v);
  for (double n : {32.0, 64.0}) add(F::LI, n);
  for (double r : {0.5, 0.2}) add(F::RS, r);
  for (double c : {0.05, 0.1}) add(F::CR, c);
  for (double a : {45.0, 90.0}) add(F::RT, a);
  add(F::FL, 0, FlipAxis::vertical);
  add(F::FL, 0, FlipAxis::horizontal);
  add(F::FR, 0.05);
  add(F::FD, 0.05);
  return out;
}

namespace attack_detail {

inline std::uint8_t to_u8(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

template <typename Fn>
Image8 map_pixels(const Image8& in, Fn&& fn) {
  Image8 out = in;
  for (auto& p : out.data()) p = to_u8(fn(static_cast<double>(p)));
  return out;
}

// Separable convolution with replicate border.
inline Image8 convolve(const Image8& in, const std::vector<double>& kernel) {
  const int w = in.width(), h = in.height(), ch = in.channels();
  const int half = static_cast<int>(kernel.size()) / 2;
  std::vector<double> tmp(static_cast<std::size_t>(w) * h * ch);
  auto t = [&](int x, int y, int c) -> double& { return tmp[(static_cast<std::size_t>(y) * w + x) * ch + c]; };
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < ch; ++c) {
        double s = 0.0;
        for (int k = -half; k <= half; ++k) s += kernel[k + half] * in.at(std::clamp(x + k, 0, w - 1), y, c);
        t(x, y, c) = s;
      }
  Image8 out(w, h, ch);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < ch; ++c) {
        double s = 0.0;
        for (int k = -half; k <= half; ++k) s += kernel[k + half] * t(x, std::clamp(y + k, 0, h - 1), c);
        out.at(x, y, c) = to_u8(s);
      }
  return out;
}

inline std::vector<double> gaussian_kernel(int window, double variance) {
  std::vector<double> k(window);
  double sum = 0.0;
  for (int i = 0; i < window; ++i) {
    const double d = i - window / 2;
    k[i] = std::exp(-d * d / (2.0 * variance));
    sum += k[i];
  }
  for (double& v : k) v /= sum;
  return k;
}

// Sliding-histogram median over a window x window neighbourhood, replicate border.
inline Image8 median(const Image8& in, int window) {
  const int w = in.width(), h = in.height(), ch = in.channels();
  const int half = window / 2;
  const int rank = window * window / 2;  // zero-based middle of an odd count
  Image8 out(w, h, ch);
  std::array<int, 256> hist{};
  for (int c = 0; c < ch; ++c)
    for (int y = 0; y < h; ++y) {
      hist.fill(0);
      for (int dy = -half; dy <= half; ++dy)
        for (int dx = -half; dx <= half; ++dx) ++hist[in.at(std::clamp(dx, 0, w - 1), std::clamp(y + dy, 0, h - 1), c)];
      for (int x = 0; x < w; ++x) {
        if (x > 0) {
          const int drop = std::clamp(x - 1 - half, 0, w - 1);
          const int add = std::clamp(x + half, 0, w - 1);
          for (int dy = -half; dy <= half; ++dy) {
            const int yy = std::clamp(y + dy, 0, h - 1);
            --hist[in.at(drop, yy, c)];
            ++hist[in.at(add, yy, c)];
          }
        }
        int acc = 0, v = 0;
        for (; v < 256; ++v) {
          acc += hist[v];
          if (acc > rank) break;
        }
        out.at(x, y, c) = static_cast<std::uint8_t>(v);
      }
    }
  return out;
}

inline Image8 resize(const Image8& in, int out_w, int out_h) {
  Image8 out(out_w, out_h, in.channels());
  for (int c = 0; c < in.channels(); ++c) {
    ImageD plane(in.width(), in.height());
    for (int y = 0; y < in.height(); ++y)
      for (int x = 0; x < in.width(); ++x) plane.at(x, y) = in.at(x, y, c);
    const ImageD r = resize_bilinear(plane, out_w, out_h);
    for (int y = 0; y < out_h; ++y)
      for (int x = 0; x < out_w; ++x) out.at(x, y, c) = to_u8(r.at(x, y));
  }
  return out;
}

inline Image8 crop(const Image8& in, double fraction) {
  const int cx = static_cast<int>(std::lround(fraction * in.width()));
  const int cy = static_cast<int>(std::lround(fraction * in.height()));
  const int w = in.width() - 2 * cx, h = in.height() - 2 * cy;
  require(w > 0 && h > 0, ErrorKind::shape, "frame too small to crop");
  Image8 out(w, h, in.channels());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < in.channels(); ++c) out.at(x, y, c) = in.at(x + cx, y + cy, c);
  return out;
}

// Counter-clockwise rotation about the frame centre, canvas kept, black fill.
inline Image8 rotate(const Image8& in, double degrees) {
  const int w = in.width(), h = in.height(), ch = in.channels();
  if (std::fabs(degrees - 90.0) < 1e-9 && w == h) return rotate_quarter(in);
  const double cx = (w - 1) / 2.0, cy = (h - 1) / 2.0;
  const double rad = degrees * std::numbers::pi / 180.0;
  const double cs = std::cos(rad), sn = std::sin(rad);
  const bool quarter = std::fabs(degrees - 90.0) < 1e-9;
  Image8 out(w, h, ch, 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      // Inverse map: image y grows downward, so a CCW turn on screen is
      // (dx, dy) -> (dx*cos + dy*sin, -dx*sin + dy*cos).
      const double dx = x - cx, dy = y - cy;
      const double sx = cx + dx * cs - dy * sn;
      const double sy = cy + dx * sn + dy * cs;
      if (quarter) {
        const long ix = std::lround(sx), iy = std::lround(sy);
        if (ix < 0 || iy < 0 || ix >= w || iy >= h) continue;
        for (int c = 0; c < ch; ++c) out.at(x, y, c) = in.at(static_cast<int>(ix), static_cast<int>(iy), c);
        continue;
      }
      if (sx < 0.0 || sy < 0.0 || sx > w - 1 || sy > h - 1) continue;
      const int x0 = static_cast<int>(std::floor(sx)), y0 = static_cast<int>(std::floor(sy));
      const int x1 = std::min(x0 + 1, w - 1), y1 = std::min(y0 + 1, h - 1);
      const double fx = sx - x0, fy = sy - y0;
      for (int c = 0; c < ch; ++c) {
        const double top = (1 - fx) * in.at(x0, y0, c) + fx * in.at(x1, y0, c);
        const double bot = (1 - fx) * in.at(x0, y1, c) + fx * in.at(x1, y1, c);
        out.at(x, y, c) = to_u8((1 - fy) * top + fy * bot);
      }
    }
  return out;
}

inline Image8 logo(const Image8& in, int side) {
  Image8 out = in;
  const int cell = side / 8;
  for (int y = 0; y < std::min(side, in.height()); ++y)
    for (int x = 0; x < std::min(side, in.width()); ++x) {
      const std::uint8_t v = ((x / cell + y / cell) % 2) ? 255 : 0;
      for (int c = 0; c < in.channels(); ++c) out.at(x, y, c) = v;
    }
  return out;
}

inline std::vector<int> pick_frames(int count, int first, int last, std::uint64_t seed) {
  std::vector<int> idx;
  for (int i = first; i <= last; ++i) idx.push_back(i);
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(std::min<std::size_t>(count, idx.size()));
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace attack_detail

inline FrameSequence apply_attack(const FrameSequence& seq, const AttackSpec& spec) {
  namespace ad = attack_detail;
  validate(seq);
  validate(spec);
  FrameSequence out{{}, seq.role, seq.fps};
  const int l = seq.length();

  auto per_frame = [&](auto&& fn) {
    out.frames.reserve(seq.frames.size());
    for (const Image8& f : seq.frames) out.frames.push_back(fn(f));
  };

  switch (spec.family) {
    case AttackFamily::GB: {
      const auto k = ad::gaussian_kernel(static_cast<int>(spec.value), 1.0);
      per_frame([&](const Image8& f) { return ad::convolve(f, k); });
      break;
    }
    case AttackFamily::AF: {
      const int n = static_cast<int>(spec.value);
      const std::vector<double> k(n, 1.0 / n);
      per_frame([&](const Image8& f) { return ad::convolve(f, k); });
      break;
    }
    case AttackFamily::MF:
      per_frame([&](const Image8& f) { return ad::median(f, static_cast<int>(spec.value)); });
      break;
    case AttackFamily::CC:
      per_frame([&](const Image8& f) {
        return ad::map_pixels(f, [&](double p) { return 128.0 + (p - 128.0) * (1.0 + spec.value); });
      });
      break;
    case AttackFamily::CB:
      per_frame([&](const Image8& f) { return ad::map_pixels(f, [&](double p) { return p * (1.0 + spec.value); }); });
      break;
    case AttackFamily::GT:
      per_frame([&](const Image8& f) {
        return ad::map_pixels(f, [&](double p) { return std::pow(p / 255.0, spec.value) * 255.0; });
      });
      break;
    case AttackFamily::GN: {
      std::mt19937_64 rng(*spec.seed);
      std::normal_distribution<double> noise(0.0, std::sqrt(spec.value));
      per_frame([&](const Image8& f) {
        return ad::map_pixels(f, [&](double p) { return std::clamp(p / 255.0 + noise(rng), 0.0, 1.0) * 255.0; });
      });
      break;
    }
    case AttackFamily::LI:
      per_frame([&](const Image8& f) { return ad::logo(f, static_cast<int>(spec.value)); });
      break;
    case AttackFamily::RS: {
      const int w = std::max(1, static_cast<int>(std::lround(seq.width() * spec.value)));
      const int h = std::max(1, static_cast<int>(std::lround(seq.height() * spec.value)));
      per_frame([&](const Image8& f) { return ad::resize(f, w, h); });
      break;
    }
    case AttackFamily::CR:
      per_frame([&](const Image8& f) { return ad::crop(f, spec.value); });
      break;
    case AttackFamily::RT:
      per_frame([&](const Image8& f) { return ad::rotate(f, spec.value); });
      break;
    case AttackFamily::FL:
      per_frame([&](const Image8& f) {
        return spec.axis == FlipAxis::vertical ? flip_vertical(f) : flip_horizontal(f);
      });
      break;
    case AttackFamily::FR: {
      out.frames = seq.frames;
      const int count = static_cast<int>(std::lround(spec.value * l));
      if (l >= 2)
        for (int i : ad::pick_frames(count, 1, l - 1, *spec.seed)) out.frames[i] = seq.frames[i - 1];
      break;
    }
    case AttackFamily::FD: {
      const int count = std::min(static_cast<int>(std::lround(spec.value * l)), l - 1);
      const auto drop = ad::pick_frames(count, 0, l - 1, *spec.seed);
      for (int i = 0; i < l; ++i)
        if (!std::binary_search(drop.begin(), drop.end(), i)) out.frames.push_back(seq.frames[i]);
      break;
    }
  }
  return out;
}

}  // namespace zw3d
