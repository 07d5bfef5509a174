#pragma once

// (2,2) visual secret sharing that binds a binarised feature to a watermark.
//
// Every watermark bit maps to a 2x2 block. The master block encodes the
// feature bit as the diagonal [[1,0],[0,1]] (bit 1) or the anti-diagonal
// [[0,1],[1,0]] (bit 0). The ownership block equals the master block where
// the watermark is white (1) and is its complement where it is black (0).
// Stacking is AND on white: identical blocks keep two white sub-pixels,
// complementary blocks keep none.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "zw3d/error.hpp"
#include "zw3d/feature.hpp"
#include "zw3d/pnm.hpp"

namespace zw3d {

inline constexpr int kWatermarkSide = 40;
inline constexpr int kShareSide = 2 * kWatermarkSide;
inline constexpr int kFeatureBits = kWatermarkSide * kWatermarkSide;

class BitMatrix {
 public:
  BitMatrix() = default;
  BitMatrix(int rows, int cols, std::uint8_t fill = 0)
      : rows_(rows), cols_(cols), bits_(static_cast<std::size_t>(rows) * cols, fill ? 1 : 0) {}

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }
  std::uint8_t get(int r, int c) const { return bits_[static_cast<std::size_t>(r) * cols_ + c]; }
  void set(int r, int c, bool v) { bits_[static_cast<std::size_t>(r) * cols_ + c] = v ? 1 : 0; }
  std::span<const std::uint8_t> bits() const noexcept { return bits_; }

  std::size_t count() const { return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1)); }

  BitMatrix complement() const {
    BitMatrix out = *this;
    for (auto& b : out.bits_) b ^= 1;
    return out;
  }

  friend bool operator==(const BitMatrix&, const BitMatrix&) = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<std::uint8_t> bits_;
};

// 40x40, 1 = white.
struct Watermark {
  BitMatrix bits{kWatermarkSide, kWatermarkSide};

  Watermark() = default;
  explicit Watermark(BitMatrix m) : bits(std::move(m)) {
    require(bits.rows() == kWatermarkSide && bits.cols() == kWatermarkSide, ErrorKind::shape,
            "watermark must be 40x40");
  }
  friend bool operator==(const Watermark&, const Watermark&) = default;
};

enum class ShareKind { master, ownership };

// True when the 2x2 block at block coordinates (bi, bj) is a diagonal or
// anti-diagonal pattern.
inline bool is_share_block(const BitMatrix& m, int bi, int bj) {
  const int r = 2 * bi, c = 2 * bj;
  const auto a = m.get(r, c), b = m.get(r, c + 1), d = m.get(r + 1, c), e = m.get(r + 1, c + 1);
  return a == e && b == d && a != b;
}

// 80x80 matrix of diagonal / anti-diagonal 2x2 blocks.
struct Share {
  BitMatrix bits{kShareSide, kShareSide};
  ShareKind kind = ShareKind::master;

  Share() = default;
  Share(BitMatrix m, ShareKind k) : bits(std::move(m)), kind(k) {
    require(bits.rows() == kShareSide && bits.cols() == kShareSide, ErrorKind::shape, "share must be 80x80");
    for (int bi = 0; bi < kWatermarkSide; ++bi)
      for (int bj = 0; bj < kWatermarkSide; ++bj)
        require(is_share_block(bits, bi, bj), ErrorKind::corrupt,
                "malformed share block at (" + std::to_string(bi) + "," + std::to_string(bj) + ")");
  }

  // true for [[1,0],[0,1]]
  bool diagonal(int bi, int bj) const { return bits.get(2 * bi, 2 * bj) == 1; }

  friend bool operator==(const Share&, const Share&) = default;
};

// 80x80 stacking result.
struct StackResult {
  BitMatrix bits{kShareSide, kShareSide};
};

// Feature bits: 1 where fn exceeds its lower median.
inline std::vector<std::uint8_t> binarize_feature(const FeatureVector& fn) {
  require(!fn.values.empty(), ErrorKind::shape, "empty feature");
  std::vector<double> sorted = fn.values;
  std::sort(sorted.begin(), sorted.end());
  require(!fn.degenerate && sorted.front() != sorted.back(), ErrorKind::degenerate, "non-informative feature");
  const double median = sorted[(sorted.size() - 1) / 2];
  std::vector<std::uint8_t> bits(fn.values.size());
  for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = fn.values[i] > median ? 1 : 0;
  return bits;
}

// Row-major 40x40 fill.
inline BitMatrix rearrange(std::span<const std::uint8_t> v) {
  require(v.size() == kFeatureBits, ErrorKind::shape, "bit vector must have 1600 entries");
  BitMatrix m(kWatermarkSide, kWatermarkSide);
  for (int i = 0; i < kWatermarkSide; ++i)
    for (int j = 0; j < kWatermarkSide; ++j) m.set(i, j, v[static_cast<std::size_t>(i) * kWatermarkSide + j] != 0);
  return m;
}

namespace detail {

inline void put_block(BitMatrix& m, int bi, int bj, bool diagonal) {
  m.set(2 * bi, 2 * bj, diagonal);
  m.set(2 * bi, 2 * bj + 1, !diagonal);
  m.set(2 * bi + 1, 2 * bj, !diagonal);
  m.set(2 * bi + 1, 2 * bj + 1, diagonal);
}

}  // namespace detail

inline Share build_master_share(const BitMatrix& v) {
  require(v.rows() == kWatermarkSide && v.cols() == kWatermarkSide, ErrorKind::shape,
          "feature matrix must be 40x40");
  BitMatrix m(kShareSide, kShareSide);
  for (int bi = 0; bi < kWatermarkSide; ++bi)
    for (int bj = 0; bj < kWatermarkSide; ++bj) detail::put_block(m, bi, bj, v.get(bi, bj) == 1);
  return Share(std::move(m), ShareKind::master);
}

inline Share build_ownership_share(const Share& master, const Watermark& w) {
  BitMatrix o(kShareSide, kShareSide);
  for (int bi = 0; bi < kWatermarkSide; ++bi)
    for (int bj = 0; bj < kWatermarkSide; ++bj) {
      require(is_share_block(master.bits, bi, bj), ErrorKind::corrupt, "malformed master share block");
      const bool diag = master.diagonal(bi, bj);
      detail::put_block(o, bi, bj, w.bits.get(bi, bj) == 1 ? diag : !diag);
    }
  return Share(std::move(o), ShareKind::ownership);
}

inline StackResult stack_shares(const Share& master, const Share& ownership) {
  // Construction of either Share already enforced the block invariant.
  StackResult s;
  for (int r = 0; r < kShareSide; ++r)
    for (int c = 0; c < kShareSide; ++c) s.bits.set(r, c, master.bits.get(r, c) && ownership.bits.get(r, c));
  return s;
}

inline Watermark recover_watermark(const StackResult& s) {
  require(s.bits.rows() == kShareSide && s.bits.cols() == kShareSide, ErrorKind::shape, "stack result must be 80x80");
  BitMatrix w(kWatermarkSide, kWatermarkSide);
  for (int bi = 0; bi < kWatermarkSide; ++bi)
    for (int bj = 0; bj < kWatermarkSide; ++bj) {
      const int sum = s.bits.get(2 * bi, 2 * bj) + s.bits.get(2 * bi, 2 * bj + 1) + s.bits.get(2 * bi + 1, 2 * bj) +
                      s.bits.get(2 * bi + 1, 2 * bj + 1);
      w.set(bi, bj, sum >= 2);
    }
  return Watermark(std::move(w));
}

inline double ber(const BitMatrix& a, const BitMatrix& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), ErrorKind::shape, "BER operands differ in shape");
  std::size_t diff = 0;
  for (std::size_t i = 0; i < a.bits().size(); ++i) diff += a.bits()[i] != b.bits()[i];
  return static_cast<double>(diff) / static_cast<double>(a.bits().size());
}

inline double ber(const Watermark& a, const Watermark& b) { return ber(a.bits, b.bits); }

// Master share straight from a feature vector.
inline Share master_share_from_feature(const FeatureVector& fn) {
  return build_master_share(rearrange(binarize_feature(fn)));
}

// PBM stores ink (1 = black); in-memory 1 = white.
inline BitMatrix read_pbm(const std::filesystem::path& path) {
  const pnm::Bitmap bm = pnm::read_bitmap(path);
  BitMatrix m(bm.height, bm.width);
  for (int r = 0; r < bm.height; ++r)
    for (int c = 0; c < bm.width; ++c) m.set(r, c, bm.ink[static_cast<std::size_t>(r) * bm.width + c] == 0);
  return m;
}

inline void write_pbm(const std::filesystem::path& path, const BitMatrix& m) {
  pnm::Bitmap bm{m.cols(), m.rows(), {}};
  bm.ink.resize(m.bits().size());
  for (std::size_t i = 0; i < bm.ink.size(); ++i) bm.ink[i] = m.bits()[i] ? 0 : 1;
  pnm::write_bitmap(path, bm);
}

inline Watermark read_watermark(const std::filesystem::path& path) {
  BitMatrix m = read_pbm(path);
  require(m.rows() == kWatermarkSide && m.cols() == kWatermarkSide, ErrorKind::shape,
          "watermark " + path.string() + " must be 40x40");
  return Watermark(std::move(m));
}

}  // namespace zw3d
