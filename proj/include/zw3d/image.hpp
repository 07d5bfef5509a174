#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "zw3d/error.hpp"

namespace zw3d {

// Interleaved, row-major image with 1 or 3 channels.
template <typename T>
class Image {
 public:
  Image() = default;
  Image(int width, int height, int channels = 1, T fill = T{})
      : width_(width), height_(height), channels_(channels) {
    require(width > 0 && height > 0, ErrorKind::shape, "image dimensions must be positive");
    require(channels == 1 || channels == 3, ErrorKind::shape, "image must have 1 or 3 channels");
    data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  bool empty() const noexcept { return data_.empty(); }

  T& at(int x, int y, int c = 0) { return data_[index(x, y, c)]; }
  const T& at(int x, int y, int c = 0) const { return data_[index(x, y, c)]; }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }

  bool same_shape(const Image& o) const noexcept {
    return width_ == o.width_ && height_ == o.height_ && channels_ == o.channels_;
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t index(int x, int y, int c) const noexcept {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<T> data_;
};

using Image8 = Image<std::uint8_t>;
using ImageD = Image<double>;

// Stack of equally sized single-channel real frames, stored frame-major.
class Volume {
 public:
  Volume() = default;
  Volume(int width, int height, int frames, double fill = 0.0)
      : width_(width), height_(height), frames_(frames) {
    require(width > 0 && height > 0 && frames > 0, ErrorKind::shape,
            "volume dimensions must be positive");
    data_.assign(static_cast<std::size_t>(width) * height * frames, fill);
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int frames() const noexcept { return frames_; }
  std::size_t frame_size() const noexcept { return static_cast<std::size_t>(width_) * height_; }

  // Row i, column j of frame k; all zero-based.
  double& at(int i, int j, int k) { return data_[k * frame_size() + static_cast<std::size_t>(i) * width_ + j]; }
  double at(int i, int j, int k) const {
    return data_[k * frame_size() + static_cast<std::size_t>(i) * width_ + j];
  }

  std::span<double> frame(int k) { return {data_.data() + k * frame_size(), frame_size()}; }
  std::span<const double> frame(int k) const { return {data_.data() + k * frame_size(), frame_size()}; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  friend bool operator==(const Volume&, const Volume&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int frames_ = 0;
  std::vector<double> data_;
};

template <typename T>
Image<T> flip_horizontal(const Image<T>& in) {
  Image<T> out(in.width(), in.height(), in.channels());
  for (int y = 0; y < in.height(); ++y)
    for (int x = 0; x < in.width(); ++x)
      for (int c = 0; c < in.channels(); ++c) out.at(in.width() - 1 - x, y, c) = in.at(x, y, c);
  return out;
}

template <typename T>
Image<T> flip_vertical(const Image<T>& in) {
  Image<T> out(in.width(), in.height(), in.channels());
  for (int y = 0; y < in.height(); ++y)
    for (int x = 0; x < in.width(); ++x)
      for (int c = 0; c < in.channels(); ++c) out.at(x, in.height() - 1 - y, c) = in.at(x, y, c);
  return out;
}

// Quarter turn counter-clockwise on a square canvas; exact grid permutation.
template <typename T>
Image<T> rotate_quarter(const Image<T>& in) {
  require(in.width() == in.height(), ErrorKind::shape, "quarter turn needs a square image");
  const int n = in.width();
  Image<T> out(n, n, in.channels());
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x)
      for (int c = 0; c < in.channels(); ++c) out.at(y, n - 1 - x, c) = in.at(x, y, c);
  return out;
}

}  // namespace zw3d
