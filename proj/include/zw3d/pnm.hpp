#pragma once

// Binary Netpbm I/O: P5 (gray), P6 (RGB), P4 (bitmap). Only maxval 255 is
// accepted for P5/P6.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <string>
#include <vector>

#include "zw3d/error.hpp"
#include "zw3d/image.hpp"

namespace zw3d::pnm {

namespace detail {

inline void skip_space_and_comments(std::istream& in) {
  for (;;) {
    int ch = in.peek();
    if (ch == '#') {
      std::string line;
      std::getline(in, line);
    } else if (ch != EOF && std::isspace(ch)) {
      in.get();
    } else {
      return;
    }
  }
}

inline int read_header_int(std::istream& in, const std::string& path) {
  skip_space_and_comments(in);
  int v = -1;
  in >> v;
  require(static_cast<bool>(in) && v >= 0, ErrorKind::io, "malformed header in " + path);
  return v;
}

}  // namespace detail

inline std::string read_magic(std::istream& in, const std::string& path) {
  char m[2] = {0, 0};
  in.read(m, 2);
  require(in.gcount() == 2 && m[0] == 'P', ErrorKind::io, "not a netpbm file: " + path);
  return std::string(m, 2);
}

// Reads P5 or P6 into an 8-bit image (1 or 3 channels).
inline Image8 read_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::io, "cannot open " + path.string());
  const std::string magic = read_magic(in, path.string());
  require(magic == "P5" || magic == "P6", ErrorKind::io, "unsupported netpbm type " + magic + " in " + path.string());
  const int w = detail::read_header_int(in, path.string());
  const int h = detail::read_header_int(in, path.string());
  const int maxval = detail::read_header_int(in, path.string());
  require(w > 0 && h > 0, ErrorKind::io, "bad dimensions in " + path.string());
  require(maxval == 255, ErrorKind::io, "unsupported bit depth (maxval " + std::to_string(maxval) + ") in " + path.string());
  in.get();  // single whitespace before raster
  Image8 img(w, h, magic == "P6" ? 3 : 1);
  auto data = img.data();
  in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size()));
  require(in.gcount() == static_cast<std::streamsize>(data.size()), ErrorKind::io,
          "truncated raster in " + path.string());
  return img;
}

inline void write_image(const std::filesystem::path& path, const Image8& img) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::io, "cannot create " + path.string());
  out << (img.channels() == 3 ? "P6" : "P5") << '\n' << img.width() << ' ' << img.height() << "\n255\n";
  auto data = img.data();
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  require(static_cast<bool>(out), ErrorKind::io, "write failed for " + path.string());
}

// Bitmap with rows×cols entries in {0,1}; `ink` is the PBM value (1 = black).
struct Bitmap {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> ink;
};

inline Bitmap read_bitmap(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::io, "cannot open " + path.string());
  require(read_magic(in, path.string()) == "P4", ErrorKind::io, "not a binary PBM: " + path.string());
  Bitmap bm;
  bm.width = detail::read_header_int(in, path.string());
  bm.height = detail::read_header_int(in, path.string());
  require(bm.width > 0 && bm.height > 0, ErrorKind::io, "bad dimensions in " + path.string());
  in.get();
  const int stride = (bm.width + 7) / 8;
  std::vector<unsigned char> row(stride);
  bm.ink.resize(static_cast<std::size_t>(bm.width) * bm.height);
  for (int y = 0; y < bm.height; ++y) {
    in.read(reinterpret_cast<char*>(row.data()), stride);
    require(in.gcount() == stride, ErrorKind::io, "truncated raster in " + path.string());
    for (int x = 0; x < bm.width; ++x)
      bm.ink[static_cast<std::size_t>(y) * bm.width + x] = (row[x / 8] >> (7 - x % 8)) & 1;
  }
  return bm;
}

inline void write_bitmap(const std::filesystem::path& path, const Bitmap& bm) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::io, "cannot create " + path.string());
  out << "P4\n" << bm.width << ' ' << bm.height << '\n';
  const int stride = (bm.width + 7) / 8;
  std::vector<unsigned char> row(stride);
  for (int y = 0; y < bm.height; ++y) {
    std::fill(row.begin(), row.end(), 0);
    for (int x = 0; x < bm.width; ++x)
      if (bm.ink[static_cast<std::size_t>(y) * bm.width + x]) row[x / 8] |= 1u << (7 - x % 8);
    out.write(reinterpret_cast<const char*>(row.data()), stride);
  }
  require(static_cast<bool>(out), ErrorKind::io, "write failed for " + path.string());
}

}  // namespace zw3d::pnm
