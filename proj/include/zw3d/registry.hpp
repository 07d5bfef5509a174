#pragma once

// Append-only registration database ("ZW3D" v1).
//
//   header : magic "ZW3D" | version u16 | record count u64
//   record : id_len u16 | id bytes | fn_2d 1600 x f64 | fn_depth 1600 x f64 |
//            O_2d 800 B | O_depth 800 B | W_2d 200 B | W_depth 200 B | crc32 u32
//
// All integers and floats little-endian; bit matrices row-major, MSB first.
// The CRC covers the record body (everything before it). A writer appends the
// record, syncs, then bumps the header count, all under an exclusive flock,
// so readers that trust the count always see whole records.

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <bit>
#include <boost/crc.hpp>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "zw3d/error.hpp"
#include "zw3d/feature.hpp"
#include "zw3d/vss.hpp"

namespace zw3d {

struct RegistrationRecord {
  std::string id;
  FeatureVector fn_2d;
  FeatureVector fn_depth;
  Share o_2d;
  Share o_depth;
  // Kept for evaluation only; BER needs the original watermark.
  Watermark w_2d;
  Watermark w_depth;
};

struct OwnershipEntry {
  Share o_2d;
  Share o_depth;
  Watermark w_2d;
  Watermark w_depth;
};

namespace registry_format {

inline constexpr char kMagic[4] = {'Z', 'W', '3', 'D'};
inline constexpr std::uint16_t kVersion = 1;
inline constexpr std::size_t kHeaderSize = 4 + 2 + 8;
inline constexpr std::size_t kCountOffset = 6;

static_assert(std::endian::native == std::endian::little, "registry format assumes a little-endian host");

class Writer {
 public:
  template <typename T>
  void put(const T& v) {
    const auto* p = reinterpret_cast<const char*>(&v);
    bytes.insert(bytes.end(), p, p + sizeof(T));
  }
  void put_bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const char*>(data);
    bytes.insert(bytes.end(), p, p + n);
  }
  void put_bits(const BitMatrix& m) {
    std::vector<unsigned char> packed((m.bits().size() + 7) / 8, 0);
    for (std::size_t i = 0; i < m.bits().size(); ++i)
      if (m.bits()[i]) packed[i / 8] |= static_cast<unsigned char>(1u << (7 - i % 8));
    put_bytes(packed.data(), packed.size());
  }
  std::vector<char> bytes;
};

class Reader {
 public:
  Reader(const char* data, std::size_t size) : data_(data), size_(size) {}
  template <typename T>
  T get() {
    T v;
    need(sizeof(T));
    std::memcpy(&v, data_ + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string get_string(std::size_t n) {
    need(n);
    std::string s(data_ + pos_, n);
    pos_ += n;
    return s;
  }
  std::vector<double> get_doubles(std::size_t n) {
    need(n * sizeof(double));
    std::vector<double> v(n);
    std::memcpy(v.data(), data_ + pos_, n * sizeof(double));
    pos_ += n * sizeof(double);
    return v;
  }
  BitMatrix get_bits(int rows, int cols) {
    const std::size_t n = static_cast<std::size_t>(rows) * cols;
    need((n + 7) / 8);
    BitMatrix m(rows, cols);
    for (std::size_t i = 0; i < n; ++i) {
      const auto byte = static_cast<unsigned char>(data_[pos_ + i / 8]);
      m.set(static_cast<int>(i / cols), static_cast<int>(i % cols), (byte >> (7 - i % 8)) & 1);
    }
    pos_ += (n + 7) / 8;
    return m;
  }
  std::size_t pos() const noexcept { return pos_; }

 private:
  void need(std::size_t n) const { require(pos_ + n <= size_, ErrorKind::corrupt, "truncated registry record"); }
  const char* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
};

inline std::uint32_t crc32(const char* data, std::size_t n) {
  boost::crc_32_type crc;
  crc.process_bytes(data, n);
  return crc.checksum();
}

inline std::vector<char> encode_header(std::uint64_t count) {
  Writer w;
  w.put_bytes(kMagic, 4);
  w.put(kVersion);
  w.put(count);
  return w.bytes;
}

inline std::vector<char> encode_record(const RegistrationRecord& r) {
  require(!r.id.empty() && r.id.size() <= 0xFFFF, ErrorKind::invalid_argument, "record id must be 1..65535 bytes");
  require(r.fn_2d.size() == kFeatureBits && r.fn_depth.size() == kFeatureBits, ErrorKind::shape,
          "record features must have 1600 entries");
  Writer w;
  w.put(static_cast<std::uint16_t>(r.id.size()));
  w.put_bytes(r.id.data(), r.id.size());
  w.put_bytes(r.fn_2d.values.data(), kFeatureBits * sizeof(double));
  w.put_bytes(r.fn_depth.values.data(), kFeatureBits * sizeof(double));
  w.put_bits(r.o_2d.bits);
  w.put_bits(r.o_depth.bits);
  w.put_bits(r.w_2d.bits);
  w.put_bits(r.w_depth.bits);
  w.put(crc32(w.bytes.data(), w.bytes.size()));
  return w.bytes;
}

// Decodes one record starting at the reader position; validates CRC and shares.
inline RegistrationRecord decode_record(const char* data, std::size_t size, std::size_t& consumed) {
  Reader rd(data, size);
  RegistrationRecord r;
  const auto id_len = rd.get<std::uint16_t>();
  r.id = rd.get_string(id_len);
  r.fn_2d = FeatureVector{rd.get_doubles(kFeatureBits), Role::two_d, false};
  r.fn_depth = FeatureVector{rd.get_doubles(kFeatureBits), Role::depth, false};
  BitMatrix o2 = rd.get_bits(kShareSide, kShareSide);
  BitMatrix od = rd.get_bits(kShareSide, kShareSide);
  BitMatrix w2 = rd.get_bits(kWatermarkSide, kWatermarkSide);
  BitMatrix wd = rd.get_bits(kWatermarkSide, kWatermarkSide);
  const std::size_t body = rd.pos();
  const auto stored = rd.get<std::uint32_t>();
  require(stored == crc32(data, body), ErrorKind::corrupt, "checksum mismatch in record '" + r.id + "'");
  r.o_2d = Share(std::move(o2), ShareKind::ownership);
  r.o_depth = Share(std::move(od), ShareKind::ownership);
  r.w_2d = Watermark(std::move(w2));
  r.w_depth = Watermark(std::move(wd));
  consumed = rd.pos();
  return r;
}

}  // namespace registry_format

struct FeatureEntry {
  const std::string& id;
  const FeatureVector& fn_2d;
  const FeatureVector& fn_depth;
};

// In-memory snapshot of a registry file plus append access.
class Registry {
 public:
  // Opens `path`, creating an empty registry if it does not exist.
  static Registry open(const std::filesystem::path& path) {
    Registry reg;
    reg.path_ = path;
    if (!std::filesystem::exists(path)) {
      const auto header = registry_format::encode_header(0);
      std::ofstream out(path, std::ios::binary);
      require(static_cast<bool>(out), ErrorKind::io, "cannot create registry " + path.string());
      out.write(header.data(), static_cast<std::streamsize>(header.size()));
      require(static_cast<bool>(out), ErrorKind::io, "cannot write registry " + path.string());
    }
    reg.reload();
    reg.open_ = true;
    return reg;
  }

  bool is_open() const noexcept { return open_; }
  void close() noexcept { open_ = false; }
  const std::filesystem::path& path() const noexcept { return path_; }

  std::size_t size() const {
    check_open();
    return records_.size();
  }

  // Appends a record durably and returns the new record count.
  std::size_t register_record(const RegistrationRecord& rec) {
    check_open();
    const std::vector<char> bytes = registry_format::encode_record(rec);

    const int fd = ::open(path_.c_str(), O_RDWR);
    require(fd >= 0, ErrorKind::io, "cannot open registry for writing: " + path_.string());
    struct FdGuard {
      int fd;
      ~FdGuard() {
        ::flock(fd, LOCK_UN);
        ::close(fd);
      }
    } guard{fd};
    require(::flock(fd, LOCK_EX) == 0, ErrorKind::io, "cannot lock registry " + path_.string());

    // Another writer may have appended since our snapshot.
    reload();
    require(!index_.contains(rec.id), ErrorKind::duplicate_id, "duplicate id '" + rec.id + "'");

    const auto end = static_cast<off_t>(committed_bytes_);
    require(::pwrite(fd, bytes.data(), bytes.size(), end) == static_cast<ssize_t>(bytes.size()), ErrorKind::io,
            "registry append failed");
    require(::ftruncate(fd, end + static_cast<off_t>(bytes.size())) == 0, ErrorKind::io, "registry truncate failed");
    require(::fsync(fd) == 0, ErrorKind::io, "registry sync failed");
    const std::uint64_t count = records_.size() + 1;
    require(::pwrite(fd, &count, sizeof count, registry_format::kCountOffset) == sizeof count, ErrorKind::io,
            "registry header update failed");
    require(::fsync(fd) == 0, ErrorKind::io, "registry sync failed");

    index_.emplace(rec.id, records_.size());
    records_.push_back(rec);
    records_.back().o_2d.kind = ShareKind::ownership;
    records_.back().o_depth.kind = ShareKind::ownership;
    committed_bytes_ += bytes.size();
    return records_.size();
  }

  OwnershipEntry lookup_ownership(const std::string& id) const {
    const RegistrationRecord& r = record(id);
    return {r.o_2d, r.o_depth, r.w_2d, r.w_depth};
  }

  const RegistrationRecord& record(const std::string& id) const {
    check_open();
    auto it = index_.find(id);
    require(it != index_.end(), ErrorKind::unknown_id, "unknown id '" + id + "'");
    return records_[it->second];
  }

  bool contains(const std::string& id) const {
    check_open();
    return index_.contains(id);
  }

  // Visits every record once, in insertion order.
  template <typename Fn>
  void for_each_feature(Fn&& fn) const {
    check_open();
    for (const auto& r : records_) fn(FeatureEntry{r.id, r.fn_2d, r.fn_depth});
  }

  std::vector<std::string> ids() const {
    check_open();
    std::vector<std::string> out;
    out.reserve(records_.size());
    for (const auto& r : records_) out.push_back(r.id);
    return out;
  }

  // Writes a fresh file holding the same records in the same order.
  void rewrite(const std::filesystem::path& out_path) const {
    check_open();
    std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(out), ErrorKind::io, "cannot create " + out_path.string());
    const auto header = registry_format::encode_header(records_.size());
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    for (const auto& r : records_) {
      const auto bytes = registry_format::encode_record(r);
      out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    }
    require(static_cast<bool>(out), ErrorKind::io, "write failed for " + out_path.string());
  }

 private:
  void check_open() const { require(open_, ErrorKind::closed, "registry is closed"); }

  void reload() {
    std::ifstream in(path_, std::ios::binary);
    require(static_cast<bool>(in), ErrorKind::io, "cannot open registry " + path_.string());
    std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    require(buf.size() >= registry_format::kHeaderSize, ErrorKind::corrupt, "registry header truncated");
    require(std::memcmp(buf.data(), registry_format::kMagic, 4) == 0, ErrorKind::corrupt, "bad registry magic");
    registry_format::Reader hdr(buf.data() + 4, buf.size() - 4);
    const auto version = hdr.get<std::uint16_t>();
    require(version == registry_format::kVersion, ErrorKind::corrupt,
            "unsupported registry version " + std::to_string(version));
    const auto count = hdr.get<std::uint64_t>();

    std::vector<RegistrationRecord> records;
    std::unordered_map<std::string, std::size_t> index;
    std::size_t pos = registry_format::kHeaderSize;
    for (std::uint64_t n = 0; n < count; ++n) {
      std::size_t used = 0;
      records.push_back(registry_format::decode_record(buf.data() + pos, buf.size() - pos, used));
      require(index.emplace(records.back().id, records.size() - 1).second, ErrorKind::corrupt,
              "duplicate id '" + records.back().id + "' in registry file");
      pos += used;
    }
    records_ = std::move(records);
    index_ = std::move(index);
    committed_bytes_ = pos;
  }

  std::filesystem::path path_;
  bool open_ = false;
  std::vector<RegistrationRecord> records_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t committed_bytes_ = 0;
};

}  // namespace zw3d
