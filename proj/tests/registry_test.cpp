#include <gtest/gtest.h>

#include <fstream>
#include <iterator>
#include <random>

#include "test_util.hpp"
#include "zw3d/pipeline.hpp"

using namespace zw3d;
using zw3d::testing::TempDir;

namespace {

RegistrationRecord random_record(const std::string& id, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  auto feature = [&](Role role) {
    std::vector<double> raw(kFeatureBits);
    for (double& v : raw) v = g(rng);
    return zscore(raw, role);
  };
  auto watermark = [&] {
    BitMatrix m(40, 40);
    for (int r = 0; r < 40; ++r)
      for (int c = 0; c < 40; ++c) m.set(r, c, rng() & 1);
    return Watermark(m);
  };
  return make_record(id, {feature(Role::two_d), feature(Role::depth)}, watermark(), watermark());
}

std::vector<char> slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::invalid_argument;
}

}  // namespace

TEST(Registry, EmptyAndFirstRecord) {
  TempDir dir("reg_empty");
  Registry db = Registry::open(dir / "db.zw3d");
  EXPECT_EQ(db.size(), 0u);
  int visited = 0;
  db.for_each_feature([&](const FeatureEntry&) { ++visited; });
  EXPECT_EQ(visited, 0);
  std::mt19937_64 rng(1);
  EXPECT_EQ(db.register_record(random_record("a", rng)), 1u);
  EXPECT_EQ(db.size(), 1u);
}

TEST(Registry, DuplicateAndUnknownIds) {
  TempDir dir("reg_dup");
  Registry db = Registry::open(dir / "db.zw3d");
  std::mt19937_64 rng(2);
  db.register_record(random_record("a", rng));
  EXPECT_EQ(kind_of([&] { db.register_record(random_record("a", rng)); }), ErrorKind::duplicate_id);
  EXPECT_EQ(db.size(), 1u);
  EXPECT_EQ(kind_of([&] { db.lookup_ownership("missing"); }), ErrorKind::unknown_id);
}

TEST(Registry, HundredRecordsSurviveReopen) {
  TempDir dir("reg_100");
  std::vector<RegistrationRecord> written;
  {
    Registry db = Registry::open(dir / "db.zw3d");
    std::mt19937_64 rng(3);
    for (int i = 0; i < 100; ++i) {
      written.push_back(random_record("clip_" + std::to_string(i), rng));
      db.register_record(written.back());
    }
  }
  Registry db = Registry::open(dir / "db.zw3d");
  ASSERT_EQ(db.size(), 100u);
  std::vector<std::string> expected_ids;
  for (const auto& w : written) {
    expected_ids.push_back(w.id);
    const RegistrationRecord& r = db.record(w.id);
    EXPECT_EQ(r.fn_2d.values, w.fn_2d.values);
    EXPECT_EQ(r.fn_depth.values, w.fn_depth.values);
    EXPECT_EQ(r.fn_depth.role, Role::depth);
    const OwnershipEntry o = db.lookup_ownership(w.id);
    EXPECT_EQ(o.o_2d.bits, w.o_2d.bits);
    EXPECT_EQ(o.o_depth.bits, w.o_depth.bits);
    EXPECT_EQ(o.w_2d, w.w_2d);
    EXPECT_EQ(o.w_depth, w.w_depth);
  }
  EXPECT_EQ(db.ids(), expected_ids);
  std::vector<std::string> streamed;
  db.for_each_feature([&](const FeatureEntry& e) { streamed.push_back(e.id); });
  EXPECT_EQ(streamed, expected_ids);
}

TEST(Registry, RewriteIsByteIdentical) {
  TempDir dir("reg_rewrite");
  Registry db = Registry::open(dir / "db.zw3d");
  std::mt19937_64 rng(4);
  for (int i = 0; i < 5; ++i) db.register_record(random_record("r" + std::to_string(i), rng));
  db.rewrite(dir / "copy.zw3d");
  EXPECT_EQ(slurp(dir / "db.zw3d"), slurp(dir / "copy.zw3d"));
}

TEST(Registry, CorruptionDetected) {
  TempDir dir("reg_corrupt");
  {
    Registry db = Registry::open(dir / "db.zw3d");
    std::mt19937_64 rng(5);
    for (int i = 0; i < 3; ++i) db.register_record(random_record("r" + std::to_string(i), rng));
  }
  const auto good = slurp(dir / "db.zw3d");
  auto write = [&](const std::vector<char>& bytes) {
    std::ofstream out(dir / "db.zw3d", std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  };
  std::mt19937_64 rng(6);
  for (int t = 0; t < 20; ++t) {
    auto bad = good;
    const std::size_t at = 14 + rng() % (bad.size() - 14);
    bad[at] = static_cast<char>(bad[at] ^ (1 << (rng() % 8)));
    write(bad);
    EXPECT_EQ(kind_of([&] { Registry::open(dir / "db.zw3d"); }), ErrorKind::corrupt) << "byte " << at;
  }
  auto truncated = good;
  truncated.resize(good.size() - 10);
  write(truncated);
  EXPECT_EQ(kind_of([&] { Registry::open(dir / "db.zw3d"); }), ErrorKind::corrupt);
  auto magic = good;
  magic[0] = 'X';
  write(magic);
  EXPECT_EQ(kind_of([&] { Registry::open(dir / "db.zw3d"); }), ErrorKind::corrupt);
}

TEST(Registry, SharesValidatedOnRead) {
  std::mt19937_64 rng(7);
  RegistrationRecord rec = random_record("x", rng);
  auto bytes = registry_format::encode_record(rec);
  std::size_t used = 0;
  const RegistrationRecord back = registry_format::decode_record(bytes.data(), bytes.size(), used);
  EXPECT_EQ(used, bytes.size());
  EXPECT_EQ(back.o_2d.bits, rec.o_2d.bits);
}

TEST(Registry, ClosedHandleRejected) {
  TempDir dir("reg_closed");
  Registry db = Registry::open(dir / "db.zw3d");
  db.close();
  EXPECT_FALSE(db.is_open());
  std::mt19937_64 rng(8);
  EXPECT_EQ(kind_of([&] { db.register_record(random_record("a", rng)); }), ErrorKind::closed);
  EXPECT_EQ(kind_of([&] { db.size(); }), ErrorKind::closed);
}

TEST(Registry, SecondHandleSeesOtherWriters) {
  TempDir dir("reg_two");
  Registry a = Registry::open(dir / "db.zw3d");
  Registry b = Registry::open(dir / "db.zw3d");
  std::mt19937_64 rng(9);
  a.register_record(random_record("one", rng));
  EXPECT_EQ(kind_of([&] { b.register_record(random_record("one", rng)); }), ErrorKind::duplicate_id);
  EXPECT_EQ(b.register_record(random_record("two", rng)), 2u);
  EXPECT_EQ(Registry::open(dir / "db.zw3d").size(), 2u);
}
