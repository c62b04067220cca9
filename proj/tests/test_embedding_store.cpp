#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <random>

#include "support/oracles.hpp"
#include "support/temp_dir.hpp"
#include "vidprobe/embedding_store.hpp"

using namespace vidprobe;

namespace {

EmbeddingStore random_store(std::size_t n, std::uint32_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  EmbeddingStore s("siglip-base", dim);
  for (std::size_t i = 0; i < n; ++i) {
    s.add({"clip_" + std::to_string(i), i % 3 == 0 ? ClassLabel::Real : ClassLabel::Fake,
           i % 3 == 0 ? "youtube-vos" : "sora", oracle::random_vector(rng, dim)});
  }
  return s;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::Io;
}

}  // namespace

// --- average_frame_features -------------------------------------------------

TEST(AverageFrameFeatures, SingleFrameIsIdentity) {
  auto block = FrameFeatureBlock::from_rows({{1.0f, 2.0f}});
  EXPECT_EQ(average_frame_features(block), (std::vector<float>{1.0f, 2.0f}));
}

TEST(AverageFrameFeatures, Midpoint) {
  auto block = FrameFeatureBlock::from_rows({{0.0f, 0.0f}, {2.0f, 4.0f}});
  EXPECT_EQ(average_frame_features(block), (std::vector<float>{1.0f, 2.0f}));
}

TEST(AverageFrameFeatures, MatchesLongDoubleMean) {
  std::mt19937_64 rng(11);
  std::vector<std::vector<float>> rows;
  for (int i = 0; i < 16; ++i) rows.push_back(oracle::random_vector(rng, 8));
  const auto got = average_frame_features(FrameFeatureBlock::from_rows(rows));
  const auto want = oracle::mean_rows(rows);
  for (std::size_t j = 0; j < 8; ++j) {
    EXPECT_LE(std::abs(got[j] - want[j]), 1e-6L * std::max<long double>(1e-3L, std::abs(want[j]))) << j;
  }
}

TEST(AverageFrameFeatures, Errors) {
  EXPECT_EQ(code_of([] { average_frame_features(FrameFeatureBlock{}); }), ErrorCode::NoFrames);
  const float nan = std::numeric_limits<float>::quiet_NaN();
  EXPECT_EQ(code_of([&] { average_frame_features(FrameFeatureBlock::from_rows({{1.0f, nan}})); }),
            ErrorCode::InvalidFeature);
  EXPECT_EQ(code_of([] { FrameFeatureBlock::from_rows({{1.0f}, {1.0f, 2.0f}}); }), ErrorCode::DimensionMismatch);
}

TEST(AverageFrameFeatures, PermutationInvariant) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::vector<float>> rows;
    for (int i = 0; i < 12; ++i) rows.push_back(oracle::random_vector(rng, 6));
    const auto a = average_frame_features(FrameFeatureBlock::from_rows(rows));
    std::shuffle(rows.begin(), rows.end(), rng);
    const auto b = average_frame_features(FrameFeatureBlock::from_rows(rows));
    for (std::size_t j = 0; j < a.size(); ++j) EXPECT_NEAR(a[j], b[j], 1e-6f * std::max(1.0f, std::abs(a[j])));
  }
}

TEST(AverageFrameFeatures, CopiesOfOneVectorAverageToIt) {
  std::mt19937_64 rng(6);
  for (int k : {1, 2, 3, 7, 16, 64}) {
    const auto v = oracle::random_vector(rng, 10);
    std::vector<std::vector<float>> rows(k, v);
    EXPECT_EQ(average_frame_features(FrameFeatureBlock::from_rows(rows)), v) << k;
  }
}

// --- euclidean_distance -----------------------------------------------------

TEST(EuclideanDistance, Basics) {
  EXPECT_EQ(euclidean_distance(std::vector<float>{1.5f, -2.0f}, std::vector<float>{1.5f, -2.0f}), 0.0);
  EXPECT_EQ(euclidean_distance(std::vector<float>{0, 0}, std::vector<float>{3, 4}), 5.0);
  EXPECT_EQ(code_of([] { euclidean_distance(std::vector<float>{0}, std::vector<float>{0, 1}); }),
            ErrorCode::DimensionMismatch);
}

TEST(EuclideanDistance, MatchesLongDoubleOracle) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = oracle::random_vector(rng, 32), b = oracle::random_vector(rng, 32);
    const long double want = oracle::distance(a, b);
    EXPECT_LE(std::abs(euclidean_distance(a, b) - want), 1e-9L * want);
  }
}

TEST(EuclideanDistance, MetricAxiomsAndScaling) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<float> cdist(-5.0f, 5.0f);
  for (int trial = 0; trial < 500; ++trial) {
    const auto a = oracle::random_vector(rng, 12), b = oracle::random_vector(rng, 12), c = oracle::random_vector(rng, 12);
    const double ab = euclidean_distance(a, b), ba = euclidean_distance(b, a);
    EXPECT_GE(ab, 0.0);
    EXPECT_EQ(ab, ba);
    EXPECT_LE(ab, euclidean_distance(a, c) + euclidean_distance(c, b) + 1e-7);

    const float k = cdist(rng);
    std::vector<float> ka(a), kb(b);
    for (auto& x : ka) x *= k;
    for (auto& x : kb) x *= k;
    EXPECT_NEAR(euclidean_distance(ka, kb), std::abs(k) * ab, 1e-6 * std::max(1e-12, std::abs(k) * ab));
  }
}

// --- store format -----------------------------------------------------------

TEST(StoreFormat, EmptyStoreIsHeaderOnly) {
  EmbeddingStore s("videomae", 4);
  const auto bytes = serialize_store(s);
  // magic + version + (2 + 8) model id + dim + count
  EXPECT_EQ(bytes.size(), 4u + 4 + 2 + 8 + 4 + 8);
  EXPECT_EQ(bytes.substr(0, 4), "VAEB");
  const auto back = parse_store(bytes);
  EXPECT_EQ(back, s);
  EXPECT_EQ(back.size(), 0u);
}

TEST(StoreFormat, ExactByteLayout) {
  EmbeddingStore s("m", 1);
  s.add({"a", ClassLabel::Fake, "xy", {1.0f}});
  const std::string expected("VAEB\x01\x00\x00\x00\x01\x00m\x01\x00\x00\x00\x01\x00\x00\x00\x00\x00\x00\x00"
                             "\x01\x00" "a\x01\x02\x00xy\x00\x00\x80\x3f",
                             4 + 4 + 3 + 4 + 8 + 3 + 1 + 4 + 4);
  EXPECT_EQ(serialize_store(s), expected);
}

TEST(StoreFormat, SingleRecordRoundTripThroughFile) {
  test::TempDir dir;
  EmbeddingStore s("siglip-base", 3);
  s.add({"latte_1_0000", ClassLabel::Fake, "latte", {0.5f, -0.0f, 1e-30f}});
  const auto path = dir.path() / "one.vaeb";
  const auto n = write_store(s, path);
  EXPECT_EQ(n, std::filesystem::file_size(path));
  EXPECT_FALSE(std::filesystem::exists(dir.path() / "one.vaeb.tmp"));
  EXPECT_EQ(read_store(path), s);
}

TEST(StoreFormat, LargeStoreIsAFixpoint) {
  const auto s = random_store(1000, 24, 99);
  const auto bytes = serialize_store(s);
  const auto back = parse_store(bytes);
  EXPECT_EQ(back, s);
  EXPECT_EQ(serialize_store(back), bytes);
}

TEST(StoreFormat, RejectsBadMagicAndVersion) {
  auto bytes = serialize_store(random_store(3, 4, 1));
  auto bad = bytes;
  bad[0] = 'X';
  EXPECT_EQ(code_of([&] { parse_store(bad); }), ErrorCode::UnsupportedFormat);
  bad = bytes;
  bad[4] = 2;
  EXPECT_EQ(code_of([&] { parse_store(bad); }), ErrorCode::UnsupportedFormat);
  EXPECT_EQ(code_of([&] { parse_store(""); }), ErrorCode::UnsupportedFormat);
}

TEST(StoreFormat, EveryTruncationIsCorrupt) {
  const auto bytes = serialize_store(random_store(3, 4, 2));
  for (std::size_t len = 4; len < bytes.size(); ++len) {
    EXPECT_EQ(code_of([&] { parse_store(bytes.substr(0, len)); }), ErrorCode::CorruptStore) << len;
  }
  EXPECT_EQ(code_of([&] { parse_store(bytes + "z"); }), ErrorCode::CorruptStore);
}

TEST(StoreFormat, DuplicateIdsAndBadPayloads) {
  EmbeddingStore s("m", 2);
  s.add({"a", ClassLabel::Real, "youtube-vos", {1, 2}});
  s.add({"b", ClassLabel::Fake, "sora", {3, 4}});
  auto bytes = serialize_store(s);
  // Rename "b" to "a".
  const auto pos = bytes.rfind('b');
  bytes[pos] = 'a';
  EXPECT_EQ(code_of([&] { parse_store(bytes); }), ErrorCode::DuplicateRecord);

  EXPECT_EQ(code_of([&] { s.add({"a", ClassLabel::Real, "x", {0, 0}}); }), ErrorCode::DuplicateRecord);
  EXPECT_EQ(code_of([&] { s.add({"c", ClassLabel::Real, "x", {0}}); }), ErrorCode::DimensionMismatch);
  EXPECT_EQ(code_of([&] { s.add({"c", ClassLabel::Real, "x", {0, std::numeric_limits<float>::infinity()}}); }),
            ErrorCode::InvalidFeature);
  EXPECT_EQ(code_of([&] { s.add({"", ClassLabel::Real, "x", {0, 0}}); }), ErrorCode::InvariantViolation);
}

TEST(StoreFormat, ReadMissingFileIsIoError) {
  EXPECT_EQ(code_of([] { read_store("/nonexistent/x.vaeb"); }), ErrorCode::Io);
}
