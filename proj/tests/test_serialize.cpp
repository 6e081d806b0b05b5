#include <gtest/gtest.h>

#include <filesystem>

#include "support.hpp"

using namespace pbf;

namespace {

BloomFilter sample_filter(std::uint64_t m = 1000, Variant v = Variant::Standard) {
  BloomFilter f(FilterParams{m, 3, v, 0, {SchemeKind::NaiveDouble, 42}});
  for (int i = 0; i < 50; ++i) f.insert("item" + std::to_string(i));
  return f;
}

void put_u32(std::vector<std::byte>& b, std::size_t at, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b[at + i] = static_cast<std::byte>((v >> (8 * i)) & 0xff);
}

/// Recomputes the trailing checksum so a field edit reaches the field checks.
void reseal(std::vector<std::byte>& b) {
  put_u32(b, b.size() - 4, detail::crc32(std::span<const std::byte>(b).first(b.size() - 4)));
}

}  // namespace

TEST(Serialize, HeaderLayout) {
  const auto bytes = serialize(sample_filter());
  ASSERT_EQ(bytes.size(), 44u + 125u + 4u);
  EXPECT_EQ(bytes[0], std::byte{'P'});
  EXPECT_EQ(bytes[3], std::byte{'1'});
  EXPECT_EQ(bytes[5], std::byte{2});  // naive-double
  EXPECT_EQ(detail::get_le<std::uint32_t>(bytes, 8), 3u);
  EXPECT_EQ(detail::get_le<std::uint64_t>(bytes, 12), 1000u);
  EXPECT_EQ(detail::get_le<std::uint64_t>(bytes, 28), 42u);
  EXPECT_EQ(detail::get_le<std::uint64_t>(bytes, 36), 50u);
}

TEST(Serialize, Crc32MatchesStandardCheckValue) {
  const std::string s = "123456789";
  EXPECT_EQ(detail::crc32(std::as_bytes(std::span(s.data(), s.size()))), 0xCBF43926u);
}

TEST(Serialize, RandomFiltersRoundTrip) {
  SplitMix64 rng(2024);
  for (int t = 0; t < 200; ++t) {
    BloomFilter f(pbf::testing::random_params(rng));
    const auto n = rng.below(100);
    for (std::uint64_t i = 0; i < n; ++i) f.insert(random_element(rng));
    const auto bytes = serialize(f);
    const BloomFilter g = deserialize(bytes);
    EXPECT_EQ(f, g);
    EXPECT_EQ(serialize(g), bytes);
  }
}

TEST(Serialize, FileRoundTrip) {
  const auto path = (std::filesystem::temp_directory_path() / "pbf_test_roundtrip.pbf").string();
  const BloomFilter f = sample_filter(4095, Variant::Partitioned);
  save(f, path);
  EXPECT_EQ(load(path), f);
  std::filesystem::remove(path);
  EXPECT_THROW(load(path), Error);
}

TEST(Serialize, BadMagic) {
  auto b = serialize(sample_filter());
  b[0] = std::byte{'X'};
  EXPECT_THROW(deserialize(b), BadMagic);
  EXPECT_THROW(deserialize(std::span<const std::byte>(b).first(2)), BadMagic);
  EXPECT_THROW(deserialize(std::vector<std::byte>{}), BadMagic);
}

TEST(Serialize, UnsupportedVersion) {
  auto b = serialize(sample_filter());
  b[3] = std::byte{'2'};
  EXPECT_THROW(deserialize(b), UnsupportedVersion);
}

TEST(Serialize, LengthMismatch) {
  auto b = serialize(sample_filter());
  EXPECT_THROW(deserialize(std::span<const std::byte>(b).first(b.size() - 1)), LengthMismatch);
  EXPECT_THROW(deserialize(std::span<const std::byte>(b).first(20)), LengthMismatch);
  b.push_back(std::byte{0});
  EXPECT_THROW(deserialize(b), LengthMismatch);
}

TEST(Serialize, ChecksumMismatch) {
  auto b = serialize(sample_filter());
  b[60] ^= std::byte{0x10};
  EXPECT_THROW(deserialize(b), ChecksumMismatch);
  auto c = serialize(sample_filter());
  c[36] ^= std::byte{0x01};  // inserted_count
  EXPECT_THROW(deserialize(c), ChecksumMismatch);
}

TEST(Serialize, UnknownCodesAndReservedField) {
  auto b = serialize(sample_filter());
  b[4] = std::byte{7};
  reseal(b);
  EXPECT_THROW(deserialize(b), UnsupportedVersion);
  auto c = serialize(sample_filter());
  c[5] = std::byte{4};
  reseal(c);
  EXPECT_THROW(deserialize(c), UnsupportedVersion);
  auto d = serialize(sample_filter());
  d[6] = std::byte{1};
  reseal(d);
  EXPECT_THROW(deserialize(d), UnsupportedVersion);
}

TEST(Serialize, InvalidFieldsAndPadding) {
  auto b = serialize(sample_filter());
  put_u32(b, 8, 0);  // k = 0
  reseal(b);
  EXPECT_THROW(deserialize(b), FormatError);

  // m = 1000 is a multiple of 8: use m = 1001 to get padding bits.
  auto c = serialize(sample_filter(1001));
  c[44 + 125] |= std::byte{0x80};
  reseal(c);
  EXPECT_THROW(deserialize(c), FormatError);
}

TEST(Serialize, ErrorHierarchy) {
  auto b = serialize(sample_filter());
  b[60] ^= std::byte{0x10};
  try {
    deserialize(b);
    FAIL();
  } catch (const FormatError&) {
  }
}
