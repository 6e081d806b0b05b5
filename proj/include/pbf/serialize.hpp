#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include <boost/crc.hpp>
#include <fmt/format.h>

#include "pbf/errors.hpp"
#include "pbf/filter.hpp"

// PBF1 layout, little-endian:
//   0  magic "PBF1"        4 bytes
//   4  variant             u8
//   5  scheme              u8
//   6  reserved (zero)     u16
//   8  k                   u32
//  12  m                   u64
//  20  block_bits          u64
//  28  seed                u64
//  36  inserted_count      u64
//  44  payload             ceil(m/8) bytes, bit i at byte i/8 bit i%8
//   .  CRC32 of everything before it (reflected, poly 0xEDB88320)

namespace pbf {

inline constexpr std::size_t kHeaderBytes = 44;
inline constexpr std::size_t kCrcBytes = 4;

namespace detail {

template <typename T>
void put_le(std::vector<std::byte>& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xff));
}

template <typename T>
T get_le(std::span<const std::byte> in, std::size_t at) {
  T v = 0;
  for (std::size_t i = sizeof(T); i > 0; --i) v = static_cast<T>((v << 8) | static_cast<T>(in[at + i - 1]));
  return v;
}

inline std::uint32_t crc32(std::span<const std::byte> data) {
  boost::crc_32_type crc;
  crc.process_bytes(data.data(), data.size());
  return crc.checksum();
}

}  // namespace detail

inline std::vector<std::byte> serialize(const BloomFilter& f) {
  const FilterParams& p = f.params();
  std::vector<std::byte> out;
  out.reserve(kHeaderBytes + f.bits().byte_size() + kCrcBytes);
  for (char c : {'P', 'B', 'F', '1'}) out.push_back(static_cast<std::byte>(c));
  detail::put_le<std::uint8_t>(out, static_cast<std::uint8_t>(p.variant));
  detail::put_le<std::uint8_t>(out, static_cast<std::uint8_t>(p.scheme.kind));
  detail::put_le<std::uint16_t>(out, 0);
  detail::put_le<std::uint32_t>(out, p.k);
  detail::put_le<std::uint64_t>(out, p.m);
  detail::put_le<std::uint64_t>(out, p.block_bits);
  detail::put_le<std::uint64_t>(out, p.scheme.seed);
  detail::put_le<std::uint64_t>(out, f.inserted_count());
  f.bits().append_bytes(out);
  detail::put_le<std::uint32_t>(out, detail::crc32(out));
  return out;
}

/// Checks run in order: magic, format version, length, checksum, field values.
inline BloomFilter deserialize(std::span<const std::byte> in) {
  if (in.size() < 3 || in[0] != std::byte{'P'} || in[1] != std::byte{'B'} || in[2] != std::byte{'F'})
    throw BadMagic();
  if (in.size() < 4 || in[3] != std::byte{'1'})
    throw UnsupportedVersion(in.size() < 4 ? std::string("missing format version")
                                           : fmt::format("unsupported format version byte 0x{:02x}",
                                                         static_cast<unsigned>(in[3])));
  if (in.size() < kHeaderBytes + kCrcBytes)
    throw LengthMismatch(fmt::format("file has {} bytes, shorter than the {}-byte header and checksum",
                                     in.size(), kHeaderBytes + kCrcBytes));

  const auto m = detail::get_le<std::uint64_t>(in, 12);
  const std::uint64_t payload = m / 8 + (m % 8 != 0);
  const std::uint64_t room = in.size() - kHeaderBytes - kCrcBytes;
  if (payload != room)
    throw LengthMismatch(fmt::format("payload for m={} needs {} bytes, file carries {}", m, payload, room));

  const std::size_t crc_at = in.size() - kCrcBytes;
  if (detail::get_le<std::uint32_t>(in, crc_at) != detail::crc32(in.first(crc_at))) throw ChecksumMismatch();

  const auto variant = detail::get_le<std::uint8_t>(in, 4);
  const auto scheme = detail::get_le<std::uint8_t>(in, 5);
  const auto reserved = detail::get_le<std::uint16_t>(in, 6);
  if (variant > 3) throw UnsupportedVersion(fmt::format("unknown variant code {}", variant));
  if (scheme > 3) throw UnsupportedVersion(fmt::format("unknown scheme code {}", scheme));
  if (reserved != 0) throw UnsupportedVersion("reserved header field is nonzero");

  FilterParams p;
  p.variant = static_cast<Variant>(variant);
  p.scheme.kind = static_cast<SchemeKind>(scheme);
  p.k = detail::get_le<std::uint32_t>(in, 8);
  p.m = m;
  p.block_bits = detail::get_le<std::uint64_t>(in, 20);
  p.scheme.seed = detail::get_le<std::uint64_t>(in, 28);
  const auto inserted = detail::get_le<std::uint64_t>(in, 36);
  try {
    p.validate();
  } catch (const InvalidParams& e) {
    throw FormatError(fmt::format("invalid filter parameters in file: {}", e.what()));
  }

  BitVector bits = BitVector::from_bytes(m, in.subspan(kHeaderBytes, payload));
  if (m % 8 != 0 && (static_cast<unsigned>(in[kHeaderBytes + payload - 1]) >> (m % 8)) != 0)
    throw FormatError("padding bits past m are set");
  return BloomFilter(p, std::move(bits), inserted);
}

inline void save(const BloomFilter& f, const std::string& path) {
  const auto bytes = serialize(f);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(fmt::format("cannot open '{}' for writing", path));
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw Error(fmt::format("write to '{}' failed", path));
}

inline BloomFilter load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(fmt::format("cannot open '{}'", path));
  std::vector<char> raw((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return deserialize(std::as_bytes(std::span(raw.data(), raw.size())));
}

}  // namespace pbf
