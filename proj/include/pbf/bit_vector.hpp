#pragma once

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace pbf {

/// Fixed-length packed bit array. Bit i lives in word i/64 at bit i%64, which
/// serializes little-endian to byte i/8, bit i%8. Bits past length() stay zero.
class BitVector {
 public:
  BitVector() = default;
  explicit BitVector(std::uint64_t length) : length_(length), words_((length + 63) / 64, 0) {}

  std::uint64_t length() const noexcept { return length_; }
  std::size_t byte_size() const noexcept { return static_cast<std::size_t>((length_ + 7) / 8); }

  void set(std::uint64_t i) noexcept { words_[i >> 6] |= std::uint64_t{1} << (i & 63); }
  bool test(std::uint64_t i) const noexcept { return (words_[i >> 6] >> (i & 63)) & 1; }
  void clear() noexcept { std::fill(words_.begin(), words_.end(), 0); }

  std::uint64_t popcount() const noexcept {
    std::uint64_t c = 0;
    for (auto w : words_) c += static_cast<std::uint64_t>(std::popcount(w));
    return c;
  }

  /// Set bits in [begin, end).
  std::uint64_t popcount(std::uint64_t begin, std::uint64_t end) const noexcept {
    std::uint64_t c = 0;
    while (begin < end && (begin & 63) != 0) c += test(begin++) ? 1 : 0;
    while (begin + 64 <= end) {
      c += static_cast<std::uint64_t>(std::popcount(words_[begin >> 6]));
      begin += 64;
    }
    while (begin < end) c += test(begin++) ? 1 : 0;
    return c;
  }

  bool none(std::uint64_t begin, std::uint64_t end) const noexcept { return popcount(begin, end) == 0; }

  BitVector& operator|=(const BitVector& o) noexcept {
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= o.words_[i];
    return *this;
  }
  BitVector& operator&=(const BitVector& o) noexcept {
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= o.words_[i];
    return *this;
  }

  std::span<std::uint64_t> words() noexcept { return words_; }
  std::span<const std::uint64_t> words() const noexcept { return words_; }

  /// Zeroes the unused high bits of the last word.
  void trim() noexcept {
    if (length_ % 64 != 0 && !words_.empty())
      words_.back() &= (std::uint64_t{1} << (length_ % 64)) - 1;
  }

  void append_bytes(std::vector<std::byte>& out) const {
    const std::size_t n = byte_size();
    for (std::size_t b = 0; b < n; ++b)
      out.push_back(static_cast<std::byte>((words_[b / 8] >> (8 * (b % 8))) & 0xff));
  }

  /// Inverse of append_bytes; `bytes` must hold exactly byte_size() entries.
  static BitVector from_bytes(std::uint64_t length, std::span<const std::byte> bytes) {
    BitVector v(length);
    for (std::size_t b = 0; b < bytes.size(); ++b)
      v.words_[b / 8] |= static_cast<std::uint64_t>(bytes[b]) << (8 * (b % 8));
    return v;
  }

  friend bool operator==(const BitVector&, const BitVector&) = default;

 private:
  std::uint64_t length_ = 0;
  std::vector<std::uint64_t> words_;
};

}  // namespace pbf
