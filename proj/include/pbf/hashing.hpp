#pragma once

#include <bit>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "pbf/errors.hpp"
#include "pbf/murmur3.hpp"

namespace pbf {

using Element = std::span<const std::byte>;

inline Element as_element(std::string_view s) noexcept {
  return std::as_bytes(std::span(s.data(), s.size()));
}

// Numeric values are the PBF1 on-disk scheme codes.
enum class SchemeKind : std::uint8_t {
  Independent = 0,
  WideSplit = 1,
  NaiveDouble = 2,
  SafeDouble = 3,
};

inline constexpr int kWideHashBits = 128;

struct HashScheme {
  SchemeKind kind = SchemeKind::Independent;
  std::uint64_t seed = 0;

  friend constexpr bool operator==(const HashScheme&, const HashScheme&) = default;
};

/// Address space the k indices range over: one flat range of m bits, or k
/// disjoint parts of m/k bits each.
class IndexLayout {
 public:
  enum class Mode : std::uint8_t { Flat, PerPart };

  static IndexLayout flat(std::uint64_t m, std::uint32_t k) { return IndexLayout(Mode::Flat, m, k); }
  static IndexLayout per_part(std::uint64_t m, std::uint32_t k) {
    return IndexLayout(Mode::PerPart, m, k);
  }

  Mode mode() const noexcept { return mode_; }
  std::uint64_t m() const noexcept { return m_; }
  std::uint32_t k() const noexcept { return k_; }
  /// Size of the range each index is drawn from.
  std::uint64_t range() const noexcept { return mode_ == Mode::Flat ? m_ : m_ / k_; }

  /// Position of entry `i` in the global m-bit address space.
  std::uint64_t global(std::uint32_t i, std::uint64_t index) const noexcept {
    return mode_ == Mode::Flat ? index : i * range() + index;
  }

  friend constexpr bool operator==(const IndexLayout&, const IndexLayout&) = default;

 private:
  IndexLayout(Mode mode, std::uint64_t m, std::uint32_t k) : mode_(mode), m_(m), k_(k) {
    if (k == 0 || m == 0) throw InvalidParams("layout needs m >= 1 and k >= 1");
    if (mode == Mode::PerPart && m % k != 0)
      throw InvalidParams(fmt::format("per-part layout needs k | m (m={}, k={})", m, k));
  }

  Mode mode_;
  std::uint64_t m_;
  std::uint32_t k_;
};

struct IndexSequence {
  std::vector<std::uint64_t> indices;
  IndexLayout layout;

  std::uint64_t global(std::uint32_t i) const noexcept { return layout.global(i, indices[i]); }
};

namespace detail {

using u128 = unsigned __int128;

inline u128 wide(Hash128 h) noexcept { return (static_cast<u128>(h.high) << 64) | h.low; }

inline void check_wide_split(const IndexLayout& layout) {
  const std::uint64_t r = layout.range();
  if (!std::has_single_bit(r))
    throw InvalidParams(fmt::format("WideSplit needs a power-of-two range, got {}", r));
  const std::uint64_t need = std::uint64_t{layout.k()} * std::countr_zero(r);
  if (need > kWideHashBits)
    throw InvalidParams(fmt::format("WideSplit needs {} hash bits, only {} available", need,
                                    kWideHashBits));
}

}  // namespace detail

/// The (h1, h2) pair the double-hashing schemes step with.
inline Hash128 double_hash_pair(const HashScheme& scheme, Element element) noexcept {
  return murmur3_128(element, scheme.seed);
}

/// Allocation-free core of derive_indices; `out` must hold layout.k() entries.
///
/// Range reduction is `raw mod range` on 64-bit (or exact 128-bit) values, so
/// indices for a range m' dividing m equal the indices for m reduced mod m'.
/// fold_standard relies on this.
inline void derive_indices_into(const HashScheme& scheme, Element element, const IndexLayout& layout,
                                std::span<std::uint64_t> out) {
  const std::uint32_t k = layout.k();
  const std::uint64_t r = layout.range();
  switch (scheme.kind) {
    case SchemeKind::Independent:
      for (std::uint32_t i = 0; i < k; ++i)
        out[i] = murmur3_128(element, derive_seed(scheme.seed, i)).low % r;
      return;
    case SchemeKind::WideSplit: {
      detail::check_wide_split(layout);
      const detail::u128 bits = detail::wide(murmur3_128(element, scheme.seed));
      const std::uint64_t mask = r - 1;
      // Flat: k fields of floor(128/k) bits, low log2(m) bits kept.
      // PerPart: k packed fields of log2(m/k) bits.
      const unsigned stride = layout.mode() == IndexLayout::Mode::Flat
                                  ? static_cast<unsigned>(kWideHashBits / k)
                                  : static_cast<unsigned>(std::countr_zero(r));
      for (std::uint32_t i = 0; i < k; ++i) {
        const unsigned shift = i * stride;
        out[i] = shift >= 128 ? 0 : static_cast<std::uint64_t>(bits >> shift) & mask;
      }
      return;
    }
    case SchemeKind::NaiveDouble:
    case SchemeKind::SafeDouble: {
      const Hash128 h = double_hash_pair(scheme, element);
      std::uint64_t step = h.high;
      if (scheme.kind == SchemeKind::SafeDouble && std::has_single_bit(r)) step |= 1;
      const std::uint64_t base = h.low % r;
      const std::uint64_t stride = step % r;
      for (std::uint32_t i = 0; i < k; ++i)
        out[i] = static_cast<std::uint64_t>((base + static_cast<detail::u128>(i) * stride) % r);
      return;
    }
  }
  throw InvalidParams("unknown hash scheme");
}

inline IndexSequence derive_indices(const HashScheme& scheme, Element element, const IndexLayout& layout) {
  IndexSequence seq{std::vector<std::uint64_t>(layout.k()), layout};
  derive_indices_into(scheme, element, layout, seq.indices);
  return seq;
}

inline IndexSequence derive_indices(const HashScheme& scheme, std::string_view element,
                                    const IndexLayout& layout) {
  return derive_indices(scheme, as_element(element), layout);
}

/// Number of distinct positions among `indices` (small k: quadratic scan).
inline std::uint32_t distinct_count(std::span<const std::uint64_t> indices) noexcept {
  std::uint32_t d = 0;
  for (std::size_t i = 0; i < indices.size(); ++i) {
    bool seen = false;
    for (std::size_t j = 0; j < i && !seen; ++j) seen = indices[j] == indices[i];
    d += seen ? 0 : 1;
  }
  return d;
}

/// Distinct global bit positions; always k for per-part layouts.
inline std::uint32_t distinct_count(const IndexSequence& seq) noexcept {
  if (seq.layout.mode() == IndexLayout::Mode::PerPart) return seq.layout.k();
  return distinct_count(std::span<const std::uint64_t>(seq.indices));
}

enum class FilterKind : std::uint8_t { Standard, Partitioned };

/// Hash bits one block consumes when indices are sliced from a hash word.
inline std::uint64_t hash_bits_needed(FilterKind kind, std::uint64_t m_block, std::uint32_t k) {
  if (!std::has_single_bit(m_block))
    throw InvalidParams(fmt::format("block size {} is not a power of two", m_block));
  if (k == 0) throw InvalidParams("k must be >= 1");
  if (kind == FilterKind::Standard) return std::uint64_t{k} * std::countr_zero(m_block);
  if (m_block % k != 0) throw InvalidParams(fmt::format("k={} does not divide block size {}", k, m_block));
  return std::uint64_t{k} * std::countr_zero(m_block / k);
}

inline std::string_view to_string(SchemeKind s) noexcept {
  switch (s) {
    case SchemeKind::Independent: return "independent";
    case SchemeKind::WideSplit: return "wide-split";
    case SchemeKind::NaiveDouble: return "naive-double";
    case SchemeKind::SafeDouble: return "safe-double";
  }
  return "?";
}

inline SchemeKind parse_scheme(std::string_view s) {
  for (auto kind : {SchemeKind::Independent, SchemeKind::WideSplit, SchemeKind::NaiveDouble,
                    SchemeKind::SafeDouble})
    if (to_string(kind) == s) return kind;
  throw InvalidParams(fmt::format("unknown hash scheme '{}'", s));
}

}  // namespace pbf
