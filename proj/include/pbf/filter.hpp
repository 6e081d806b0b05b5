#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "pbf/bit_vector.hpp"
#include "pbf/errors.hpp"
#include "pbf/hashing.hpp"

namespace pbf {

// Numeric values are the PBF1 on-disk variant codes.
enum class Variant : std::uint8_t {
  Standard = 0,
  Partitioned = 1,
  BlockedStandard = 2,
  BlockedPartitioned = 3,
};

inline constexpr std::uint64_t kDefaultBlockBits = 512;

inline constexpr bool is_blocked(Variant v) noexcept {
  return v == Variant::BlockedStandard || v == Variant::BlockedPartitioned;
}
inline constexpr bool is_partitioned(Variant v) noexcept {
  return v == Variant::Partitioned || v == Variant::BlockedPartitioned;
}

inline std::string_view to_string(Variant v) noexcept {
  switch (v) {
    case Variant::Standard: return "standard";
    case Variant::Partitioned: return "partitioned";
    case Variant::BlockedStandard: return "blocked-standard";
    case Variant::BlockedPartitioned: return "blocked-partitioned";
  }
  return "?";
}

inline Variant parse_variant(std::string_view s) {
  for (auto v : {Variant::Standard, Variant::Partitioned, Variant::BlockedStandard,
                 Variant::BlockedPartitioned})
    if (to_string(v) == s) return v;
  throw InvalidParams(fmt::format("unknown filter variant '{}'", s));
}

struct FilterParams {
  std::uint64_t m = 0;
  std::uint32_t k = 0;
  Variant variant = Variant::Standard;
  std::uint64_t block_bits = 0;  // 0 unless blocked
  HashScheme scheme{};

  void validate() const {
    if (k < 1 || m < k) throw InvalidParams(fmt::format("need m >= k >= 1 (m={}, k={})", m, k));
    if (!is_blocked(variant) && block_bits != 0)
      throw InvalidParams("block_bits must be 0 for unblocked variants");
    if (variant == Variant::Partitioned && m % k != 0)
      throw InvalidParams(fmt::format("partitioned filter needs k | m (m={}, k={})", m, k));
    if (is_blocked(variant)) {
      if (block_bits < k || m % block_bits != 0)
        throw InvalidParams(
            fmt::format("blocked filter needs k <= block_bits and block_bits | m (m={}, block_bits={})", m,
                        block_bits));
      if (variant == Variant::BlockedPartitioned && block_bits % k != 0)
        throw InvalidParams(fmt::format("blocked-partitioned needs k | block_bits (k={}, block_bits={})", k,
                                        block_bits));
    }
  }

  /// Layout the k in-range indices are derived over (a block for blocked variants).
  IndexLayout index_layout() const {
    const std::uint64_t range = is_blocked(variant) ? block_bits : m;
    return is_partitioned(variant) ? IndexLayout::per_part(range, k) : IndexLayout::flat(range, k);
  }

  std::uint64_t block_count() const noexcept { return is_blocked(variant) ? m / block_bits : 1; }

  friend bool operator==(const FilterParams&, const FilterParams&) = default;
};

// Seed stream of the block-selector hash; disjoint from the per-index streams 0..k-1.
inline constexpr std::uint64_t kBlockSelectorStream = 0xb10c'5e1e'c700'0000ULL;

class BloomFilter {
 public:
  explicit BloomFilter(const FilterParams& params) : params_(checked(params)), layout_(params_.index_layout()), bits_(params_.m) {}

  BloomFilter(const FilterParams& params, BitVector bits, std::uint64_t inserted_count)
      : params_(checked(params)), layout_(params_.index_layout()), bits_(std::move(bits)), inserted_count_(inserted_count) {
    if (bits_.length() != params_.m) throw InvalidParams("bit vector length does not match m");
    bits_.trim();
  }

  const FilterParams& params() const noexcept { return params_; }
  const BitVector& bits() const noexcept { return bits_; }
  std::uint64_t inserted_count() const noexcept { return inserted_count_; }
  std::uint64_t popcount() const noexcept { return bits_.popcount(); }

  /// Block an element maps to; 0 for unblocked variants.
  std::uint64_t block_of(Element element) const noexcept {
    if (!is_blocked(params_.variant)) return 0;
    const std::uint64_t h =
        murmur3_128(element, derive_seed(params_.scheme.seed, kBlockSelectorStream)).low;
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(h) * params_.block_count()) >> 64);
  }

  /// The k global bit positions of `element`, in hash order.
  void positions(Element element, std::span<std::uint64_t> out) const {
    derive_indices_into(params_.scheme, element, layout_, out);
    const std::uint64_t offset = block_of(element) * params_.block_bits;
    for (std::uint32_t i = 0; i < params_.k; ++i) out[i] = offset + layout_.global(i, out[i]);
  }

  std::vector<std::uint64_t> positions(Element element) const {
    std::vector<std::uint64_t> out(params_.k);
    positions(element, out);
    return out;
  }

  void insert(Element element) {
    with_positions(element, [&](std::span<const std::uint64_t> pos) {
      for (auto p : pos) bits_.set(p);
    });
    ++inserted_count_;
  }
  void insert(std::string_view element) { insert(as_element(element)); }

  bool query(Element element) const {
    bool hit = true;
    with_positions(element, [&](std::span<const std::uint64_t> pos) {
      for (auto p : pos)
        if (!bits_.test(p)) {
          hit = false;
          return;
        }
    });
    return hit;
  }
  bool query(std::string_view element) const { return query(as_element(element)); }

  /// Empties the filter, keeping its parameters.
  void clear() noexcept {
    bits_.clear();
    inserted_count_ = 0;
  }

  double fill_ratio() const noexcept {
    return static_cast<double>(bits_.popcount()) / static_cast<double>(params_.m);
  }

  std::vector<double> per_part_fill() const {
    if (params_.variant != Variant::Partitioned)
      throw WrongVariant("per-part fill is defined for partitioned filters only");
    const std::uint64_t part = params_.m / params_.k;
    std::vector<double> fills(params_.k);
    for (std::uint32_t i = 0; i < params_.k; ++i)
      fills[i] = static_cast<double>(bits_.popcount(i * part, (i + 1) * part)) / static_cast<double>(part);
    return fills;
  }

  BitVector& mutable_bits() noexcept { return bits_; }

  friend bool operator==(const BloomFilter& a, const BloomFilter& b) {
    return a.params_ == b.params_ && a.bits_ == b.bits_ && a.inserted_count_ == b.inserted_count_;
  }

 private:
  static const FilterParams& checked(const FilterParams& p) {
    p.validate();
    return p;
  }

  template <typename F>
  void with_positions(Element element, F&& f) const {
    constexpr std::uint32_t kInline = 64;
    if (params_.k <= kInline) {
      std::array<std::uint64_t, kInline> buf;
      std::span<std::uint64_t> pos(buf.data(), params_.k);
      positions(element, pos);
      f(std::span<const std::uint64_t>(pos));
    } else {
      auto pos = positions(element);
      f(std::span<const std::uint64_t>(pos));
    }
  }

  FilterParams params_;
  IndexLayout layout_;
  BitVector bits_;
  std::uint64_t inserted_count_ = 0;
};

namespace detail {
inline void require_same(const BloomFilter& a, const BloomFilter& b) {
  if (!(a.params() == b.params()))
    throw ParamsMismatch("filters differ in geometry, variant, scheme or seed");
}
}  // namespace detail

/// Bitwise OR; represents the union of the two sets exactly.
inline BloomFilter unite(const BloomFilter& a, const BloomFilter& b) {
  detail::require_same(a, b);
  BitVector bits = a.bits();
  bits |= b.bits();
  return BloomFilter(a.params(), std::move(bits), a.inserted_count() + b.inserted_count());
}

/// Bitwise AND; a superset of the filter of the intersection.
inline BloomFilter intersect(const BloomFilter& a, const BloomFilter& b) {
  detail::require_same(a, b);
  BitVector bits = a.bits();
  bits &= b.bits();
  return BloomFilter(a.params(), std::move(bits), std::min(a.inserted_count(), b.inserted_count()));
}

/// True only when the represented sets are certainly disjoint. Standard: the
/// intersection is all zeroes. Partitioned: some part of the intersection is
/// empty. Blocked variants apply the same test inside every block.
inline bool provably_disjoint(const BloomFilter& a, const BloomFilter& b) {
  const BloomFilter both = intersect(a, b);
  const FilterParams& p = both.params();
  const BitVector& bits = both.bits();
  switch (p.variant) {
    case Variant::Standard:
    case Variant::BlockedStandard:
      return bits.popcount() == 0;
    case Variant::Partitioned: {
      const std::uint64_t part = p.m / p.k;
      for (std::uint32_t i = 0; i < p.k; ++i)
        if (bits.none(i * part, (i + 1) * part)) return true;
      return false;
    }
    case Variant::BlockedPartitioned: {
      const std::uint64_t part = p.block_bits / p.k;
      for (std::uint64_t b = 0; b < p.block_count(); ++b) {
        const std::uint64_t base = b * p.block_bits;
        bool some_empty = false;
        for (std::uint32_t i = 0; i < p.k && !some_empty; ++i)
          some_empty = bits.none(base + i * part, base + (i + 1) * part);
        if (!some_empty) return false;
      }
      return true;
    }
  }
  return false;
}

/// Reduces a standard filter to m' bits: bit i moves to i mod m'. The folded
/// filter derives its indices over m', which equals the original indices mod m'.
inline BloomFilter fold_standard(const BloomFilter& f, std::uint64_t m_new) {
  const FilterParams& p = f.params();
  if (p.variant != Variant::Standard) throw WrongVariant("fold applies to standard filters only");
  if (m_new == 0 || p.m % m_new != 0)
    throw InvalidParams(fmt::format("fold target {} does not divide m={}", m_new, p.m));
  if (m_new < p.k) throw InvalidParams(fmt::format("fold target {} is smaller than k={}", m_new, p.k));
  if (p.scheme.kind == SchemeKind::SafeDouble && !std::has_single_bit(p.m) && std::has_single_bit(m_new))
    throw InvalidParams("safe-double fold from a non-power-of-two m to a power-of-two m' changes the step rule");
  FilterParams q = p;
  q.m = m_new;
  BitVector bits(m_new);
  const BitVector& src = f.bits();
  for (std::uint64_t i = 0; i < p.m; ++i)
    if (src.test(i)) bits.set(i % m_new);
  return BloomFilter(q, std::move(bits), f.inserted_count());
}

/// Keeps the first k' parts of a partitioned filter verbatim.
inline BloomFilter truncate_parts(const BloomFilter& f, std::uint32_t k_new) {
  const FilterParams& p = f.params();
  if (p.variant != Variant::Partitioned) throw WrongVariant("truncate applies to partitioned filters only");
  if (k_new < 1 || k_new > p.k)
    throw InvalidParams(fmt::format("truncate target k'={} outside [1, {}]", k_new, p.k));
  FilterParams q = p;
  q.k = k_new;
  q.m = p.m / p.k * k_new;
  BitVector bits(q.m);
  const BitVector& src = f.bits();
  for (std::uint64_t i = 0; i < q.m; ++i)
    if (src.test(i)) bits.set(i);
  return BloomFilter(q, std::move(bits), f.inserted_count());
}

}  // namespace pbf
