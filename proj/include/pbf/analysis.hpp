#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <fmt/format.h>

#include "pbf/errors.hpp"

// Closed-form and combinatorial false-positive analysis.
//
// Symbols: n inserted elements, m filter bits, k hash functions, d distinct
// positions an element probes, B(balls, bins, i) the probability of exactly i
// non-empty bins.

namespace pbf::analysis {

using BigInt = boost::multiprecision::cpp_int;

namespace detail {

inline void require(bool ok, std::string_view what) {
  if (!ok) throw InvalidParams(std::string(what));
}

/// 1 - (1 - p)^e computed without cancellation.
inline double one_minus_pow_complement(double p, double e) {
  if (e == 0.0) return 0.0;
  if (p >= 1.0) return 1.0;
  return -std::expm1(e * std::log1p(-p));
}

}  // namespace detail

/// Probability that k independent uniform draws from m values repeat at least
/// once: 1 - P(m,k)/m^k with P(m,k) the k-permutations of m.
inline double birthday_collision_prob(std::uint64_t m, std::uint64_t k) {
  detail::require(m >= 1 && k >= 1, "birthday_collision_prob needs m >= 1, k >= 1");
  if (k > m) return 1.0;
  double all_distinct = 1.0;
  for (std::uint64_t j = 1; j < k; ++j) all_distinct *= 1.0 - static_cast<double>(j) / static_cast<double>(m);
  return 1.0 - all_distinct;
}

/// The usual approximation (1 - (1 - 1/m)^{kn})^k; n may be fractional.
inline double fpr_approx(double n, std::uint64_t m, std::uint64_t k) {
  detail::require(n >= 0 && m >= 1 && k >= 1, "fpr_approx needs n >= 0, m >= 1, k >= 1");
  const double fill = detail::one_minus_pow_complement(1.0 / static_cast<double>(m), static_cast<double>(k) * n);
  return std::pow(fill, static_cast<double>(k));
}

/// Bloom's original formula (1 - (1 - k/m)^n)^k, exact for filters that set
/// k distinct bits per element when evaluated per part.
inline double fpr_original_bloom(double n, std::uint64_t m, std::uint64_t k) {
  detail::require(n >= 0 && k >= 1 && m >= k, "fpr_original_bloom needs n >= 0, m >= k >= 1");
  const double fill = detail::one_minus_pow_complement(static_cast<double>(k) / static_cast<double>(m), n);
  return std::pow(fill, static_cast<double>(k));
}

/// Exact rate of a partitioned filter: k independent single-hash parts.
inline double fpr_partitioned_exact(double n, std::uint64_t m, std::uint64_t k) {
  detail::require(k >= 1 && m >= k && n >= 0, "fpr_partitioned_exact needs n >= 0, m >= k >= 1");
  if (m % k != 0) throw InvalidParams(fmt::format("partitioned analysis needs k | m (m={}, k={})", m, k));
  return fpr_original_bloom(n, m, k);
}

/// Number of surjections from an n-set onto an i-set, by inclusion-exclusion.
inline BigInt surjection_count(std::uint64_t n, std::uint64_t i) {
  if (i > n) return 0;
  BigInt total = 0;
  BigInt binom = 1;  // C(i, j)
  for (std::uint64_t j = 0; j <= i; ++j) {
    BigInt term = binom * boost::multiprecision::pow(BigInt(i - j), static_cast<unsigned>(n));
    if (j % 2 == 0)
      total += term;
    else
      total -= term;
    binom = binom * (i - j) / (j + 1);
  }
  return total;
}

/// Distribution of the number of occupied bins after throwing `balls` balls
/// uniformly into `bins` bins. Immutable once built.
class OccupancyDistribution {
 public:
  OccupancyDistribution(std::uint64_t balls, std::uint64_t bins) : balls_(balls), bins_(bins) {
    detail::require(bins >= 1, "occupancy distribution needs bins >= 1");
    // P(t, i) = P(t-1, i) * i/m + P(t-1, i-1) * (m-i+1)/m, in place.
    probs_.assign(bins + 1, 0.0);
    probs_[0] = 1.0;
    const double m = static_cast<double>(bins);
    for (std::uint64_t t = 1; t <= balls; ++t) {
      const std::uint64_t top = std::min(t, bins);
      for (std::uint64_t i = top; i >= 1; --i)
        probs_[i] = probs_[i] * (static_cast<double>(i) / m) + probs_[i - 1] * (static_cast<double>(bins - i + 1) / m);
      probs_[0] = 0.0;
    }
  }

  std::uint64_t balls() const noexcept { return balls_; }
  std::uint64_t bins() const noexcept { return bins_; }
  const std::vector<double>& probs() const noexcept { return probs_; }
  double operator[](std::uint64_t i) const noexcept { return i <= bins_ ? probs_[i] : 0.0; }

  /// E[g(i)] over the distribution.
  template <typename G>
  double expect(G&& g) const {
    double s = 0.0;
    for (std::uint64_t i = 0; i <= bins_; ++i)
      if (probs_[i] != 0.0) s += probs_[i] * g(i);
    return s;
  }

 private:
  std::uint64_t balls_;
  std::uint64_t bins_;
  std::vector<double> probs_;
};

inline OccupancyDistribution occupancy_distribution(std::uint64_t balls, std::uint64_t bins) {
  return OccupancyDistribution(balls, bins);
}

/// Probability that d distinct positions all land on the i set bits of an m-bit
/// filter: prod_{j<d} (i-j)/(m-j).
inline double distinct_hit_prob(std::uint64_t i, std::uint64_t m, std::uint64_t d) {
  detail::require(i <= m && d <= m, "distinct_hit_prob needs i <= m and d <= m");
  if (d > i) return 0.0;
  double p = 1.0;
  for (std::uint64_t j = 0; j < d; ++j)
    p *= static_cast<double>(i - j) / static_cast<double>(m - j);
  return p;
}

/// Exact average rate of a standard filter, weighting (i/m)^k by the occupancy
/// distribution of nk balls in m bins.
inline double fpr_standard_exact(std::uint64_t n, std::uint64_t m, std::uint64_t k) {
  detail::require(m >= 1 && k >= 1, "fpr_standard_exact needs m >= 1, k >= 1");
  const OccupancyDistribution occ(n * k, m);
  const double md = static_cast<double>(m);
  return occ.expect([&](std::uint64_t i) { return std::pow(static_cast<double>(i) / md, static_cast<double>(k)); });
}

/// Expected rate for one element probing d distinct positions, over standard
/// filters of n other elements.
inline double fpr_per_element(std::uint64_t n, std::uint64_t m, std::uint64_t k, std::uint64_t d) {
  detail::require(m >= 1 && k >= 1, "fpr_per_element needs m >= 1, k >= 1");
  if (d < 1 || d > k || d > m)
    throw InvalidParams(fmt::format("distinct count d={} outside [1, min(k={}, m={})]", d, k, m));
  const OccupancyDistribution occ(n * k, m);
  return occ.expect([&](std::uint64_t i) { return distinct_hit_prob(i, m, d); });
}

/// probs[d] = B(k, m, d), the chance that an element's k hashes hit exactly d
/// distinct positions (k - d collisions). probs[0] is 0.
inline std::vector<double> collision_count_distribution(std::uint64_t k, std::uint64_t m) {
  detail::require(k >= 1 && m >= 1, "collision_count_distribution needs k >= 1, m >= 1");
  const OccupancyDistribution occ(k, m);
  std::vector<double> probs(k + 1, 0.0);
  for (std::uint64_t d = 1; d <= std::min(k, m); ++d) probs[d] = occ[d];
  return probs;
}

struct OverlapProbs {
  double standard = 0.0;     // P_s
  double partitioned = 0.0;  // P_p
};

/// False set-overlap probabilities for disjoint sets of sizes n1 and n2:
/// P_s = 1 - (1 - 1/m)^{k^2 n1 n2}, P_p = (1 - (1 - k/m)^{n1 n2})^k.
/// Both treat every pair of probed positions as an independent collision
/// chance; see false_overlap_exact for the occupancy-weighted values.
inline OverlapProbs false_overlap_probs(std::uint64_t m, std::uint64_t k, double n1, double n2) {
  detail::require(k >= 1 && m >= k && n1 >= 0 && n2 >= 0, "false_overlap_probs needs m >= k >= 1, n1, n2 >= 0");
  if (m % k != 0) throw InvalidParams(fmt::format("overlap analysis needs k | m (m={}, k={})", m, k));
  const double kd = static_cast<double>(k);
  const double md = static_cast<double>(m);
  OverlapProbs p;
  p.standard = detail::one_minus_pow_complement(1.0 / md, kd * kd * n1 * n2);
  p.partitioned = std::pow(detail::one_minus_pow_complement(kd / md, n1 * n2), kd);
  return p;
}

/// Exact false set-overlap probabilities under independent uniform hashing.
/// Standard: 1 - E[(1 - |A|/m)^{k n2}] with |A| the occupancy of k n1 balls.
/// Partitioned: per part 1 - E[(1 - |A_part|/(m/k))^{n2}], raised to k.
inline OverlapProbs false_overlap_exact(std::uint64_t m, std::uint64_t k, std::uint64_t n1, std::uint64_t n2) {
  detail::require(k >= 1 && m >= k, "false_overlap_exact needs m >= k >= 1");
  if (m % k != 0) throw InvalidParams(fmt::format("overlap analysis needs k | m (m={}, k={})", m, k));
  const double md = static_cast<double>(m);
  const std::uint64_t part = m / k;
  const double pd = static_cast<double>(part);
  OverlapProbs p;
  const OccupancyDistribution a(k * n1, m);
  p.standard = 1.0 - a.expect([&](std::uint64_t i) {
    return std::pow(1.0 - static_cast<double>(i) / md, static_cast<double>(k * n2));
  });
  const OccupancyDistribution ap(n1, part);
  const double part_overlap = 1.0 - ap.expect([&](std::uint64_t i) {
    return std::pow(1.0 - static_cast<double>(i) / pd, static_cast<double>(n2));
  });
  p.partitioned = std::pow(part_overlap, static_cast<double>(k));
  return p;
}

/// How a fractional element count occupation*(m/k)*ln2 becomes an integer n.
enum class NConvention {
  Floor,        // floor(occ * (m/k) ln2)
  Round,        // nearest integer, halves up
  Ceil,         // ceil(occ * (m/k) ln2)
  ScaledFloor,  // floor(occ * floor((m/k) ln2))
};

inline std::string_view to_string(NConvention c) noexcept {
  switch (c) {
    case NConvention::Floor: return "floor";
    case NConvention::Round: return "round";
    case NConvention::Ceil: return "ceil";
    case NConvention::ScaledFloor: return "scaled-floor";
  }
  return "?";
}

inline NConvention parse_n_convention(std::string_view s) {
  for (auto c : {NConvention::Floor, NConvention::Round, NConvention::Ceil, NConvention::ScaledFloor})
    if (to_string(c) == s) return c;
  throw InvalidParams(fmt::format("unknown n convention '{}'", s));
}

/// Element count at `occupation` times the nominal capacity (m/k) ln 2, where
/// the expected fill ratio is one half.
inline std::uint64_t nominal_capacity(std::uint64_t m, std::uint64_t k, double occupation,
                                      NConvention conv = NConvention::Floor) {
  detail::require(k >= 1 && occupation > 0, "nominal_capacity needs k >= 1 and occupation > 0");
  const long double nominal = static_cast<long double>(m) / k * std::log(2.0L);
  const long double x = static_cast<long double>(occupation) * nominal;
  switch (conv) {
    case NConvention::Floor: return static_cast<std::uint64_t>(std::floor(x));
    case NConvention::Round: return static_cast<std::uint64_t>(std::floor(x + 0.5L));
    case NConvention::Ceil: return static_cast<std::uint64_t>(std::ceil(x));
    case NConvention::ScaledFloor:
      return static_cast<std::uint64_t>(std::floor(static_cast<long double>(occupation) * std::floor(nominal)));
  }
  return 0;
}

}  // namespace pbf::analysis
