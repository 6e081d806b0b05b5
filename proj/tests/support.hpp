#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "pbf/pbf.hpp"

// Oracles that share no code with the analysis module, plus small helpers.

namespace pbf::testing {

using boost::multiprecision::cpp_int;
using boost::multiprecision::cpp_rational;

inline cpp_int ipow(std::uint64_t base, std::uint64_t e) {
  cpp_int r = 1;
  for (std::uint64_t i = 0; i < e; ++i) r *= base;
  return r;
}

inline cpp_int binom(std::uint64_t n, std::uint64_t r) {
  if (r > n) return 0;
  cpp_int c = 1;
  for (std::uint64_t i = 1; i <= r; ++i) c = c * (n - r + i) / i;
  return c;
}

/// Surjections from an n-set onto an i-set by inclusion-exclusion.
inline cpp_int surjections_ie(std::uint64_t n, std::uint64_t i) {
  cpp_int s = 0;
  for (std::uint64_t j = 0; j <= i; ++j) {
    const cpp_int term = binom(i, j) * ipow(i - j, n);
    s += (j % 2 == 0) ? term : cpp_int(-term);
  }
  return s;
}

/// Exact P(i bins occupied) after `balls` uniform throws into `bins`.
inline cpp_rational occupancy_exact(std::uint64_t balls, std::uint64_t bins, std::uint64_t i) {
  return cpp_rational(binom(bins, i) * surjections_ie(balls, i), ipow(bins, balls));
}

inline double to_double(const cpp_rational& q) { return q.convert_to<double>(); }

/// Brute-force F_s over every insert assignment and every query assignment.
struct Enumerated {
  double global = 0.0;
  std::vector<double> per_element;  // index d = distinct query positions; NaN if no such query
};

inline Enumerated enumerate_standard(std::uint64_t n, std::uint64_t m, std::uint64_t k) {
  // Distribution of the set-bit mask over all m^(nk) insert assignments.
  const std::uint64_t draws = n * k;
  std::map<std::uint64_t, std::uint64_t> masks;
  std::vector<std::uint64_t> digit(draws, 0);
  for (;;) {
    std::uint64_t mask = 0;
    for (auto v : digit) mask |= std::uint64_t{1} << v;
    ++masks[mask];
    std::size_t p = 0;
    while (p < draws && ++digit[p] == m) digit[p++] = 0;
    if (p == draws) break;
  }
  if (draws == 0) masks = {{0, 1}};

  // Query assignments grouped by (mask they need, distinct count).
  std::map<std::pair<std::uint64_t, std::uint64_t>, std::uint64_t> queries;
  std::vector<std::uint64_t> q(k, 0);
  for (;;) {
    std::uint64_t need = 0;
    for (auto v : q) need |= std::uint64_t{1} << v;
    const auto d = static_cast<std::uint64_t>(std::popcount(need));
    ++queries[{need, d}];
    std::size_t p = 0;
    while (p < k && ++q[p] == m) q[p++] = 0;
    if (p == k) break;
  }

  std::vector<cpp_int> hits(k + 1, 0), total(k + 1, 0);
  cpp_int all_hits = 0;
  for (const auto& [need_d, qc] : queries) {
    const auto [need, d] = need_d;
    for (const auto& [mask, mc] : masks) {
      total[d] += cpp_int(qc) * mc;
      if ((mask & need) == need) hits[d] += cpp_int(qc) * mc;
    }
  }
  Enumerated out;
  out.per_element.assign(k + 1, NAN);
  cpp_int denom = 0;
  for (std::uint64_t d = 1; d <= k; ++d) {
    all_hits += hits[d];
    denom += total[d];
    if (total[d] != 0) out.per_element[d] = to_double(cpp_rational(hits[d], total[d]));
  }
  out.global = to_double(cpp_rational(all_hits, denom));
  return out;
}

/// Random valid parameters covering every variant and scheme.
inline FilterParams random_params(SplitMix64& rng) {
  FilterParams p;
  p.variant = static_cast<Variant>(rng.below(4));
  p.scheme = {static_cast<SchemeKind>(rng.below(4)), rng()};
  const bool wide = p.scheme.kind == SchemeKind::WideSplit;
  static constexpr std::uint32_t ks[] = {1, 2, 3, 4, 6, 8, 16};
  for (;;) {
    p.k = ks[rng.below(std::size(ks))];
    if (is_blocked(p.variant)) {
      p.block_bits = std::uint64_t{64} << rng.below(4);
      p.m = p.block_bits * (1 + rng.below(8));
    } else {
      p.block_bits = 0;
      p.m = wide ? std::uint64_t{1} << (4 + rng.below(12)) : 8 + rng.below(5000);
      if (p.variant == Variant::Partitioned && !wide) p.m = p.k * (1 + rng.below(600));
    }
    try {
      p.validate();
      if (wide) derive_indices(p.scheme, std::string_view("probe"), p.index_layout());
      return p;
    } catch (const InvalidParams&) {
    }
  }
}

inline std::vector<std::vector<std::string>> parse_csv_text(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::stringstream all(text);
  for (std::string line; std::getline(all, line);) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    rows.push_back(std::move(cells));
  }
  return rows;
}

inline std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_csv_text(ss.str());
}

/// Units of the last printed digit between two decimal strings.
inline long long last_digit_distance(const std::string& a, const std::string& b) {
  const auto dot = b.find('.');
  const int decimals = dot == std::string::npos ? 0 : static_cast<int>(b.size() - dot - 1);
  return std::llround(std::abs(std::stod(a) - std::stod(b)) * std::pow(10.0, decimals));
}

#ifndef PBF_TEST_DATA_DIR
#define PBF_TEST_DATA_DIR "tests/data"
#endif

inline std::string data_path(const std::string& name) { return std::string(PBF_TEST_DATA_DIR) + "/" + name; }

}  // namespace pbf::testing
