#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <thread>
#include <vector>

#include <boost/math/distributions/beta.hpp>
#include <fmt/format.h>

#include "pbf/analysis.hpp"
#include "pbf/errors.hpp"
#include "pbf/filter.hpp"
#include "pbf/hashing.hpp"
#include "pbf/random.hpp"

// Seeded, sharded Monte Carlo experiments. Trials are split over a fixed
// number of shards; shard s draws from SplitMix64(seed).split(s) and results
// are pooled by count, so a (config, seed, shards) triple always yields the
// same report no matter how many threads run the shards.

namespace pbf::mc {

inline constexpr std::uint32_t kDefaultShards = 16;

struct ExperimentConfig {
  FilterParams params;
  std::uint64_t n = 0;       // inserts per trial
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;    // experiment RNG seed (hash seed lives in params)
  std::uint32_t shards = kDefaultShards;

  void validate() const {
    params.validate();
    if (trials < 1) throw InvalidParams("trials must be >= 1");
    if (shards < 1) throw InvalidParams("shards must be >= 1");
  }
};

struct ExperimentReport {
  std::uint64_t positives = 0;
  std::uint64_t trials = 0;
  double estimate = 0.0;
  double std_error = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  bool exact_interval = false;          // Clopper-Pearson instead of normal
  std::optional<double> reference;      // exact value the estimate should match

  /// |estimate - reference| in units of the binomial standard deviation under
  /// the reference value (the null hypothesis).
  double sigma_distance(double ref) const {
    const double sd = std::sqrt(ref * (1.0 - ref) / static_cast<double>(trials));
    const double diff = std::abs(estimate - ref);
    if (sd == 0.0) return diff == 0.0 ? 0.0 : INFINITY;
    return diff / sd;
  }
  std::optional<double> sigma_distance() const {
    if (!reference) return std::nullopt;
    return sigma_distance(*reference);
  }
  bool consistent_with(double ref, double sigmas = 4.0) const { return sigma_distance(ref) <= sigmas; }
};

/// Proportion estimate with a 95% interval: normal approximation widened by
/// the 1/(2T) continuity correction, or Clopper-Pearson when fewer than 10
/// successes or failures were seen.
inline ExperimentReport make_report(std::uint64_t positives, std::uint64_t trials,
                                    std::optional<double> reference = std::nullopt) {
  if (trials == 0) throw InvalidParams("report needs at least one trial");
  ExperimentReport r;
  r.positives = positives;
  r.trials = trials;
  r.reference = reference;
  const double t = static_cast<double>(trials);
  const double x = static_cast<double>(positives);
  r.estimate = x / t;
  r.std_error = std::sqrt(r.estimate * (1.0 - r.estimate) / t);
  constexpr double alpha = 0.05;
  if (positives < 10 || trials - positives < 10) {
    r.exact_interval = true;
    using boost::math::beta_distribution;
    using boost::math::quantile;
    r.ci_lo = positives == 0 ? 0.0 : quantile(beta_distribution<>(x, t - x + 1), alpha / 2);
    r.ci_hi = positives == trials ? 1.0 : quantile(beta_distribution<>(x + 1, t - x), 1 - alpha / 2);
  } else {
    const double half = 1.959963984540054 * r.std_error + 0.5 / t;
    r.ci_lo = std::max(0.0, r.estimate - half);
    r.ci_hi = std::min(1.0, r.estimate + half);
  }
  r.ci_lo = std::min(r.ci_lo, r.estimate);
  r.ci_hi = std::max(r.ci_hi, r.estimate);
  return r;
}

/// Trials handled by shard `s` of `shards`.
inline std::uint64_t shard_trials(std::uint64_t trials, std::uint32_t shards, std::uint32_t s) noexcept {
  return trials / shards + (s < trials % shards ? 1 : 0);
}

/// Runs `body(rng, shard_trials) -> counts` per shard and sums the count vectors.
template <typename Body>
std::vector<std::uint64_t> run_sharded(std::uint64_t trials, std::uint32_t shards, std::uint64_t seed,
                                       std::size_t counters, Body&& body) {
  std::vector<std::vector<std::uint64_t>> per_shard(shards);
  const SplitMix64 root(seed);
  std::atomic<std::uint32_t> next{0};
  auto worker = [&] {
    for (std::uint32_t s = next++; s < shards; s = next++) {
      SplitMix64 rng = root.split(s);
      per_shard[s] = body(rng, shard_trials(trials, shards, s));
    }
  };
  const std::uint32_t hw = std::max(1u, std::thread::hardware_concurrency());
  const std::uint32_t workers = std::min(shards, hw);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::uint32_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  std::vector<std::uint64_t> total(counters, 0);
  for (const auto& c : per_shard)
    for (std::size_t i = 0; i < counters; ++i) total[i] += c.at(i);
  return total;
}

/// Exact global rate for configurations whose index hashes behave as
/// independent uniform draws; nullopt otherwise.
inline std::optional<double> reference_global_fpr(const FilterParams& p, std::uint64_t n) {
  const bool uniform = p.scheme.kind == SchemeKind::Independent || p.scheme.kind == SchemeKind::WideSplit;
  if (!uniform) return std::nullopt;
  if (p.variant == Variant::Standard) return analysis::fpr_standard_exact(n, p.m, p.k);
  if (p.variant == Variant::Partitioned) return analysis::fpr_partitioned_exact(static_cast<double>(n), p.m, p.k);
  return std::nullopt;
}

/// Builds `trials` filters of n random elements and queries one fresh random
/// element against each.
inline ExperimentReport estimate_global_fpr(const ExperimentConfig& cfg) {
  cfg.validate();
  auto counts = run_sharded(cfg.trials, cfg.shards, cfg.seed, 1, [&](SplitMix64& rng, std::uint64_t t) {
    BloomFilter f(cfg.params);
    std::uint64_t hits = 0;
    for (std::uint64_t trial = 0; trial < t; ++trial) {
      f.clear();
      for (std::uint64_t i = 0; i < cfg.n; ++i) f.insert(random_element(rng));
      hits += f.query(random_element(rng)) ? 1 : 0;
    }
    return std::vector<std::uint64_t>{hits};
  });
  return make_report(counts[0], cfg.trials, reference_global_fpr(cfg.params, cfg.n));
}

struct CraftedElement {
  RandomElement element{};
  std::uint64_t attempts = 0;
};

inline constexpr std::uint64_t kDefaultAttemptBudget = 50'000'000;

/// Rejection-samples random elements until one maps to exactly d distinct
/// positions under `layout`.
inline CraftedElement find_element_with_distinct_count(const HashScheme& scheme, const IndexLayout& layout,
                                                       std::uint32_t d, std::uint64_t seed,
                                                       std::uint64_t budget = kDefaultAttemptBudget) {
  const std::uint32_t k = layout.k();
  if (d < 1 || d > k) throw InvalidParams(fmt::format("distinct count d={} outside [1, k={}]", d, k));
  if (layout.mode() == IndexLayout::Mode::PerPart && d != k)
    throw InvalidParams(fmt::format("d={} is infeasible: per-part layouts always give d = k = {}", d, k));
  if (d > layout.range()) throw InvalidParams(fmt::format("d={} exceeds the index range {}", d, layout.range()));
  SplitMix64 rng(seed);
  std::vector<std::uint64_t> idx(k);
  for (std::uint64_t attempt = 1; attempt <= budget; ++attempt) {
    RandomElement e = random_element(rng);
    derive_indices_into(scheme, e, layout, idx);
    const std::uint32_t got = layout.mode() == IndexLayout::Mode::PerPart ? k : distinct_count(idx);
    if (got == d) return {e, attempt};
  }
  const double p = analysis::collision_count_distribution(k, layout.range())[d];
  throw BudgetExhausted(fmt::format("no element with d={} in {} attempts (expected {:.4g} attempts for independent hashing)",
                                    d, budget, p > 0 ? 1.0 / p : INFINITY));
}

/// Distinct global positions `element` probes in a filter with params `p`.
inline std::uint32_t element_distinct_count(const FilterParams& p, Element element) {
  const BloomFilter probe(FilterParams{p});
  auto pos = probe.positions(element);
  return distinct_count(std::span<const std::uint64_t>(pos));
}

/// Tests one fixed element against `trials` random filters of n other elements.
inline ExperimentReport estimate_per_element_fpr(Element element, const ExperimentConfig& cfg) {
  cfg.validate();
  const std::vector<std::byte> target(element.begin(), element.end());
  auto counts = run_sharded(cfg.trials, cfg.shards, cfg.seed, 1, [&](SplitMix64& rng, std::uint64_t t) {
    BloomFilter f(cfg.params);
    std::uint64_t hits = 0;
    for (std::uint64_t trial = 0; trial < t; ++trial) {
      f.clear();
      for (std::uint64_t i = 0; i < cfg.n;) {
        const RandomElement e = random_element(rng);
        if (std::equal(e.begin(), e.end(), target.begin(), target.end())) continue;
        f.insert(e);
        ++i;
      }
      hits += f.query(target) ? 1 : 0;
    }
    return std::vector<std::uint64_t>{hits};
  });
  std::optional<double> ref;
  const FilterParams& p = cfg.params;
  const bool uniform = p.scheme.kind == SchemeKind::Independent || p.scheme.kind == SchemeKind::WideSplit;
  if (uniform && p.variant == Variant::Standard)
    ref = analysis::fpr_per_element(cfg.n, p.m, p.k, element_distinct_count(p, target));
  else if (uniform && p.variant == Variant::Partitioned)
    ref = analysis::fpr_partitioned_exact(static_cast<double>(cfg.n), p.m, p.k);
  return make_report(counts[0], cfg.trials, ref);
}

// ---------------------------------------------------------------------------
// Double hashing

/// Residue class of the double-hashing step h2 modulo the indexed range r.
enum class StepClass { Zero, Half, Quarter, Odd };

inline std::string_view to_string(StepClass c) noexcept {
  switch (c) {
    case StepClass::Zero: return "0";
    case StepClass::Half: return "half";
    case StepClass::Quarter: return "quarter";
    case StepClass::Odd: return "odd";
  }
  return "?";
}

inline StepClass parse_step_class(std::string_view s) {
  for (auto c : {StepClass::Zero, StepClass::Half, StepClass::Quarter, StepClass::Odd})
    if (to_string(c) == s) return c;
  throw InvalidParams(fmt::format("unknown step class '{}' (expected 0, half, quarter, odd)", s));
}

inline bool in_step_class(std::uint64_t h2, std::uint64_t range, StepClass c) noexcept {
  const std::uint64_t step = h2 % range;
  switch (c) {
    case StepClass::Zero: return step == 0;
    case StepClass::Half: return step == range / 2;
    case StepClass::Quarter: return step == range / 4;
    case StepClass::Odd: return step % 2 == 1;
  }
  return false;
}

/// Random element whose raw h2 falls in `cls` modulo `range`.
inline CraftedElement find_element_with_step(const HashScheme& scheme, std::uint64_t range, StepClass cls,
                                             std::uint64_t seed, std::uint64_t budget = kDefaultAttemptBudget) {
  if (range < 4 || range % 4 != 0) throw InvalidParams(fmt::format("step classes need 4 | range, got {}", range));
  SplitMix64 rng(seed);
  for (std::uint64_t attempt = 1; attempt <= budget; ++attempt) {
    RandomElement e = random_element(rng);
    if (in_step_class(double_hash_pair(scheme, e).high, range, cls)) return {e, attempt};
  }
  throw BudgetExhausted(fmt::format("no element with step class {} in {} attempts", to_string(cls), budget));
}

/// Fills `f` with independent Bernoulli(fill) bits.
inline void randomize_bits(BloomFilter& f, double fill, SplitMix64& rng) {
  BitVector& bits = f.mutable_bits();
  if (fill == 0.5) {
    for (auto& w : bits.words()) w = rng();
  } else {
    bits.clear();
    for (std::uint64_t i = 0; i < bits.length(); ++i)
      if (rng.bernoulli(fill)) bits.set(i);
  }
  bits.trim();
}

struct WeakSpotRow {
  StepClass step = StepClass::Zero;
  Variant variant = Variant::Standard;
  std::uint32_t distinct = 0;  // distinct positions of the crafted element
  ExperimentReport report;     // reference = fill^distinct
};

/// Crafts one element per step class (by rejection on real hashes) and
/// measures how often it tests positive against random single-block filters
/// whose bits are set independently with probability `fill`.
inline std::vector<WeakSpotRow> double_hash_weak_spot_experiment(std::uint64_t m_block, std::uint32_t k, double fill,
                                                                 std::uint64_t trials, std::uint64_t seed,
                                                                 SchemeKind scheme = SchemeKind::NaiveDouble,
                                                                 std::uint32_t shards = kDefaultShards,
                                                                 std::vector<StepClass> classes = {
                                                                     StepClass::Zero, StepClass::Half,
                                                                     StepClass::Quarter, StepClass::Odd}) {
  if (!(fill >= 0.0 && fill <= 1.0)) throw InvalidParams("fill must lie in [0, 1]");
  if (trials < 1) throw InvalidParams("trials must be >= 1");
  if (scheme != SchemeKind::NaiveDouble && scheme != SchemeKind::SafeDouble)
    throw InvalidParams("the weak-spot experiment needs a double-hashing scheme");
  const HashScheme hs{scheme, derive_seed(seed, 0xd0b1e)};
  std::vector<WeakSpotRow> rows;
  for (Variant v : {Variant::Standard, Variant::Partitioned}) {
    FilterParams p{m_block, k, v, 0, hs};
    p.validate();
    const std::uint64_t range = v == Variant::Standard ? m_block : m_block / k;
    for (StepClass cls : classes) {
      const std::uint64_t cls_seed = 1 + static_cast<std::uint64_t>(cls);
      const CraftedElement crafted = find_element_with_step(hs, range, cls, derive_seed(seed, cls_seed));
      const std::uint32_t d = element_distinct_count(p, crafted.element);
      auto counts = run_sharded(trials, shards, derive_seed(seed, 100 + 10 * static_cast<std::uint64_t>(v) + cls_seed), 1,
                                [&](SplitMix64& rng, std::uint64_t t) {
                                  BloomFilter f(p);
                                  std::uint64_t hits = 0;
                                  for (std::uint64_t i = 0; i < t; ++i) {
                                    randomize_bits(f, fill, rng);
                                    hits += f.query(crafted.element) ? 1 : 0;
                                  }
                                  return std::vector<std::uint64_t>{hits};
                                });
      rows.push_back({cls, v, d, make_report(counts[0], trials, std::pow(fill, static_cast<double>(d)))});
    }
  }
  return rows;
}

/// Sorted distinct global positions of `element`.
inline std::vector<std::uint64_t> position_set(const BloomFilter& probe, Element element) {
  auto pos = probe.positions(element);
  std::sort(pos.begin(), pos.end());
  pos.erase(std::unique(pos.begin(), pos.end()), pos.end());
  return pos;
}

/// Rejection-searches y with h1(y) = h1(x) + (k-1) h2(x) and h2(y) = -h2(x)
/// modulo `range`: under double hashing y walks x's indices backwards.
inline CraftedElement find_reverse_partner(const HashScheme& scheme, Element x, std::uint64_t range,
                                           std::uint32_t k, std::uint64_t seed,
                                           std::uint64_t budget = kDefaultAttemptBudget) {
  const Hash128 hx = double_hash_pair(scheme, x);
  const std::uint64_t step = hx.high % range;
  const std::uint64_t want_h1 =
      static_cast<std::uint64_t>((hx.low % range + static_cast<unsigned __int128>(k - 1) * step) % range);
  const std::uint64_t want_h2 = (range - step) % range;
  SplitMix64 rng(seed);
  for (std::uint64_t attempt = 1; attempt <= budget; ++attempt) {
    RandomElement y = random_element(rng);
    const Hash128 hy = double_hash_pair(scheme, y);
    if (hy.low % range == want_h1 && hy.high % range == want_h2) return {y, attempt};
  }
  throw BudgetExhausted(fmt::format("no reverse partner in {} attempts", budget));
}

/// Probability that two random elements share the full index set, assuming
/// (h1 mod r, h2 mod r) uniform on r^2 pairs (exact when r is a power of two).
inline double exact_full_overlap_prob(const FilterParams& p) {
  const std::uint64_t range = p.variant == Variant::Standard ? p.m : p.m / p.k;
  if (range > 4096) throw InvalidParams("exact overlap enumeration limited to ranges <= 4096");
  const IndexLayout layout = p.index_layout();
  std::map<std::vector<std::uint64_t>, std::uint64_t> sets;
  std::vector<std::uint64_t> pos(p.k);
  for (std::uint64_t a = 0; a < range; ++a)
    for (std::uint64_t b = 0; b < range; ++b) {
      std::uint64_t step = b;
      if (p.scheme.kind == SchemeKind::SafeDouble && std::has_single_bit(range)) step = (b | 1) % range;
      for (std::uint32_t i = 0; i < p.k; ++i) pos[i] = layout.global(i, (a + i * step) % range);
      std::sort(pos.begin(), pos.end());
      pos.erase(std::unique(pos.begin(), pos.end()), pos.end());
      ++sets[pos];
      pos.resize(p.k);
    }
  const double total = static_cast<double>(range) * static_cast<double>(range);
  double prob = 0.0;
  for (const auto& [set, count] : sets) prob += (static_cast<double>(count) / total) * (static_cast<double>(count) / total);
  return prob;
}

struct OverlapIncidence {
  Variant variant = Variant::Standard;
  ExperimentReport full;     // identical index sets; reference from enumeration
  ExperimentReport partial;  // >= 2 shared positions, sets not identical
};

/// Random element pairs under double hashing: how often their index sets
/// coincide or share at least two positions.
inline std::vector<OverlapIncidence> overlap_incidence_experiment(std::uint64_t m, std::uint32_t k,
                                                                  std::uint64_t trials, std::uint64_t seed,
                                                                  SchemeKind scheme = SchemeKind::NaiveDouble,
                                                                  std::uint32_t shards = kDefaultShards) {
  if (trials < 1) throw InvalidParams("trials must be >= 1");
  if (scheme != SchemeKind::NaiveDouble && scheme != SchemeKind::SafeDouble)
    throw InvalidParams("the overlap experiment needs a double-hashing scheme");
  const HashScheme hs{scheme, derive_seed(seed, 0x0e71a9)};
  std::vector<OverlapIncidence> out;
  for (Variant v : {Variant::Standard, Variant::Partitioned}) {
    const FilterParams p{m, k, v, 0, hs};
    p.validate();
    auto counts = run_sharded(trials, shards, derive_seed(seed, static_cast<std::uint64_t>(v)), 2,
                              [&](SplitMix64& rng, std::uint64_t t) {
                                const BloomFilter probe(p);
                                std::vector<std::uint64_t> c(2, 0);
                                std::vector<std::uint64_t> shared;
                                for (std::uint64_t i = 0; i < t; ++i) {
                                  const auto a = position_set(probe, random_element(rng));
                                  const auto b = position_set(probe, random_element(rng));
                                  if (a == b) {
                                    ++c[0];
                                    continue;
                                  }
                                  shared.clear();
                                  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                                                        std::back_inserter(shared));
                                  if (shared.size() >= 2) ++c[1];
                                }
                                return c;
                              });
    const std::uint64_t range = v == Variant::Standard ? m : m / k;
    std::optional<double> ref;
    if (range <= 4096 && std::has_single_bit(range)) ref = exact_full_overlap_prob(p);
    out.push_back({v, make_report(counts[0], trials, ref), make_report(counts[1], trials)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Set disjointness

struct DisjointnessResult {
  ExperimentReport standard;     // reference = P_s display formula
  ExperimentReport partitioned;  // reference = P_p display formula
  analysis::OverlapProbs formula;
  analysis::OverlapProbs exact;
};

/// Inserts two disjoint random sets of sizes n1, n2 into standard and
/// partitioned filters (independent hashing) and counts how often
/// provably_disjoint fails to certify them.
inline DisjointnessResult disjointness_experiment(std::uint64_t m, std::uint32_t k, std::uint64_t n1,
                                                  std::uint64_t n2, std::uint64_t trials, std::uint64_t seed,
                                                  std::uint32_t shards = kDefaultShards) {
  if (trials < 1) throw InvalidParams("trials must be >= 1");
  if (m % k != 0) throw InvalidParams(fmt::format("disjointness experiment needs k | m (m={}, k={})", m, k));
  const HashScheme hs{SchemeKind::Independent, derive_seed(seed, 0xd15c0171)};
  const FilterParams ps{m, k, Variant::Standard, 0, hs};
  const FilterParams pp{m, k, Variant::Partitioned, 0, hs};
  auto counts = run_sharded(trials, shards, seed, 2, [&](SplitMix64& rng, std::uint64_t t) {
    BloomFilter sa(ps), sb(ps), pa(pp), pb(pp);
    std::vector<RandomElement> a, b;
    std::vector<std::uint64_t> c(2, 0);
    for (std::uint64_t i = 0; i < t; ++i) {
      a.clear();
      b.clear();
      for (std::uint64_t j = 0; j < n1; ++j) a.push_back(random_element(rng));
      while (b.size() < n2) {
        const RandomElement e = random_element(rng);
        if (std::find(a.begin(), a.end(), e) == a.end()) b.push_back(e);
      }
      sa.clear(), sb.clear(), pa.clear(), pb.clear();
      for (const auto& e : a) sa.insert(e), pa.insert(e);
      for (const auto& e : b) sb.insert(e), pb.insert(e);
      c[0] += provably_disjoint(sa, sb) ? 0 : 1;
      c[1] += provably_disjoint(pa, pb) ? 0 : 1;
    }
    return c;
  });
  DisjointnessResult r;
  r.formula = analysis::false_overlap_probs(m, k, static_cast<double>(n1), static_cast<double>(n2));
  r.exact = analysis::false_overlap_exact(m, k, n1, n2);
  r.standard = make_report(counts[0], trials, r.formula.standard);
  r.partitioned = make_report(counts[1], trials, r.formula.partitioned);
  return r;
}

}  // namespace pbf::mc
