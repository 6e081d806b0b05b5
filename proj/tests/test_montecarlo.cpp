#include <gtest/gtest.h>

#include "pbf/montecarlo.hpp"

using namespace pbf;
using namespace pbf::mc;

TEST(Report, NormalIntervalWithContinuityCorrection) {
  const auto r = make_report(500, 1000, 0.5);
  EXPECT_DOUBLE_EQ(r.estimate, 0.5);
  EXPECT_NEAR(r.std_error, std::sqrt(0.25 / 1000), 1e-15);
  EXPECT_FALSE(r.exact_interval);
  EXPECT_NEAR(r.ci_hi - r.estimate, 1.959963984540054 * r.std_error + 0.0005, 1e-12);
  EXPECT_DOUBLE_EQ(*r.sigma_distance(), 0.0);
}

TEST(Report, ClopperPearsonForRareEvents) {
  const auto zero = make_report(0, 1000);
  EXPECT_TRUE(zero.exact_interval);
  EXPECT_EQ(zero.ci_lo, 0.0);
  EXPECT_NEAR(zero.ci_hi, 1.0 - std::pow(0.025, 1.0 / 1000), 1e-12);
  const auto all = make_report(1000, 1000);
  EXPECT_EQ(all.ci_hi, 1.0);
  EXPECT_NEAR(all.ci_lo, std::pow(0.025, 1.0 / 1000), 1e-12);
  const auto few = make_report(3, 1000);
  EXPECT_TRUE(few.exact_interval);
  EXPECT_LT(few.ci_lo, 0.003);
  EXPECT_GT(few.ci_hi, 0.003);
  EXPECT_THROW(make_report(0, 0), InvalidParams);
}

TEST(Report, SigmaDistanceUsesReferenceVariance) {
  const auto r = make_report(520, 1000);
  EXPECT_NEAR(r.sigma_distance(0.5), 0.02 / std::sqrt(0.25 / 1000), 1e-12);
  EXPECT_TRUE(r.consistent_with(0.5));
  EXPECT_FALSE(r.consistent_with(0.3));
  EXPECT_FALSE(r.sigma_distance().has_value());
}

TEST(Sharding, TrialsAreConservedAndRunsReproducible) {
  std::uint64_t sum = 0;
  for (std::uint32_t s = 0; s < 16; ++s) sum += shard_trials(1003, 16, s);
  EXPECT_EQ(sum, 1003u);
  auto body = [](SplitMix64& rng, std::uint64_t t) {
    std::uint64_t x = 0;
    for (std::uint64_t i = 0; i < t; ++i) x += rng() & 1;
    return std::vector<std::uint64_t>{x, t};
  };
  const auto a = run_sharded(10000, 16, 5, 2, body);
  const auto b = run_sharded(10000, 16, 5, 2, body);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a[1], 10000u);
}

TEST(GlobalFpr, SmallRunMatchesExactAndIsDeterministic) {
  const FilterParams p{64, 4, Variant::Standard, 0, {SchemeKind::Independent, 3}};
  const ExperimentConfig cfg{p, 11, 40000, 99, 16};
  const auto r = estimate_global_fpr(cfg);
  ASSERT_TRUE(r.reference.has_value());
  EXPECT_NEAR(*r.reference, 0.06423247, 5e-9);
  EXPECT_LE(*r.sigma_distance(), 4.0);
  EXPECT_EQ(estimate_global_fpr(cfg).positives, r.positives);
  ExperimentConfig bad = cfg;
  bad.trials = 0;
  EXPECT_THROW(estimate_global_fpr(bad), InvalidParams);
}

TEST(GlobalFpr, NoReferenceForDoubleHashingOrBlocked) {
  EXPECT_FALSE(reference_global_fpr({64, 4, Variant::Standard, 0, {SchemeKind::NaiveDouble, 0}}, 5));
  EXPECT_FALSE(reference_global_fpr({1024, 4, Variant::BlockedStandard, 512, {}}, 5));
  EXPECT_TRUE(reference_global_fpr({64, 4, Variant::Partitioned, 0, {SchemeKind::WideSplit, 0}}, 5));
}

TEST(Crafting, FindsRequestedDistinctCount) {
  const HashScheme s{SchemeKind::Independent, 8};
  const auto layout = IndexLayout::flat(64, 8);
  for (std::uint32_t d : {8u, 7u, 6u, 5u}) {
    const auto c = find_element_with_distinct_count(s, layout, d, 1);
    EXPECT_EQ(distinct_count(derive_indices(s, c.element, layout)), d);
    EXPECT_GE(c.attempts, 1u);
  }
  EXPECT_THROW(find_element_with_distinct_count(s, IndexLayout::per_part(64, 8), 6, 1), InvalidParams);
  EXPECT_THROW(find_element_with_distinct_count(s, layout, 9, 1), InvalidParams);
  EXPECT_THROW(find_element_with_distinct_count(s, layout, 1, 1, 1000), BudgetExhausted);
}

TEST(PerElement, SmallRunWithinFourSigma) {
  const FilterParams p{64, 8, Variant::Standard, 0, {SchemeKind::Independent, 21}};
  const auto c = find_element_with_distinct_count(p.scheme, p.index_layout(), 6, 4);
  EXPECT_EQ(element_distinct_count(p, c.element), 6u);
  const auto r = estimate_per_element_fpr(c.element, {p, 5, 40000, 7, 16});
  ASSERT_TRUE(r.reference.has_value());
  EXPECT_NEAR(*r.reference, analysis::fpr_per_element(5, 64, 8, 6), 0.0);
  EXPECT_LE(*r.sigma_distance(), 4.0);
}

TEST(StepClasses, Membership) {
  EXPECT_TRUE(in_step_class(128, 64, StepClass::Zero));
  EXPECT_TRUE(in_step_class(96, 64, StepClass::Half));
  EXPECT_TRUE(in_step_class(16, 64, StepClass::Quarter));
  EXPECT_TRUE(in_step_class(3, 64, StepClass::Odd));
  EXPECT_FALSE(in_step_class(2, 64, StepClass::Odd));
  EXPECT_EQ(parse_step_class("quarter"), StepClass::Quarter);
  EXPECT_THROW(parse_step_class("third"), InvalidParams);
}

TEST(WeakSpot, StepClassesSetExpectedDistinctCounts) {
  const auto rows = double_hash_weak_spot_experiment(512, 8, 0.5, 4000, 17);
  ASSERT_EQ(rows.size(), 8u);
  for (const auto& r : rows) {
    if (r.variant == Variant::Partitioned) {
      EXPECT_EQ(r.distinct, 8u);
    } else {
      const std::uint32_t want = r.step == StepClass::Zero ? 1 : r.step == StepClass::Half ? 2
                                 : r.step == StepClass::Quarter                        ? 4
                                                                                       : 8;
      EXPECT_EQ(r.distinct, want) << to_string(r.step);
    }
    EXPECT_LE(*r.report.sigma_distance(), 4.0) << to_string(r.step) << " " << to_string(r.variant);
  }
}

TEST(WeakSpot, SafeDoubleAvoidsZeroStep) {
  const auto rows = double_hash_weak_spot_experiment(512, 8, 0.5, 2000, 17, SchemeKind::SafeDouble, 16,
                                                     {StepClass::Zero});
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].distinct, 8u);
}

TEST(WeakSpot, RejectsNonDoubleSchemes) {
  EXPECT_THROW(double_hash_weak_spot_experiment(512, 8, 0.5, 10, 1, SchemeKind::Independent), InvalidParams);
  EXPECT_THROW(double_hash_weak_spot_experiment(512, 8, 1.5, 10, 1), InvalidParams);
}

TEST(Overlap, ReversePartnerSharesAllPositions) {
  const FilterParams p{64, 4, Variant::Standard, 0, {SchemeKind::NaiveDouble, 5}};
  const BloomFilter probe(p);
  SplitMix64 rng(8);
  const auto x = random_element(rng);
  const auto y = find_reverse_partner(p.scheme, x, 64, 4, 9);
  EXPECT_EQ(position_set(probe, x), position_set(probe, y.element));
  EXPECT_NE(x, y.element);
}

TEST(Overlap, IncidenceMatchesEnumeration) {
  const auto rows = overlap_incidence_experiment(64, 4, 200000, 3);
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& r : rows) {
    ASSERT_TRUE(r.full.reference.has_value());
    EXPECT_LE(*r.full.sigma_distance(), 4.0) << to_string(r.variant);
  }
  // Double hashing makes full overlaps far likelier than independent k-subsets.
  EXPECT_GT(*rows[0].full.reference, 1e-4);
}

TEST(Disjointness, SmallRunMatchesExactValues) {
  const auto r = disjointness_experiment(64, 4, 4, 4, 20000, 11);
  EXPECT_LE(r.standard.sigma_distance(r.exact.standard), 4.0);
  EXPECT_LE(r.partitioned.sigma_distance(r.exact.partitioned), 4.0);
  EXPECT_LT(r.partitioned.estimate, r.standard.estimate);
  EXPECT_DOUBLE_EQ(*r.standard.reference, r.formula.standard);
  EXPECT_THROW(disjointness_experiment(63, 4, 1, 1, 10, 1), InvalidParams);
}
