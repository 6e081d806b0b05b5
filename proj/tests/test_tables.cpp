#include <gtest/gtest.h>

#include <chrono>
#include <set>

#include "support.hpp"

using namespace pbf;
using namespace pbf::tables;
namespace t = pbf::testing;

namespace {

using CellId = std::tuple<int, int, int>;  // table, row, column

/// Cells the computed tables do not reproduce under the floor convention,
/// beyond one unit in the last printed digit. See README "Reproduction".
const std::set<CellId> kKnownDivergent = {
    // Table 1: m=64, k=8 ratio (1.21703636 computed, exact rational agrees).
    {1, 1, 5},
    // Table 2: the whole 1/4 column below m=4096, the m=64 rows at 1/2, and m=64 k=8 at 1/1.
    {2, 0, 2}, {2, 1, 2}, {2, 2, 2}, {2, 3, 2}, {2, 4, 2}, {2, 0, 3}, {2, 1, 3}, {2, 1, 4},
    // Table 3: m=64 rows at 1/2 and 1/4, and c=3 of the m=512 rows at 1/4.
    {3, 4, 4}, {3, 4, 5}, {3, 4, 6}, {3, 5, 3}, {3, 5, 4}, {3, 5, 5}, {3, 5, 6},
    {3, 8, 3}, {3, 8, 4}, {3, 8, 5}, {3, 8, 6}, {3, 9, 4}, {3, 9, 5}, {3, 9, 6},
    {3, 10, 6}, {3, 11, 6},
};

std::set<CellId> divergent_cells(int which) {
  const auto expected = t::read_csv(t::data_path("table" + std::to_string(which) + ".csv"));
  const auto got = t::parse_csv_text(render(build(which), OutputFormat::Csv));
  EXPECT_EQ(got.size(), expected.size());
  EXPECT_EQ(got.front(), expected.front());
  std::set<CellId> out;
  for (std::size_t r = 1; r < std::min(got.size(), expected.size()); ++r)
    for (std::size_t c = 0; c < expected[r].size(); ++c) {
      const bool numeric = expected[r][c].find('.') != std::string::npos;
      const bool same = numeric ? t::last_digit_distance(got[r][c], expected[r][c]) <= 1 : got[r][c] == expected[r][c];
      if (!same) out.insert({which, static_cast<int>(r - 1), static_cast<int>(c)});
    }
  return out;
}

std::set<CellId> known_for(int which) {
  std::set<CellId> s;
  for (const auto& id : kKnownDivergent)
    if (std::get<0>(id) == which) s.insert(id);
  return s;
}

}  // namespace

TEST(Tables, Table1MatchesGoldenExceptDocumentedCell) { EXPECT_EQ(divergent_cells(1), known_for(1)); }
TEST(Tables, Table2MatchesGoldenExceptDocumentedCells) { EXPECT_EQ(divergent_cells(2), known_for(2)); }
TEST(Tables, Table3MatchesGoldenExceptDocumentedCells) { EXPECT_EQ(divergent_cells(3), known_for(3)); }
TEST(Tables, Table4MatchesGolden) { EXPECT_TRUE(divergent_cells(4).empty()); }

TEST(Tables, Table1Anchors) {
  const Table tb = table1();
  EXPECT_EQ(tb.rows[1][2].text, "0.00227672");
  EXPECT_EQ(tb.rows[0][4].text, "0.06676410");
  EXPECT_EQ(tb.rows[4][5].text, "1.09783475");
}

TEST(Tables, Table3QualitativeClaimsUnderEveryConvention) {
  using analysis::NConvention;
  for (auto conv : {NConvention::Floor, NConvention::Round, NConvention::Ceil, NConvention::ScaledFloor}) {
    const Table tb = table3(conv);
    ASSERT_EQ(tb.rows.size(), 12u);
    double largest = 0.0;
    for (const auto& row : tb.rows) {
      for (int c = 4; c <= 6; ++c) EXPECT_GT(*row[c].value, *row[c - 1].value) << analysis::to_string(conv);
      largest = std::max(largest, *row[6].value);
    }
    // Growth with collisions is steepest at the lowest occupation.
    for (std::size_t g = 0; g < 4; ++g) {
      const double full = *tb.rows[g][6].value, half = *tb.rows[4 + g][6].value, quarter = *tb.rows[8 + g][6].value;
      EXPECT_LT(full, half) << analysis::to_string(conv);
      EXPECT_LT(half, quarter) << analysis::to_string(conv);
    }
    EXPECT_GT(largest, 100.0) << analysis::to_string(conv);
  }
}

TEST(Tables, RenderFormats) {
  const Table tb = table4();
  const std::string csv = render(tb, OutputFormat::Csv);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "m,k,some,c=0,c=1,c=2,c=3");
  const std::string md = render(tb, OutputFormat::Markdown);
  EXPECT_NE(md.find("| 64 | 8 | 0.3660 | 0.6340 |"), std::string::npos);
  const auto j = nlohmann::json::parse(render(tb, OutputFormat::Json));
  EXPECT_EQ(j["table"], 4);
  EXPECT_EQ(j["rows"][1]["k"], 8);
  EXPECT_NEAR(j["rows"][1]["some"].get<double>(), analysis::birthday_collision_prob(64, 8), 0.0);
  EXPECT_THROW(parse_format("xml"), InvalidParams);
  EXPECT_THROW(build(5), InvalidParams);
}

TEST(Tables, Table1RunsQuickly) {
  const auto start = std::chrono::steady_clock::now();
  (void)table1();
  EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(), 10.0);
}
