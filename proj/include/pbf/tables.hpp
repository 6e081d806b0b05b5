#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "pbf/analysis.hpp"
#include "pbf/errors.hpp"

// The four comparison tables, computed live from the analysis functions.

namespace pbf::tables {

enum class OutputFormat { Csv, Markdown, Json };

inline OutputFormat parse_format(std::string_view s) {
  if (s == "csv") return OutputFormat::Csv;
  if (s == "markdown" || s == "md") return OutputFormat::Markdown;
  if (s == "json") return OutputFormat::Json;
  throw InvalidParams(fmt::format("unknown output format '{}'", s));
}

/// Printed text plus, for numeric cells, the full-precision value.
struct Cell {
  std::string text;
  std::optional<double> value;
  std::optional<std::int64_t> integer;

  static Cell number(double v, int decimals) { return {fmt::format("{:.{}f}", v, decimals), v, std::nullopt}; }
  static Cell count(std::int64_t v) { return {fmt::format("{}", v), std::nullopt, v}; }
  static Cell label(std::string s) { return {std::move(s), std::nullopt, std::nullopt}; }
};

struct Table {
  int id = 0;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

struct Occupation {
  std::string_view label;
  double fraction;
};

inline constexpr std::array<std::pair<std::uint64_t, std::uint64_t>, 8> kGeometryRows{{
    {64, 4}, {64, 8}, {512, 4}, {512, 8}, {512, 16}, {4096, 4}, {4096, 8}, {4096, 16}}};
inline constexpr std::array<std::pair<std::uint64_t, std::uint64_t>, 4> kCollisionRows{{
    {64, 4}, {64, 8}, {512, 8}, {512, 16}}};

/// F_a, F_s, F_p and F_p/F_s at nominal capacity.
inline Table table1(analysis::NConvention conv = analysis::NConvention::Floor) {
  Table t{1, {"m", "k", "F_a", "F_s", "F_p", "F_p/F_s"}, {}};
  for (auto [m, k] : kGeometryRows) {
    const std::uint64_t n = analysis::nominal_capacity(m, k, 1.0, conv);
    const double fa = analysis::fpr_approx(static_cast<double>(n), m, k);
    const double fs = analysis::fpr_standard_exact(n, m, k);
    const double fp = analysis::fpr_partitioned_exact(static_cast<double>(n), m, k);
    t.rows.push_back({Cell::count(static_cast<std::int64_t>(m)), Cell::count(static_cast<std::int64_t>(k)),
                      Cell::number(fa, 8), Cell::number(fs, 8), Cell::number(fp, 8), Cell::number(fp / fs, 8)});
  }
  return t;
}

/// F_p/F_s at 1/4, 1/2 and 1/1 of nominal capacity.
inline Table table2(analysis::NConvention conv = analysis::NConvention::Floor) {
  static constexpr std::array<Occupation, 3> occupations{{{"1/4", 0.25}, {"1/2", 0.5}, {"1/1", 1.0}}};
  Table t{2, {"m", "k", "1/4", "1/2", "1/1"}, {}};
  for (auto [m, k] : kGeometryRows) {
    std::vector<Cell> row{Cell::count(static_cast<std::int64_t>(m)), Cell::count(static_cast<std::int64_t>(k))};
    for (const auto& occ : occupations) {
      const std::uint64_t n = analysis::nominal_capacity(m, k, occ.fraction, conv);
      const double ratio = analysis::fpr_partitioned_exact(static_cast<double>(n), m, k) /
                           analysis::fpr_standard_exact(n, m, k);
      row.push_back(Cell::number(ratio, 8));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

/// Per-element over global rate, F_s(n,m,k,k-c)/F_s(n,m,k), for c = 0..3
/// collisions.
inline Table table3(analysis::NConvention conv = analysis::NConvention::Floor) {
  static constexpr std::array<Occupation, 3> occupations{{{"1/1", 1.0}, {"1/2", 0.5}, {"1/4", 0.25}}};
  Table t{3, {"occupation", "m", "k", "c=0", "c=1", "c=2", "c=3"}, {}};
  for (const auto& occ : occupations)
    for (auto [m, k] : kCollisionRows) {
      const std::uint64_t n = analysis::nominal_capacity(m, k, occ.fraction, conv);
      // One occupancy distribution serves all five rates of the row.
      const analysis::OccupancyDistribution dist(n * k, m);
      const double md = static_cast<double>(m);
      const double global =
          dist.expect([&](std::uint64_t i) { return std::pow(static_cast<double>(i) / md, static_cast<double>(k)); });
      std::vector<Cell> row{Cell::label(std::string(occ.label)), Cell::count(static_cast<std::int64_t>(m)),
                            Cell::count(static_cast<std::int64_t>(k))};
      for (std::uint64_t c = 0; c <= 3; ++c) {
        const double per = dist.expect([&](std::uint64_t i) { return analysis::distinct_hit_prob(i, m, k - c); });
        row.push_back(Cell::number(per / global, 2));
      }
      t.rows.push_back(std::move(row));
    }
  return t;
}

/// Probability of some hash collision and of exactly c = 0..3 collisions.
inline Table table4() {
  Table t{4, {"m", "k", "some", "c=0", "c=1", "c=2", "c=3"}, {}};
  for (auto [m, k] : kCollisionRows) {
    const auto dist = analysis::collision_count_distribution(k, m);
    std::vector<Cell> row{Cell::count(static_cast<std::int64_t>(m)), Cell::count(static_cast<std::int64_t>(k)),
                          Cell::number(analysis::birthday_collision_prob(m, k), 4)};
    for (std::uint64_t c = 0; c <= 3; ++c) row.push_back(Cell::number(dist[k - c], 4));
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline Table build(int which, analysis::NConvention conv = analysis::NConvention::Floor) {
  switch (which) {
    case 1: return table1(conv);
    case 2: return table2(conv);
    case 3: return table3(conv);
    case 4: return table4();
  }
  throw InvalidParams(fmt::format("no table {} (expected 1-4)", which));
}

inline std::string render(const Table& t, OutputFormat format) {
  std::string out;
  switch (format) {
    case OutputFormat::Csv:
      out += fmt::format("{}\n", fmt::join(t.columns, ","));
      for (const auto& row : t.rows) {
        std::vector<std::string_view> cells;
        for (const auto& c : row) cells.push_back(c.text);
        out += fmt::format("{}\n", fmt::join(cells, ","));
      }
      return out;
    case OutputFormat::Markdown: {
      out += fmt::format("| {} |\n", fmt::join(t.columns, " | "));
      out += "|";
      for (std::size_t i = 0; i < t.columns.size(); ++i) out += "---:|";
      out += "\n";
      for (const auto& row : t.rows) {
        std::vector<std::string_view> cells;
        for (const auto& c : row) cells.push_back(c.text);
        out += fmt::format("| {} |\n", fmt::join(cells, " | "));
      }
      return out;
    }
    case OutputFormat::Json: {
      nlohmann::json rows = nlohmann::json::array();
      for (const auto& row : t.rows) {
        nlohmann::json r = nlohmann::json::object();
        for (std::size_t i = 0; i < row.size(); ++i) {
          const Cell& c = row[i];
          if (c.value)
            r[t.columns[i]] = *c.value;
          else if (c.integer)
            r[t.columns[i]] = *c.integer;
          else
            r[t.columns[i]] = c.text;
        }
        rows.push_back(std::move(r));
      }
      nlohmann::json doc{{"table", t.id}, {"columns", t.columns}, {"rows", std::move(rows)}};
      return doc.dump(2) + "\n";
    }
  }
  return out;
}

}  // namespace pbf::tables
