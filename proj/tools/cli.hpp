#pragma once

#include <cmath>
#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "pbf/pbf.hpp"

// `pbf` command-line front end. run_cli is kept free of process globals so
// tests can drive it with string streams.

namespace pbf::cli {

using nlohmann::json;
using tables::OutputFormat;

inline std::vector<std::byte> decode_hex(const std::string& s) {
  if (s.size() % 2 != 0) throw InvalidParams(fmt::format("hex element '{}' has odd length", s));
  auto nibble = [&](char c) -> unsigned {
    if (c >= '0' && c <= '9') return static_cast<unsigned>(c - '0');
    if (c >= 'a' && c <= 'f') return static_cast<unsigned>(c - 'a' + 10);
    if (c >= 'A' && c <= 'F') return static_cast<unsigned>(c - 'A' + 10);
    throw InvalidParams(fmt::format("'{}' is not a hex string", s));
  };
  std::vector<std::byte> out;
  for (std::size_t i = 0; i < s.size(); i += 2)
    out.push_back(static_cast<std::byte>(nibble(s[i]) << 4 | nibble(s[i + 1])));
  return out;
}

inline std::string encode_hex(std::span<const std::byte> bytes) {
  std::string s;
  for (auto b : bytes) s += fmt::format("{:02x}", static_cast<unsigned>(b));
  return s;
}

inline std::vector<std::byte> element_bytes(const std::string& line, bool hex) {
  if (hex) return decode_hex(line);
  const auto* p = reinterpret_cast<const std::byte*>(line.data());
  return {p, p + line.size()};
}

/// Elements from the command line, or one per input line when none are given.
inline std::vector<std::vector<std::byte>> gather_elements(const std::vector<std::string>& args, bool hex,
                                                           std::istream& in) {
  std::vector<std::vector<std::byte>> out;
  if (!args.empty()) {
    for (const auto& a : args) out.push_back(element_bytes(a, hex));
    return out;
  }
  for (std::string line; std::getline(in, line);) out.push_back(element_bytes(line, hex));
  return out;
}

inline std::uint64_t require_integer(double v, const char* name) {
  if (v < 0 || std::floor(v) != v)
    throw InvalidParams(fmt::format("--{} must be a non-negative integer for this formula, got {}", name, v));
  return static_cast<std::uint64_t>(v);
}

inline void print_values(std::ostream& out, const std::vector<std::pair<std::string, double>>& values,
                         OutputFormat format) {
  if (format == OutputFormat::Json) {
    json doc = json::object();
    for (const auto& [k, v] : values) doc[k] = v;
    out << doc.dump() << "\n";
    return;
  }
  if (values.size() == 1) {
    out << fmt::format("{:.8f}\n", values.front().second);
    return;
  }
  if (format == OutputFormat::Markdown) out << "| name | value |\n|---|---:|\n";
  for (const auto& [k, v] : values)
    out << (format == OutputFormat::Markdown ? fmt::format("| {} | {:.8f} |\n", k, v) : fmt::format("{},{:.8f}\n", k, v));
}

struct ReportRow {
  std::string label;
  mc::ExperimentReport report;
  std::optional<double> formula;  // second reference value, when one exists
};

inline void print_reports(std::ostream& out, const std::vector<ReportRow>& rows, OutputFormat format) {
  if (format == OutputFormat::Json) {
    json arr = json::array();
    for (const auto& row : rows) {
      const auto& r = row.report;
      json o{{"label", row.label},     {"positives", r.positives}, {"trials", r.trials},
             {"estimate", r.estimate}, {"std_error", r.std_error}, {"ci95", {r.ci_lo, r.ci_hi}},
             {"exact_interval", r.exact_interval}};
      if (r.reference) {
        o["reference"] = *r.reference;
        o["sigma"] = *r.sigma_distance();
      }
      if (row.formula) {
        o["formula"] = *row.formula;
        o["formula_sigma"] = r.sigma_distance(*row.formula);
      }
      arr.push_back(std::move(o));
    }
    out << arr.dump(2) << "\n";
    return;
  }
  const std::vector<std::string> cols{"label", "positives", "trials", "estimate", "std_error", "ci95_lo",
                                      "ci95_hi", "reference", "sigma", "formula", "formula_sigma"};
  const bool md = format == OutputFormat::Markdown;
  out << (md ? fmt::format("| {} |\n|{}\n", fmt::join(cols, " | "), [&] {
    std::string s;
    for (std::size_t i = 0; i < cols.size(); ++i) s += "---|";
    return s;
  }())
             : fmt::format("{}\n", fmt::join(cols, ",")));
  for (const auto& row : rows) {
    const auto& r = row.report;
    auto opt = [](std::optional<double> v, int digits) {
      return v ? fmt::format("{:.{}f}", *v, digits) : std::string();
    };
    std::vector<std::string> cells{row.label,
                                   fmt::format("{}", r.positives),
                                   fmt::format("{}", r.trials),
                                   fmt::format("{:.8f}", r.estimate),
                                   fmt::format("{:.8f}", r.std_error),
                                   fmt::format("{:.8f}", r.ci_lo),
                                   fmt::format("{:.8f}", r.ci_hi),
                                   opt(r.reference, 8),
                                   opt(r.sigma_distance(), 2),
                                   opt(row.formula, 8),
                                   row.formula ? fmt::format("{:.2f}", r.sigma_distance(*row.formula)) : ""};
    out << (md ? fmt::format("| {} |\n", fmt::join(cells, " | ")) : fmt::format("{}\n", fmt::join(cells, ",")));
  }
}

inline int run_cli(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Standard, partitioned and blocked Bloom filters with exact false-positive analysis", "pbf"};
  app.require_subcommand(1);

  // ---- filter ------------------------------------------------------------
  auto* filter = app.add_subcommand("filter", "Create, update and inspect PBF1 filter files");
  filter->require_subcommand(1);

  std::string file, file_b, out_file, variant_s = "standard", scheme_s = "independent";
  std::uint64_t m = 0, block_bits = 0, seed = 0;
  std::uint32_t k = 0;
  bool hex = false;
  std::vector<std::string> elements;

  auto* create = filter->add_subcommand("create", "Write an empty filter");
  create->add_option("file", file, "Output filter file")->required();
  create->add_option("--variant", variant_s, "standard | partitioned | blocked-standard | blocked-partitioned");
  create->add_option("--m", m, "Total bits")->required();
  create->add_option("--k", k, "Hash functions")->required();
  create->add_option("--block-bits", block_bits, "Bits per block (blocked variants, default 512)");
  create->add_option("--scheme", scheme_s, "independent | wide-split | naive-double | safe-double");
  create->add_option("--seed", seed, "Hash seed");

  auto* insert = filter->add_subcommand("insert", "Insert elements (arguments or one per stdin line)");
  insert->add_option("file", file, "Filter file, updated in place unless -o is given")->required();
  insert->add_option("elements", elements, "Elements; stdin lines when omitted");
  insert->add_option("-o,--output", out_file, "Write the result here instead");
  insert->add_flag("--hex", hex, "Elements are hex-encoded bytes");

  auto* query = filter->add_subcommand("query", "Print present/absent per element");
  query->add_option("file", file, "Filter file")->required();
  query->add_option("elements", elements, "Elements; stdin lines when omitted");
  query->add_flag("--hex", hex, "Elements are hex-encoded bytes");

  auto add_binary = [&](const char* name, const char* help, bool has_output) {
    auto* sub = filter->add_subcommand(name, help);
    sub->add_option("a", file, "First filter")->required();
    sub->add_option("b", file_b, "Second filter")->required();
    if (has_output) sub->add_option("-o,--output", out_file, "Result filter file")->required();
    return sub;
  };
  auto* unite_cmd = add_binary("union", "Bitwise OR of two filters", true);
  auto* intersect_cmd = add_binary("intersect", "Bitwise AND of two filters", true);
  auto* disjoint_cmd = add_binary("disjoint", "Print 'disjoint' when the sets are provably disjoint", false);

  std::uint64_t fold_to = 0;
  auto* fold = filter->add_subcommand("fold", "Fold a standard filter to m' bits (bit i -> i mod m')");
  fold->add_option("file", file, "Filter file")->required();
  fold->add_option("--to", fold_to, "New size m' (must divide m)")->required();
  fold->add_option("-o,--output", out_file, "Result filter file")->required();

  std::uint32_t keep_parts = 0;
  auto* truncate = filter->add_subcommand("truncate", "Keep the first k' parts of a partitioned filter");
  truncate->add_option("file", file, "Filter file")->required();
  truncate->add_option("--parts", keep_parts, "Parts to keep, k'")->required();
  truncate->add_option("-o,--output", out_file, "Result filter file")->required();

  std::string format_s = "csv";
  auto* info = filter->add_subcommand("info", "Print parameters and fill ratios");
  info->add_option("file", file, "Filter file")->required();
  info->add_option("--format", format_s, "csv | markdown | json");

  // ---- analyze -----------------------------------------------------------
  auto* analyze = app.add_subcommand("analyze", "Evaluate one false-positive formula");
  std::string formula;
  double n_real = 0, n1 = 0, n2 = 0, occupation = 1.0;
  std::uint64_t d = 0, balls = 0, i_bins = 0;
  std::string convention_s = "floor";
  bool have_i = false;
  analyze->add_option("formula", formula,
                      "birthday | fa | original | fs | fp | per-element | distinct-hit | occupancy | collisions | "
                      "overlap | capacity | surjection")
      ->required();
  analyze->add_option("--n", n_real, "Inserted elements");
  analyze->add_option("--m", m, "Filter bits (or bins)");
  analyze->add_option("--k", k, "Hash functions");
  analyze->add_option("--d", d, "Distinct positions of the queried element");
  analyze->add_option("--n1", n1, "First set size");
  analyze->add_option("--n2", n2, "Second set size");
  analyze->add_option("--balls", balls, "Balls (occupancy)");
  analyze->add_option("--i", i_bins, "Occupied bins / set bits")->each([&](const std::string&) { have_i = true; });
  analyze->add_option("--occupation", occupation, "Fraction of nominal capacity");
  analyze->add_option("--n-convention", convention_s, "floor | round | ceil | scaled-floor");
  analyze->add_option("--format", format_s, "csv | markdown | json");

  // ---- table -------------------------------------------------------------
  auto* table = app.add_subcommand("table", "Print one of the comparison tables");
  int which = 0;
  table->add_option("which", which, "Table number")->required()->check(CLI::Range(1, 4));
  table->add_option("--format", format_s, "csv | markdown | json");
  table->add_option("--n-convention", convention_s, "floor | round | ceil | scaled-floor");

  // ---- simulate ----------------------------------------------------------
  auto* simulate = app.add_subcommand("simulate", "Run a seeded Monte Carlo experiment");
  std::string experiment, step_s;
  std::uint64_t n_sim = 0, trials = 100000, sim_seed = 1, hash_seed = 0;
  std::uint32_t shards = mc::kDefaultShards;
  double fill = 0.5;
  simulate->add_option("experiment", experiment, "fpr | per-element | double-hash | overlap | disjoint")->required();
  simulate->add_option("--variant", variant_s, "Filter variant");
  simulate->add_option("--scheme", scheme_s, "Hash scheme");
  simulate->add_option("--m", m, "Filter bits (block bits for double-hash)");
  simulate->add_option("--k", k, "Hash functions");
  simulate->add_option("--block-bits", block_bits, "Bits per block (blocked variants)");
  simulate->add_option("--n", n_sim, "Inserts per trial");
  simulate->add_option("--n1", n1, "First set size (disjoint)");
  simulate->add_option("--n2", n2, "Second set size (disjoint)");
  simulate->add_option("--d", d, "Distinct positions of the crafted element (per-element)");
  simulate->add_option("--step-class", step_s, "0 | half | quarter | odd (double-hash)");
  simulate->add_option("--fill", fill, "Bit density of random filters (double-hash)");
  simulate->add_option("--trials", trials, "Trials")->check(CLI::Range(std::uint64_t{1}, UINT64_MAX));
  simulate->add_option("--seed", sim_seed, "Experiment seed");
  simulate->add_option("--hash-seed", hash_seed, "Hash seed of the simulated filters");
  simulate->add_option("--shards", shards, "Shards (fixed for reproducibility)")->check(CLI::Range(1u, 4096u));
  simulate->add_option("--format", format_s, "csv | markdown | json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    const OutputFormat format = tables::parse_format(format_s);
    auto target = [&] { return out_file.empty() ? file : out_file; };

    if (create->parsed()) {
      FilterParams p;
      p.m = m;
      p.k = k;
      p.variant = parse_variant(variant_s);
      p.block_bits = is_blocked(p.variant) ? (block_bits ? block_bits : kDefaultBlockBits) : block_bits;
      p.scheme = {parse_scheme(scheme_s), seed};
      save(BloomFilter(p), file);
      return 0;
    }
    if (insert->parsed()) {
      BloomFilter f = load(file);
      for (const auto& e : gather_elements(elements, hex, in)) f.insert(Element(e));
      save(f, target());
      return 0;
    }
    if (query->parsed()) {
      const BloomFilter f = load(file);
      for (const auto& e : gather_elements(elements, hex, in)) out << (f.query(Element(e)) ? "present" : "absent") << "\n";
      return 0;
    }
    if (unite_cmd->parsed()) {
      save(unite(load(file), load(file_b)), out_file);
      return 0;
    }
    if (intersect_cmd->parsed()) {
      save(intersect(load(file), load(file_b)), out_file);
      return 0;
    }
    if (disjoint_cmd->parsed()) {
      out << (provably_disjoint(load(file), load(file_b)) ? "disjoint" : "possibly-overlapping") << "\n";
      return 0;
    }
    if (fold->parsed()) {
      save(fold_standard(load(file), fold_to), out_file);
      return 0;
    }
    if (truncate->parsed()) {
      save(truncate_parts(load(file), keep_parts), out_file);
      return 0;
    }
    if (info->parsed()) {
      const BloomFilter f = load(file);
      const FilterParams& p = f.params();
      json doc{{"variant", to_string(p.variant)},
               {"scheme", to_string(p.scheme.kind)},
               {"m", p.m},
               {"k", p.k},
               {"block_bits", p.block_bits},
               {"seed", p.scheme.seed},
               {"inserted_count", f.inserted_count()},
               {"popcount", f.popcount()},
               {"fill_ratio", f.fill_ratio()}};
      if (p.variant == Variant::Partitioned) doc["per_part_fill"] = f.per_part_fill();
      if (format == OutputFormat::Json) {
        out << doc.dump(2) << "\n";
      } else {
        const bool md = format == OutputFormat::Markdown;
        if (md) out << "| field | value |\n|---|---|\n";
        for (const auto& [key, val] : doc.items()) {
          std::string v;
          if (val.is_number_float())
            v = fmt::format("{:.8f}", val.get<double>());
          else if (val.is_array()) {
            std::vector<std::string> parts;
            for (const auto& x : val) parts.push_back(fmt::format("{:.8f}", x.get<double>()));
            v = fmt::format("{}", fmt::join(parts, md ? " " : ";"));
          } else if (val.is_string())
            v = val.get<std::string>();
          else
            v = val.dump();
          out << (md ? fmt::format("| {} | {} |\n", key, v) : fmt::format("{},{}\n", key, v));
        }
      }
      return 0;
    }

    if (analyze->parsed()) {
      using namespace analysis;
      std::vector<std::pair<std::string, double>> values;
      if (formula == "birthday") {
        values.emplace_back("birthday", birthday_collision_prob(m, k));
      } else if (formula == "fa") {
        values.emplace_back("fa", fpr_approx(n_real, m, k));
      } else if (formula == "original") {
        values.emplace_back("original", fpr_original_bloom(n_real, m, k));
      } else if (formula == "fs") {
        values.emplace_back("fs", fpr_standard_exact(require_integer(n_real, "n"), m, k));
      } else if (formula == "fp") {
        values.emplace_back("fp", fpr_partitioned_exact(n_real, m, k));
      } else if (formula == "per-element") {
        values.emplace_back("per_element", fpr_per_element(require_integer(n_real, "n"), m, k, d));
      } else if (formula == "distinct-hit") {
        values.emplace_back("distinct_hit", distinct_hit_prob(i_bins, m, d));
      } else if (formula == "occupancy") {
        const OccupancyDistribution occ(balls, m);
        if (have_i)
          values.emplace_back(fmt::format("B({},{},{})", balls, m, i_bins), occ[i_bins]);
        else
          for (std::uint64_t i = 0; i <= m; ++i) values.emplace_back(fmt::format("{}", i), occ[i]);
      } else if (formula == "collisions") {
        const auto dist = collision_count_distribution(k, m);
        values.emplace_back("some", birthday_collision_prob(m, k));
        for (std::uint64_t dd = k; dd >= 1; --dd) values.emplace_back(fmt::format("c={}", k - dd), dist[dd]);
      } else if (formula == "overlap") {
        const auto p = false_overlap_probs(m, k, n1, n2);
        values.emplace_back("P_s", p.standard);
        values.emplace_back("P_p", p.partitioned);
        if (n1 == std::floor(n1) && n2 == std::floor(n2)) {
          const auto ex = false_overlap_exact(m, k, static_cast<std::uint64_t>(n1), static_cast<std::uint64_t>(n2));
          values.emplace_back("exact_standard", ex.standard);
          values.emplace_back("exact_partitioned", ex.partitioned);
        }
      } else if (formula == "capacity") {
        const auto n = nominal_capacity(m, k, occupation, parse_n_convention(convention_s));
        if (format == OutputFormat::Json)
          out << json{{"capacity", n}}.dump() << "\n";
        else
          out << n << "\n";
        return 0;
      } else if (formula == "surjection") {
        const BigInt e = surjection_count(require_integer(n_real, "n"), i_bins);
        out << (format == OutputFormat::Json ? fmt::format("{{\"surjection\":\"{}\"}}\n", e.str())
                                             : fmt::format("{}\n", e.str()));
        return 0;
      } else {
        throw InvalidParams(fmt::format("unknown formula '{}'; see `pbf analyze --help`", formula));
      }
      print_values(out, values, format);
      return 0;
    }

    if (table->parsed()) {
      out << tables::render(tables::build(which, analysis::parse_n_convention(convention_s)), format);
      return 0;
    }

    if (simulate->parsed()) {
      std::vector<ReportRow> rows;
      auto params = [&] {
        FilterParams p;
        p.m = m;
        p.k = k;
        p.variant = parse_variant(variant_s);
        p.block_bits = is_blocked(p.variant) ? (block_bits ? block_bits : kDefaultBlockBits) : 0;
        p.scheme = {parse_scheme(scheme_s), hash_seed};
        return p;
      };
      if (experiment == "fpr") {
        const mc::ExperimentConfig cfg{params(), n_sim, trials, sim_seed, shards};
        rows.push_back({fmt::format("fpr {} {}", variant_s, scheme_s), mc::estimate_global_fpr(cfg), std::nullopt});
      } else if (experiment == "per-element") {
        const FilterParams p = params();
        if (is_blocked(p.variant)) throw InvalidParams("per-element experiment needs an unblocked variant");
        const std::uint32_t want = d ? static_cast<std::uint32_t>(d) : p.k;
        const auto crafted = mc::find_element_with_distinct_count(p.scheme, p.index_layout(), want, derive_seed(sim_seed, 7));
        const mc::ExperimentConfig cfg{p, n_sim, trials, sim_seed, shards};
        std::optional<double> global = mc::reference_global_fpr(p, n_sim);
        rows.push_back({fmt::format("per-element d={} element={} attempts={}", want, encode_hex(crafted.element),
                                    crafted.attempts),
                        mc::estimate_per_element_fpr(crafted.element, cfg), global});
      } else if (experiment == "double-hash") {
        std::vector<mc::StepClass> classes{mc::StepClass::Zero, mc::StepClass::Half, mc::StepClass::Quarter,
                                           mc::StepClass::Odd};
        if (!step_s.empty()) classes = {mc::parse_step_class(step_s)};
        const SchemeKind sk = scheme_s == "independent" ? SchemeKind::NaiveDouble : parse_scheme(scheme_s);
        for (const auto& r : mc::double_hash_weak_spot_experiment(m, k, fill, trials, sim_seed, sk, shards, classes))
          rows.push_back({fmt::format("step={} {} d={}", to_string(r.step), to_string(r.variant), r.distinct),
                          r.report, std::nullopt});
      } else if (experiment == "overlap") {
        const SchemeKind sk = scheme_s == "independent" ? SchemeKind::NaiveDouble : parse_scheme(scheme_s);
        for (const auto& r : mc::overlap_incidence_experiment(m, k, trials, sim_seed, sk, shards)) {
          rows.push_back({fmt::format("full-overlap {}", to_string(r.variant)), r.full, std::nullopt});
          rows.push_back({fmt::format("partial-overlap {}", to_string(r.variant)), r.partial, std::nullopt});
        }
      } else if (experiment == "disjoint") {
        const auto r = mc::disjointness_experiment(m, k, require_integer(n1, "n1"), require_integer(n2, "n2"),
                                                   trials, sim_seed, shards);
        auto s = r.standard;
        auto p = r.partitioned;
        s.reference = r.exact.standard;
        p.reference = r.exact.partitioned;
        rows.push_back({"false-overlap standard", s, r.formula.standard});
        rows.push_back({"false-overlap partitioned", p, r.formula.partitioned});
      } else {
        throw InvalidParams(fmt::format("unknown experiment '{}'", experiment));
      }
      print_reports(out, rows, format);
      return 0;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    if (const auto* sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front())
      err << fmt::format("hint: run `pbf {} --help` for usage\n", sub->get_name());
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace pbf::cli
