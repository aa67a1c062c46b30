// Synthetic-instance generation and the benchmark/sweep drivers.
//
// Generation is deterministic and portable: mt19937_64 with a fixed
// draw-to-double conversion, never std::uniform_real_distribution (its
// output differs across standard libraries). CSV numbers are printed with
// std::to_chars so a re-parse reproduces every double bit for bit.
#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "linearize.hpp"
#include "model.hpp"
#include "solvers.hpp"

namespace evplan {

// Optional replacements for the catalog defaults, applied at generation time.
struct ParamOverrides {
  std::optional<double> charge_kw;
  std::optional<double> max_accept_kw;
  std::optional<double> full_kwh;
  std::optional<double> safety_kwh;
  std::optional<double> consumption_kwh_per_min;
  std::optional<double> prep_min;
  std::optional<double> energy_price_eur_per_kwh;
  std::optional<double> time_loss_eur_per_min;
  std::optional<double> delta_small_min;
  std::optional<double> delta_big_min;
  std::optional<double> max_consec_min;
  std::optional<double> min_rest_min;
  std::optional<double> max_daily_min;
  std::optional<double> extra_budget_min;
};

inline std::vector<double> default_frac_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 16; ++i) grid.push_back(0.20 + 0.05 * i);
  return grid;
}

struct GenConfig {
  std::uint64_t seed = 0;
  int n = 5;
  std::pair<double, double> tau_range{30.0, 120.0};     // segment minutes
  std::pair<double, double> detour_range{2.0, 15.0};    // one-way detour minutes
  std::vector<double> fracs;  // initial battery as a fraction of full; empty = grid
  ParamOverrides overrides;
};

namespace detail {

// Fixed 53-bit conversion; the engine's output sequence is pinned by the
// standard, so instances are identical across platforms.
inline double uniform(std::mt19937_64& eng, double lo, double hi) {
  const double u = static_cast<double>(eng() >> 11) * 0x1.0p-53;
  return lo + u * (hi - lo);
}

}  // namespace detail

// One route drawn from the config's ranges, with the battery starting at
// frac * full. Draw order (all segment times, then all detours) is part of
// the format: changing it would silently change every seeded instance.
inline RouteInstance generate_instance(const GenConfig& cfg, double frac) {
  if (cfg.n < 1) throw std::invalid_argument("station count must be at least 1");
  std::mt19937_64 eng(cfg.seed);

  RouteInstance inst;
  for (int k = 0; k <= cfg.n; ++k)
    inst.segment_times_min.push_back(
        detail::uniform(eng, cfg.tau_range.first, cfg.tau_range.second));
  const ParamOverrides& ov = cfg.overrides;
  for (int k = 0; k < cfg.n; ++k) {
    Station s;
    s.detour_min = detail::uniform(eng, cfg.detour_range.first, cfg.detour_range.second);
    s.charge_kw = ov.charge_kw.value_or(defaults::kChargeKw);
    s.prep_min = ov.prep_min.value_or(defaults::kPrepMin);
    inst.stations.push_back(s);
  }

  inst.battery.full_kwh = ov.full_kwh.value_or(defaults::kFullKwh);
  inst.battery.safety_kwh =
      ov.safety_kwh.value_or(defaults::kSafetyFraction * inst.battery.full_kwh);
  inst.battery.consumption_kwh_per_min =
      ov.consumption_kwh_per_min.value_or(defaults::kConsumptionKwhPerMin);
  inst.battery.max_accept_kw = ov.max_accept_kw.value_or(defaults::kMaxAcceptKw);
  inst.battery.initial_kwh = frac * inst.battery.full_kwh;

  inst.hos.max_consec_min = ov.max_consec_min.value_or(defaults::kMaxConsecMin);
  inst.hos.min_rest_min = ov.min_rest_min.value_or(defaults::kMinRestMin);
  inst.hos.max_daily_min = ov.max_daily_min.value_or(defaults::kMaxDailyMin);
  inst.hos.extra_budget_min = ov.extra_budget_min.value_or(defaults::kExtraBudgetMin);

  inst.cost.energy_price_eur_per_kwh =
      ov.energy_price_eur_per_kwh.value_or(defaults::kEnergyPriceEurPerKwh);
  inst.cost.time_loss_eur_per_min =
      ov.time_loss_eur_per_min.value_or(defaults::kTimeLossEurPerMin);
  inst.cost.delta_small_min = ov.delta_small_min.value_or(defaults::kDeltaSmallMin);
  inst.cost.delta_big_min = ov.delta_big_min.value_or(defaults::kDeltaBigMin);

  const std::vector<std::string> problems = validate_instance(inst);
  if (!problems.empty())
    throw ValidationError("generated instance invalid: " + problems.front());
  return inst;
}

inline RouteInstance generate_instance(const GenConfig& cfg) {
  return generate_instance(cfg, cfg.fracs.empty() ? 1.0 : cfg.fracs.front());
}

struct BenchCase {
  int n = 0;
  std::uint64_t seed = 0;
  double frac = 1.0;
  RouteInstance inst;
};

inline std::vector<BenchCase> expand_cases(const std::vector<GenConfig>& configs) {
  std::vector<BenchCase> cases;
  for (const GenConfig& cfg : configs) {
    const std::vector<double> fracs = cfg.fracs.empty() ? default_frac_grid() : cfg.fracs;
    for (double frac : fracs)
      cases.push_back(BenchCase{cfg.n, cfg.seed, frac, generate_instance(cfg, frac)});
  }
  return cases;
}

struct BenchRow {
  int n = 0;
  std::uint64_t seed = 0;
  double frac = 1.0;
  std::optional<double> cost_exact;
  std::optional<double> cost_rollout;
  std::optional<double> lb;
  std::optional<double> ub;
  std::optional<double> gap_pct;
  std::optional<long> lp_exact;
  std::optional<long> lp_rollout;
  std::optional<double> t_exact_s;
  std::optional<double> t_rollout_s;
  bool feasible = false;
};

struct BenchOptions {
  bool run_exact = true;
  int exact_cap = kDefaultExactCap;
  RolloutConfig rollout;
};

// One benchmark row: relaxation bound, two-base rollout (greedy plus the
// rounded relaxation when available), and optionally the exact optimum.
// A per-case solver failure leaves a row with feasible = 0 rather than
// aborting the run.
inline BenchRow run_case(const BenchCase& bench_case, const BenchOptions& opts) {
  BenchRow row;
  row.n = bench_case.n;
  row.seed = bench_case.seed;
  row.frac = bench_case.frac;
  try {
    const RouteInstance& inst = bench_case.inst;
    const RelaxationSolution relax = relax_solve(inst);
    if (relax.feasible) row.lb = relax.bound;

    std::vector<BinaryPlan> bases{greedy_base(inst)};
    if (relax.feasible) bases.push_back(relax.rounded);
    const SolveReport ro = multi_base_rollout(inst, bases, opts.rollout);
    if (ro.feasible) row.cost_rollout = ro.cost;
    row.ub = ro.upper_bound;
    row.lp_rollout = ro.lp_calls;
    row.t_rollout_s = ro.wall_time_s;
    row.feasible = ro.feasible;

    if (opts.run_exact && bench_case.n <= opts.exact_cap) {
      const SolveReport ex = exact_solve(inst, opts.exact_cap);
      if (ex.feasible) row.cost_exact = ex.cost;
      row.lp_exact = ex.lp_calls;
      row.t_exact_s = ex.wall_time_s;
      row.feasible = ex.feasible;
    }
    if (row.cost_exact && row.cost_rollout && *row.cost_exact > 0.0)
      row.gap_pct = 100.0 * (*row.cost_rollout - *row.cost_exact) / *row.cost_exact;
  } catch (const std::exception&) {
    row = BenchRow{};
    row.n = bench_case.n;
    row.seed = bench_case.seed;
    row.frac = bench_case.frac;
  }
  return row;
}

inline std::vector<BenchRow> run_benchmark(const std::vector<BenchCase>& cases,
                                           const BenchOptions& opts = {}) {
  std::vector<BenchRow> rows;
  rows.reserve(cases.size());
  for (const BenchCase& c : cases) rows.push_back(run_case(c, opts));
  std::stable_sort(rows.begin(), rows.end(), [](const BenchRow& a, const BenchRow& b) {
    if (a.n != b.n) return a.n < b.n;
    if (a.seed != b.seed) return a.seed < b.seed;
    return a.frac < b.frac;
  });
  return rows;
}

// Per-N summary over the feasible rows.
struct BenchAggregate {
  int n = 0;
  int rows = 0;
  int feasible_rows = 0;
  std::optional<double> mean_gap_pct;    // rollout vs exact
  std::optional<double> median_gap_pct;
  std::optional<double> mean_ub_gap_pct; // base upper bound vs exact
  std::optional<double> mean_t_exact_s;
  std::optional<double> mean_t_rollout_s;
};

inline std::vector<BenchAggregate> aggregate_benchmark(const std::vector<BenchRow>& rows) {
  std::map<int, std::vector<const BenchRow*>> by_n;
  for (const BenchRow& r : rows) by_n[r.n].push_back(&r);

  std::vector<BenchAggregate> out;
  for (const auto& [n, group] : by_n) {
    BenchAggregate agg;
    agg.n = n;
    agg.rows = static_cast<int>(group.size());
    std::vector<double> gaps, ub_gaps, t_exact, t_rollout;
    for (const BenchRow* r : group) {
      if (r->feasible) ++agg.feasible_rows;
      if (r->gap_pct) gaps.push_back(*r->gap_pct);
      if (r->ub && r->cost_exact && *r->cost_exact > 0.0)
        ub_gaps.push_back(100.0 * (*r->ub - *r->cost_exact) / *r->cost_exact);
      if (r->t_exact_s) t_exact.push_back(*r->t_exact_s);
      if (r->t_rollout_s) t_rollout.push_back(*r->t_rollout_s);
    }
    auto mean = [](const std::vector<double>& v) -> std::optional<double> {
      if (v.empty()) return std::nullopt;
      double s = 0.0;
      for (double x : v) s += x;
      return s / static_cast<double>(v.size());
    };
    agg.mean_gap_pct = mean(gaps);
    agg.mean_ub_gap_pct = mean(ub_gaps);
    agg.mean_t_exact_s = mean(t_exact);
    agg.mean_t_rollout_s = mean(t_rollout);
    if (!gaps.empty()) {
      std::sort(gaps.begin(), gaps.end());
      const size_t mid = gaps.size() / 2;
      agg.median_gap_pct =
          gaps.size() % 2 == 1 ? gaps[mid] : 0.5 * (gaps[mid - 1] + gaps[mid]);
    }
    out.push_back(agg);
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV

// Shortest representation that parses back to the same double.
inline std::string format_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline constexpr const char* kBenchCsvHeader =
    "n,seed,frac,cost_exact,cost_rollout,lb,ub,gap_pct,lp_exact,lp_rollout,"
    "t_exact_s,t_rollout_s,feasible";

inline std::string rows_to_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream os;
  os << kBenchCsvHeader << "\n";
  auto opt = [](const std::optional<double>& v) {
    return v ? format_double(*v) : std::string();
  };
  for (const BenchRow& r : rows) {
    os << r.n << "," << r.seed << "," << format_double(r.frac) << ","
       << opt(r.cost_exact) << "," << opt(r.cost_rollout) << "," << opt(r.lb) << ","
       << opt(r.ub) << "," << opt(r.gap_pct) << ","
       << (r.lp_exact ? std::to_string(*r.lp_exact) : std::string()) << ","
       << (r.lp_rollout ? std::to_string(*r.lp_rollout) : std::string()) << ","
       << opt(r.t_exact_s) << "," << opt(r.t_rollout_s) << "," << (r.feasible ? 1 : 0)
       << "\n";
  }
  return os.str();
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(field);
      field.clear();
    } else {
      field.push_back(ch);
    }
  }
  fields.push_back(field);
  return fields;
}

inline std::optional<double> parse_opt_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return std::stod(s);
}

inline std::optional<long> parse_opt_long(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return std::stol(s);
}

}  // namespace detail

inline std::vector<BenchRow> parse_bench_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line != kBenchCsvHeader)
    throw SchemaError("benchmark CSV: bad header");
  std::vector<BenchRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> f = detail::split_csv_line(line);
    if (f.size() != 13) throw SchemaError("benchmark CSV: bad row");
    BenchRow r;
    r.n = std::stoi(f[0]);
    r.seed = std::stoull(f[1]);
    r.frac = std::stod(f[2]);
    r.cost_exact = detail::parse_opt_double(f[3]);
    r.cost_rollout = detail::parse_opt_double(f[4]);
    r.lb = detail::parse_opt_double(f[5]);
    r.ub = detail::parse_opt_double(f[6]);
    r.gap_pct = detail::parse_opt_double(f[7]);
    r.lp_exact = detail::parse_opt_long(f[8]);
    r.lp_rollout = detail::parse_opt_long(f[9]);
    r.t_exact_s = detail::parse_opt_double(f[10]);
    r.t_rollout_s = detail::parse_opt_double(f[11]);
    r.feasible = f[12] == "1";
    rows.push_back(r);
  }
  return rows;
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
}

// ---------------------------------------------------------------------------
// Sensitivity sweep

// Grid of values for one overridable parameter (schema field name).
struct SweepGrid {
  std::string param;  // safety_kwh | prep_min | time_loss_eur_per_min
  std::vector<double> values;
};

struct SweepRow {
  std::string param;
  double value = 0.0;
  int n = 0;
  std::optional<double> aog_rs;  // mean rollout-vs-exact gap, percent
  std::optional<double> aog_ub;  // mean base-bound-vs-exact gap, percent
};

namespace detail {

inline void apply_sweep_override(ParamOverrides& ov, const std::string& param,
                                 double value) {
  if (param == "safety_kwh") ov.safety_kwh = value;
  else if (param == "prep_min") ov.prep_min = value;
  else if (param == "time_loss_eur_per_min") ov.time_loss_eur_per_min = value;
  else throw std::invalid_argument("unknown sweep parameter: " + param);
}

}  // namespace detail

// Re-runs the benchmark for every grid point and reports per-N mean gaps.
// Exact solves are required here, so keep N within the enumeration cap.
inline std::vector<SweepRow> sensitivity_sweep(const std::vector<GenConfig>& base_configs,
                                               const std::vector<SweepGrid>& grids,
                                               const BenchOptions& opts = {}) {
  std::vector<SweepRow> out;
  for (const SweepGrid& grid : grids) {
    for (double value : grid.values) {
      std::vector<GenConfig> configs = base_configs;
      for (GenConfig& cfg : configs)
        detail::apply_sweep_override(cfg.overrides, grid.param, value);
      const std::vector<BenchRow> rows = run_benchmark(expand_cases(configs), opts);
      for (const BenchAggregate& agg : aggregate_benchmark(rows)) {
        SweepRow row;
        row.param = grid.param;
        row.value = value;
        row.n = agg.n;
        row.aog_rs = agg.mean_gap_pct;
        row.aog_ub = agg.mean_ub_gap_pct;
        out.push_back(row);
      }
    }
  }
  return out;
}

inline constexpr const char* kSweepCsvHeader = "param,value,n,aog_rs,aog_ub";

inline std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << kSweepCsvHeader << "\n";
  for (const SweepRow& r : rows) {
    os << r.param << "," << format_double(r.value) << "," << r.n << ","
       << (r.aog_rs ? format_double(*r.aog_rs) : std::string()) << ","
       << (r.aog_ub ? format_double(*r.aog_ub) : std::string()) << "\n";
  }
  return os.str();
}

}  // namespace evplan
