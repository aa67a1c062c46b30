// Command-line front end: solve one instance, generate a seeded instance,
// or run the benchmark / sensitivity-sweep drivers.
//
// Exit codes: 0 solved (or artifacts written), 1 infeasible problem,
// 2 usage or input-format errors.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "evplan/dynamics.hpp"
#include "evplan/harness.hpp"
#include "evplan/linearize.hpp"
#include "evplan/model.hpp"
#include "evplan/solvers.hpp"
#include "evplan/subproblem.hpp"

namespace {

constexpr int kExitSolved = 0;
constexpr int kExitInfeasible = 1;
constexpr int kExitUsage = 2;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw evplan::SchemaError("cannot open file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void emit_report(const evplan::SolveReport& report, const std::string& out_path) {
  const std::string text = evplan::report_to_json(report).dump(2) + "\n";
  if (out_path.empty()) std::cout << text;
  else evplan::write_file(out_path, text);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> parts;
  std::string part;
  std::istringstream is(text);
  while (std::getline(is, part, ',')) {
    if (!part.empty()) parts.push_back(part);
  }
  return parts;
}

evplan::RolloutConfig rollout_config(const evplan::RouteInstance& inst,
                                     const std::string& order, int budget) {
  evplan::RolloutConfig cfg;
  if (order == "reverse") {
    for (int k = inst.num_stations() - 1; k >= 0; --k) cfg.stage_order.push_back(k);
  } else if (order != "forward") {
    throw std::invalid_argument("--order must be forward or reverse");
  }
  if (budget >= 0) cfg.stage_budget = budget;
  return cfg;
}

// Report for a bare base plan: one subproblem solve.
evplan::SolveReport solve_base_plan(const evplan::RouteInstance& inst,
                                    const evplan::BinaryPlan& plan,
                                    const std::string& method) {
  const evplan::SubproblemResult res = evplan::solve_subproblem(inst, plan);
  evplan::SolveReport report;
  report.method = method;
  report.feasible = res.optimal;
  report.binary_plan = plan;
  report.continuous_plan = res.t;
  report.cost = res.cost;
  report.violation_score = res.violation_score;
  report.lp_calls = 1;
  return report;
}

int run_solve(const std::string& instance_path, const std::string& method,
              const std::string& bases_arg, const std::string& order, int budget,
              int repeat, int cap, const std::string& out_path) {
  const evplan::RouteInstance inst = evplan::parse_instance(read_file(instance_path));
  evplan::SolveReport report;

  if (method == "exact") {
    report = evplan::exact_solve(inst, cap);
  } else if (method == "greedy") {
    report = solve_base_plan(inst, evplan::greedy_base(inst), "greedy");
  } else if (method == "relaxed") {
    const evplan::RelaxationSolution relax = evplan::relax_solve(inst);
    if (!relax.feasible) {
      report.method = "relaxed";
      report.feasible = false;
    } else {
      report = solve_base_plan(inst, relax.rounded, "relaxed");
      report.lower_bound = relax.bound;
    }
  } else if (method == "rollout") {
    const evplan::RolloutConfig cfg = rollout_config(inst, order, budget);
    std::optional<double> lower;
    std::vector<evplan::BinaryPlan> bases;
    for (const std::string& name : split_list(bases_arg)) {
      if (name == "greedy") {
        bases.push_back(evplan::greedy_base(inst));
      } else if (name == "fullcharge") {
        bases.push_back(evplan::full_charge_plan(inst).first);
      } else if (name == "relaxed") {
        const evplan::RelaxationSolution relax = evplan::relax_solve(inst);
        if (relax.feasible) {
          lower = relax.bound;
          bases.push_back(relax.rounded);
        }
        // An infeasible relaxation proves the instance infeasible; the
        // remaining bases still get their chance to show that honestly.
      } else {
        throw std::invalid_argument(
            "--base entries must be greedy, relaxed, or fullcharge");
      }
    }
    if (bases.empty()) {
      report.method = "rollout";
      report.feasible = false;
    } else if (repeat > 0) {
      evplan::RolloutConfig rcfg = cfg;
      rcfg.max_repeat_iters = repeat;
      std::optional<evplan::SolveReport> best;
      std::optional<double> upper;
      long calls = 0;
      for (const evplan::BinaryPlan& base : bases) {
        evplan::SolveReport r = evplan::repeated_rollout(inst, base, rcfg);
        calls += r.lp_calls;
        if (r.upper_bound && (!upper || *r.upper_bound < *upper)) upper = r.upper_bound;
        const bool better =
            !best || (r.feasible && (!best->feasible || *r.cost < *best->cost)) ||
            (!r.feasible && !best->feasible &&
             *r.violation_score < *best->violation_score);
        if (better) best = std::move(r);
      }
      report = *best;
      report.lp_calls = calls;
      report.upper_bound = upper;
    } else {
      report = evplan::multi_base_rollout(inst, bases, cfg);
    }
    if (lower) report.lower_bound = lower;
  } else {
    throw std::invalid_argument("--method must be exact, rollout, greedy, or relaxed");
  }

  emit_report(report, out_path);
  return report.feasible ? kExitSolved : kExitInfeasible;
}

// --- benchmark / sweep config parsing ---------------------------------------

evplan::ParamOverrides parse_overrides(const nlohmann::json& j) {
  evplan::ParamOverrides ov;
  for (const auto& item : j.items()) {
    const double v = item.value().get<double>();
    const std::string& key = item.key();
    if (key == "charge_kw") ov.charge_kw = v;
    else if (key == "max_accept_kw") ov.max_accept_kw = v;
    else if (key == "full_kwh") ov.full_kwh = v;
    else if (key == "safety_kwh") ov.safety_kwh = v;
    else if (key == "consumption_kwh_per_min") ov.consumption_kwh_per_min = v;
    else if (key == "prep_min") ov.prep_min = v;
    else if (key == "energy_price_eur_per_kwh") ov.energy_price_eur_per_kwh = v;
    else if (key == "time_loss_eur_per_min") ov.time_loss_eur_per_min = v;
    else if (key == "delta_small_min") ov.delta_small_min = v;
    else if (key == "delta_big_min") ov.delta_big_min = v;
    else if (key == "max_consec_min") ov.max_consec_min = v;
    else if (key == "min_rest_min") ov.min_rest_min = v;
    else if (key == "max_daily_min") ov.max_daily_min = v;
    else if (key == "extra_budget_min") ov.extra_budget_min = v;
    else throw evplan::SchemaError("config: unknown override \"" + key + "\"");
  }
  return ov;
}

std::vector<evplan::GenConfig> parse_scenarios(const nlohmann::json& doc) {
  if (!doc.contains("scenarios") || !doc.at("scenarios").is_array())
    throw evplan::SchemaError("config: \"scenarios\" array required");
  std::vector<evplan::GenConfig> configs;
  for (const auto& js : doc.at("scenarios")) {
    evplan::GenConfig base;
    if (!js.contains("n")) throw evplan::SchemaError("scenario: \"n\" required");
    base.n = js.at("n").get<int>();
    if (js.contains("fracs")) base.fracs = js.at("fracs").get<std::vector<double>>();
    if (js.contains("tau_range")) {
      const auto r = js.at("tau_range").get<std::vector<double>>();
      if (r.size() != 2) throw evplan::SchemaError("scenario: tau_range needs 2 values");
      base.tau_range = {r[0], r[1]};
    }
    if (js.contains("detour_range")) {
      const auto r = js.at("detour_range").get<std::vector<double>>();
      if (r.size() != 2)
        throw evplan::SchemaError("scenario: detour_range needs 2 values");
      base.detour_range = {r[0], r[1]};
    }
    if (js.contains("overrides")) base.overrides = parse_overrides(js.at("overrides"));

    std::vector<std::uint64_t> seeds{0};
    if (js.contains("seeds")) seeds = js.at("seeds").get<std::vector<std::uint64_t>>();
    for (std::uint64_t seed : seeds) {
      evplan::GenConfig cfg = base;
      cfg.seed = seed;
      configs.push_back(cfg);
    }
  }
  return configs;
}

evplan::BenchOptions parse_bench_options(const nlohmann::json& doc) {
  evplan::BenchOptions opts;
  if (doc.contains("run_exact")) opts.run_exact = doc.at("run_exact").get<bool>();
  if (doc.contains("exact_cap")) opts.exact_cap = doc.at("exact_cap").get<int>();
  return opts;
}

void print_aggregates(const std::vector<evplan::BenchRow>& rows) {
  for (const evplan::BenchAggregate& agg : evplan::aggregate_benchmark(rows)) {
    std::cout << "n=" << agg.n << " rows=" << agg.rows
              << " feasible=" << agg.feasible_rows;
    auto field = [](const char* name, const std::optional<double>& v) {
      if (v) std::cout << " " << name << "=" << evplan::format_double(*v);
    };
    field("mean_gap_pct", agg.mean_gap_pct);
    field("median_gap_pct", agg.median_gap_pct);
    field("mean_ub_gap_pct", agg.mean_ub_gap_pct);
    field("mean_t_exact_s", agg.mean_t_exact_s);
    field("mean_t_rollout_s", agg.mean_t_rollout_s);
    std::cout << "\n";
  }
}

int run_bench(const std::string& config_path, const std::string& csv_path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(config_path));
  } catch (const nlohmann::json::parse_error& e) {
    throw evplan::SchemaError(std::string("config: not valid JSON: ") + e.what());
  }
  const std::vector<evplan::GenConfig> configs = parse_scenarios(doc);
  const evplan::BenchOptions opts = parse_bench_options(doc);
  const std::vector<evplan::BenchRow> rows =
      evplan::run_benchmark(evplan::expand_cases(configs), opts);
  evplan::write_file(csv_path, evplan::rows_to_csv(rows));
  print_aggregates(rows);
  return kExitSolved;
}

int run_sweep(const std::string& config_path, const std::string& csv_path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(config_path));
  } catch (const nlohmann::json::parse_error& e) {
    throw evplan::SchemaError(std::string("config: not valid JSON: ") + e.what());
  }
  const std::vector<evplan::GenConfig> configs = parse_scenarios(doc);
  const evplan::BenchOptions opts = parse_bench_options(doc);
  if (!doc.contains("grids") || !doc.at("grids").is_object())
    throw evplan::SchemaError("config: \"grids\" object required");
  std::vector<evplan::SweepGrid> grids;
  for (const auto& item : doc.at("grids").items())
    grids.push_back({item.key(), item.value().get<std::vector<double>>()});
  const std::vector<evplan::SweepRow> rows =
      evplan::sensitivity_sweep(configs, grids, opts);
  evplan::write_file(csv_path, evplan::sweep_to_csv(rows));
  for (const evplan::SweepRow& r : rows) {
    std::cout << r.param << "=" << evplan::format_double(r.value) << " n=" << r.n;
    if (r.aog_rs) std::cout << " aog_rs=" << evplan::format_double(*r.aog_rs);
    if (r.aog_ub) std::cout << " aog_ub=" << evplan::format_double(*r.aog_ub);
    std::cout << "\n";
  }
  return kExitSolved;
}

int run_gen(std::uint64_t seed, int stations, double frac, const std::string& out_path) {
  evplan::GenConfig cfg;
  cfg.seed = seed;
  cfg.n = stations;
  const evplan::RouteInstance inst = evplan::generate_instance(cfg, frac);
  const std::string text = evplan::serialize_instance(inst).dump(2) + "\n";
  if (out_path.empty()) std::cout << text;
  else evplan::write_file(out_path, text);
  return kExitSolved;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Charging and rest planning for electric trucks on a fixed route"};
  app.require_subcommand(1);

  // solve
  std::string instance_path, method, out_path;
  std::string bases_arg = "greedy,relaxed";
  std::string order = "forward";
  int budget = -1;
  int repeat = 0;
  int cap = evplan::kDefaultExactCap;
  CLI::App* solve = app.add_subcommand("solve", "Solve one instance");
  solve->add_option("--instance", instance_path, "Instance JSON file")->required();
  solve->add_option("--method", method, "exact | rollout | greedy | relaxed")->required();
  solve->add_option("--base", bases_arg,
                    "Rollout bases, comma-separated: greedy | relaxed | fullcharge");
  solve->add_option("--order", order, "Station visiting order: forward | reverse");
  solve->add_option("--budget", budget, "Number of stations the rollout may revise");
  solve->add_option("--repeat", repeat, "Repeated-rollout iteration cap (0 = off)");
  solve->add_option("--cap", cap, "Exact enumeration cap on N");
  solve->add_option("--out", out_path, "Write the report here instead of stdout");

  // gen
  std::uint64_t seed = 0;
  int stations = 5;
  double frac = 1.0;
  std::string gen_out;
  CLI::App* gen = app.add_subcommand("gen", "Generate a seeded instance");
  gen->add_option("--seed", seed, "RNG seed")->required();
  gen->add_option("--stations", stations, "Number of stations")->required();
  gen->add_option("--frac", frac, "Initial battery as a fraction of full");
  gen->add_option("--out", gen_out, "Output instance file");

  // bench / sweep
  std::string bench_config, bench_csv, sweep_config, sweep_csv;
  CLI::App* bench = app.add_subcommand("bench", "Run the benchmark suite");
  bench->add_option("--config", bench_config, "Benchmark config JSON")->required();
  bench->add_option("--csv", bench_csv, "Output CSV path")->required();
  CLI::App* sweep = app.add_subcommand("sweep", "Run the sensitivity sweep");
  sweep->add_option("--config", sweep_config, "Sweep config JSON")->required();
  sweep->add_option("--csv", sweep_csv, "Output CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help() << std::flush;
    return kExitUsage;
  }

  try {
    if (solve->parsed())
      return run_solve(instance_path, method, bases_arg, order, budget, repeat, cap,
                       out_path);
    if (gen->parsed()) return run_gen(seed, stations, frac, gen_out);
    if (bench->parsed()) return run_bench(bench_config, bench_csv);
    if (sweep->parsed()) return run_sweep(sweep_config, sweep_csv);
  } catch (const evplan::SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const evplan::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInfeasible;
  }
  return kExitUsage;
}
