#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "evplan/harness.hpp"
#include "evplan/model.hpp"
#include "helpers.hpp"

using Catch::Matchers::WithinAbs;
using evplan::BenchCase;
using evplan::BenchOptions;
using evplan::BenchRow;
using evplan::GenConfig;
using evplan::generate_instance;
using evplan::RouteInstance;

TEST_CASE("generation is deterministic and seed-sensitive", "[harness]") {
  GenConfig cfg;
  cfg.seed = 7;
  cfg.n = 5;

  const RouteInstance a = generate_instance(cfg, 0.5);
  const RouteInstance b = generate_instance(cfg, 0.5);
  CHECK(evplan::serialize_instance(a) == evplan::serialize_instance(b));

  cfg.seed = 8;
  const RouteInstance c = generate_instance(cfg, 0.5);
  CHECK(a.segment_times_min != c.segment_times_min);
}

TEST_CASE("generated instances respect the requested shape", "[harness]") {
  GenConfig cfg;
  cfg.seed = 3;
  cfg.n = 6;
  cfg.tau_range = {40.0, 50.0};
  cfg.detour_range = {1.0, 2.0};
  const RouteInstance inst = generate_instance(cfg, 0.35);

  REQUIRE(inst.num_stations() == 6);
  REQUIRE(inst.segment_times_min.size() == 7);
  for (double tau : inst.segment_times_min) {
    CHECK(tau >= 40.0);
    CHECK(tau <= 50.0);
  }
  for (const auto& st : inst.stations) {
    CHECK(st.detour_min >= 1.0);
    CHECK(st.detour_min <= 2.0);
  }
  CHECK_THAT(inst.battery.initial_kwh, WithinAbs(0.35 * 624.0, 1e-9));
  CHECK(evplan::validate_instance(inst).empty());
}

TEST_CASE("parameter overrides land in the instance", "[harness]") {
  GenConfig cfg;
  cfg.seed = 1;
  cfg.n = 4;
  cfg.overrides.extra_budget_min = 220.0;
  cfg.overrides.safety_kwh = 100.0;
  cfg.overrides.prep_min = 9.0;
  const RouteInstance inst = generate_instance(cfg, 0.5);

  CHECK(inst.hos.extra_budget_min == 220.0);
  CHECK(inst.battery.safety_kwh == 100.0);
  for (const auto& st : inst.stations) CHECK(st.prep_min == 9.0);
}

TEST_CASE("an empty fraction list expands to the standard grid", "[harness]") {
  GenConfig cfg;
  cfg.seed = 5;
  cfg.n = 3;
  const auto cases = evplan::expand_cases({cfg});
  // 20% through 100% in 5% steps.
  REQUIRE(cases.size() == 17);
  CHECK_THAT(cases.front().frac, WithinAbs(0.20, 1e-12));
  CHECK_THAT(cases.back().frac, WithinAbs(1.00, 1e-12));

  SECTION("explicit fractions are taken verbatim") {
    cfg.fracs = {0.4, 0.9};
    const auto chosen = evplan::expand_cases({cfg});
    REQUIRE(chosen.size() == 2);
    CHECK(chosen[0].frac == 0.4);
    CHECK(chosen[1].frac == 0.9);
  }
}

TEST_CASE("the oracle route benches with a zero gap", "[harness]") {
  BenchCase bc;
  bc.n = 2;
  bc.seed = 0;
  bc.frac = 450.0 / 624.0;
  bc.inst = testutil::tiny2();

  const BenchRow row = evplan::run_case(bc, BenchOptions{});
  REQUIRE(row.feasible);
  REQUIRE(row.cost_exact.has_value());
  REQUIRE(row.cost_rollout.has_value());
  REQUIRE(row.lb.has_value());
  REQUIRE(row.ub.has_value());
  CHECK_THAT(*row.cost_exact, WithinAbs(142.756, 1e-6));
  CHECK_THAT(*row.gap_pct, WithinAbs(0.0, 1e-9));
  CHECK(*row.lb <= *row.cost_exact + 1e-6);
  CHECK(*row.cost_exact <= *row.cost_rollout + 1e-6);
  CHECK(*row.cost_rollout <= *row.ub + 1e-6);
}

TEST_CASE("rows above the enumeration cap skip the exact column", "[harness]") {
  BenchCase bc;
  bc.n = 2;
  bc.seed = 0;
  bc.frac = 450.0 / 624.0;
  bc.inst = testutil::tiny2();

  BenchOptions opts;
  opts.exact_cap = 1;
  const BenchRow row = evplan::run_case(bc, opts);
  CHECK_FALSE(row.cost_exact.has_value());
  CHECK_FALSE(row.gap_pct.has_value());
  CHECK(row.cost_rollout.has_value());
}

TEST_CASE("benchmark rows arrive sorted and reproducible", "[harness]") {
  GenConfig cfg;
  cfg.seed = 0;
  cfg.n = 3;
  cfg.fracs = {0.7, 0.4};
  GenConfig cfg2 = cfg;
  cfg2.seed = 1;

  const auto cases = evplan::expand_cases({cfg2, cfg});
  const auto rows = evplan::run_benchmark(cases, BenchOptions{});
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].seed == 0);
  CHECK(rows[0].frac == 0.4);
  CHECK(rows[1].frac == 0.7);
  CHECK(rows[2].seed == 1);

  // Re-running reproduces everything except the measured wall times.
  const auto again = evplan::run_benchmark(cases, BenchOptions{});
  REQUIRE(again.size() == rows.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    CHECK(again[i].n == rows[i].n);
    CHECK(again[i].seed == rows[i].seed);
    CHECK(again[i].frac == rows[i].frac);
    CHECK(again[i].cost_exact == rows[i].cost_exact);
    CHECK(again[i].cost_rollout == rows[i].cost_rollout);
    CHECK(again[i].lb == rows[i].lb);
    CHECK(again[i].ub == rows[i].ub);
    CHECK(again[i].gap_pct == rows[i].gap_pct);
    CHECK(again[i].lp_exact == rows[i].lp_exact);
    CHECK(again[i].lp_rollout == rows[i].lp_rollout);
    CHECK(again[i].feasible == rows[i].feasible);
  }
}

TEST_CASE("CSV round-trips every numeric field bit-exactly", "[harness]") {
  GenConfig cfg;
  cfg.seed = 2;
  cfg.n = 3;
  cfg.fracs = {1.0 / 3.0, 0.85};
  const auto rows = evplan::run_benchmark(evplan::expand_cases({cfg}), BenchOptions{});

  const std::string csv = evplan::rows_to_csv(rows);
  const auto parsed = evplan::parse_bench_csv(csv);
  REQUIRE(parsed.size() == rows.size());
  CHECK(evplan::rows_to_csv(parsed) == csv);

  SECTION("the header is pinned") {
    CHECK(csv.rfind("n,seed,frac,cost_exact,cost_rollout,lb,ub,gap_pct,"
                    "lp_exact,lp_rollout,t_exact_s,t_rollout_s,feasible\n",
                    0) == 0);
  }
  SECTION("a mangled header is rejected") {
    CHECK_THROWS_AS(evplan::parse_bench_csv("a,b,c\n1,2,3\n"), evplan::SchemaError);
  }
}

TEST_CASE("shortest-round-trip formatting survives parsing", "[harness]") {
  for (double v : {0.1, 1.0 / 3.0, 142.756, 61.980000000000004, 1e-9}) {
    const std::string s = evplan::format_double(v);
    CHECK(std::stod(s) == v);
  }
}

TEST_CASE("aggregates average the per-row gaps of feasible rows", "[harness]") {
  GenConfig cfg;
  cfg.seed = 9;
  cfg.n = 4;
  cfg.fracs = {0.4, 0.6, 0.8};
  cfg.overrides.extra_budget_min = 220.0;
  const auto rows = evplan::run_benchmark(evplan::expand_cases({cfg}), BenchOptions{});
  const auto aggs = evplan::aggregate_benchmark(rows);
  REQUIRE(aggs.size() == 1);
  CHECK(aggs[0].n == 4);
  CHECK(aggs[0].rows == 3);

  double sum = 0.0;
  int cnt = 0;
  for (const auto& row : rows) {
    if (!row.feasible || !row.gap_pct) continue;
    sum += *row.gap_pct;
    ++cnt;
  }
  if (cnt > 0) {
    REQUIRE(aggs[0].mean_gap_pct.has_value());
    CHECK_THAT(*aggs[0].mean_gap_pct, WithinAbs(sum / cnt, 1e-12));
  } else {
    CHECK_FALSE(aggs[0].mean_gap_pct.has_value());
  }
}

TEST_CASE("sensitivity sweep reruns the bench per grid value", "[harness]") {
  GenConfig cfg;
  cfg.seed = 6;
  cfg.n = 3;
  cfg.fracs = {0.5, 0.8};
  cfg.overrides.extra_budget_min = 220.0;

  SECTION("three safety margins give three result groups") {
    evplan::SweepGrid grid;
    grid.param = "safety_kwh";
    grid.values = {100.0, 156.0, 200.0};
    const auto rows = evplan::sensitivity_sweep({cfg}, {grid}, BenchOptions{});
    REQUIRE(rows.size() == 3);
    for (size_t i = 0; i < rows.size(); ++i) {
      CHECK(rows[i].param == "safety_kwh");
      CHECK(rows[i].value == grid.values[i]);
      CHECK(rows[i].n == 3);
    }
  }
  SECTION("a single default-valued grid point reproduces the plain bench") {
    evplan::SweepGrid grid;
    grid.param = "prep_min";
    grid.values = {6.0};
    const auto sweep_rows = evplan::sensitivity_sweep({cfg}, {grid}, BenchOptions{});
    REQUIRE(sweep_rows.size() == 1);

    const auto bench_rows =
        evplan::run_benchmark(evplan::expand_cases({cfg}), BenchOptions{});
    const auto aggs = evplan::aggregate_benchmark(bench_rows);
    REQUIRE(aggs.size() == 1);
    if (aggs[0].mean_gap_pct) {
      REQUIRE(sweep_rows[0].aog_rs.has_value());
      CHECK(*sweep_rows[0].aog_rs == *aggs[0].mean_gap_pct);
    }
  }
  SECTION("zero time-loss pricing still produces solvable rows") {
    evplan::SweepGrid grid;
    grid.param = "time_loss_eur_per_min";
    grid.values = {0.0};
    const auto rows = evplan::sensitivity_sweep({cfg}, {grid}, BenchOptions{});
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].aog_rs.has_value());
  }
  SECTION("sweep CSV carries the pinned header") {
    const std::string csv = evplan::sweep_to_csv({});
    CHECK(csv == "param,value,n,aog_rs,aog_ub\n");
  }
}
