#include <catch2/catch_amalgamated.hpp>

#include <string>
#include <vector>

#include "evplan/model.hpp"
#include "helpers.hpp"

using Catch::Matchers::ContainsSubstring;
using evplan::parse_instance;
using evplan::RouteInstance;
using evplan::SchemaError;
using evplan::serialize_instance;
using evplan::ValidationError;
using evplan::validate_instance;

namespace {

// A minimal document relying on every default value.
const char* kBareDoc = R"({
  "segment_times_min": [100, 120, 100],
  "stations": [ {"detour_min": 5}, {"detour_min": 5} ],
  "battery": { "initial_kwh": 450 }
})";

}  // namespace

TEST_CASE("tiny2 parses with the expected shape", "[model]") {
  const RouteInstance& inst = testutil::tiny2();

  REQUIRE(inst.num_stations() == 2);
  CHECK(inst.segment_times_min == std::vector<double>{100.0, 120.0, 100.0});
  CHECK(inst.stations[0].detour_min == 5.0);
  CHECK(inst.stations[0].charge_kw == 300.0);
  CHECK(inst.stations[0].prep_min == 6.0);
  CHECK(inst.battery.full_kwh == 624.0);
  CHECK(inst.battery.safety_kwh == 156.0);
  CHECK(inst.battery.initial_kwh == 450.0);
  CHECK(inst.battery.consumption_kwh_per_min == 1.83);
  CHECK(inst.battery.max_accept_kw == 375.0);
  CHECK(inst.hos.max_consec_min == 270.0);
  CHECK(inst.hos.min_rest_min == 45.0);
  CHECK(inst.hos.max_daily_min == 540.0);
  CHECK(inst.hos.extra_budget_min == 150.0);
  CHECK(inst.cost.energy_price_eur_per_kwh == 0.36);
  CHECK(inst.cost.time_loss_eur_per_min == 0.4);
  CHECK(validate_instance(inst).empty());
}

TEST_CASE("omitted fields take catalog defaults", "[model]") {
  const RouteInstance inst = parse_instance(std::string(kBareDoc));

  CHECK(inst.stations[0].charge_kw == 300.0);
  CHECK(inst.stations[0].prep_min == 6.0);
  CHECK(inst.battery.full_kwh == 624.0);
  CHECK(inst.battery.max_accept_kw == 375.0);
  CHECK(inst.battery.consumption_kwh_per_min == 1.83);
  // Safety margin defaults to a quarter of the full battery.
  CHECK(inst.battery.safety_kwh == 0.25 * 624.0);
  CHECK(inst.hos.max_consec_min == 270.0);
  CHECK(inst.hos.min_rest_min == 45.0);
  CHECK(inst.hos.max_daily_min == 540.0);
  CHECK(inst.hos.extra_budget_min == 150.0);
  CHECK(inst.cost.energy_price_eur_per_kwh == 0.36);
  CHECK(inst.cost.time_loss_eur_per_min == 0.4);
  CHECK(inst.cost.delta_small_min == 0.1);
  CHECK(inst.cost.delta_big_min == 10000.0);
}

TEST_CASE("derived charge quantities respect the acceptance cap", "[model]") {
  RouteInstance inst = testutil::tiny2();

  // 300 kW charger under a 375 kW cap: the charger is the bottleneck.
  CHECK(inst.effective_charge_kw(0) == 300.0);
  CHECK(inst.charge_rate_kwh_min(0) == 5.0);
  CHECK(inst.charge_price_eur_min(0) == Catch::Approx(1.8));

  // A hypothetical 500 kW charger is clipped by what the truck accepts.
  inst.stations[0].charge_kw = 500.0;
  CHECK(inst.effective_charge_kw(0) == 375.0);
  CHECK(inst.charge_rate_kwh_min(0) == 6.25);
}

TEST_CASE("parser rejects malformed documents", "[model]") {
  SECTION("not JSON at all") {
    CHECK_THROWS_AS(parse_instance(std::string("not json")), SchemaError);
  }
  SECTION("top level is not an object") {
    CHECK_THROWS_AS(parse_instance(std::string("[1,2,3]")), SchemaError);
  }
  SECTION("unknown top-level field") {
    CHECK_THROWS_MATCHES(parse_instance(std::string(R"({"nope": 1})")), SchemaError,
                         Catch::Matchers::MessageMatches(ContainsSubstring("nope")));
  }
  SECTION("unknown nested field") {
    std::string doc = R"({
      "segment_times_min": [10, 10],
      "stations": [ {"detour_min": 2, "speed": 5} ],
      "battery": { "initial_kwh": 600 }
    })";
    CHECK_THROWS_MATCHES(parse_instance(doc), SchemaError,
                         Catch::Matchers::MessageMatches(ContainsSubstring("speed")));
  }
  SECTION("missing required station field") {
    std::string doc = R"({
      "segment_times_min": [10, 10],
      "stations": [ {"charge_kw": 300} ],
      "battery": { "initial_kwh": 600 }
    })";
    CHECK_THROWS_AS(parse_instance(doc), SchemaError);
  }
  SECTION("non-numeric value") {
    std::string doc = R"({
      "segment_times_min": [10, "fast"],
      "stations": [ {"detour_min": 2} ],
      "battery": { "initial_kwh": 600 }
    })";
    CHECK_THROWS_AS(parse_instance(doc), SchemaError);
  }
}

TEST_CASE("parser rejects invalid instances with named reasons", "[model]") {
  SECTION("segment count must be one more than station count") {
    std::string doc = R"({
      "segment_times_min": [10, 10],
      "stations": [ {"detour_min": 2}, {"detour_min": 3} ],
      "battery": { "initial_kwh": 600 }
    })";
    CHECK_THROWS_MATCHES(
        parse_instance(doc), ValidationError,
        Catch::Matchers::MessageMatches(ContainsSubstring("segment count must be N+1")));
  }
  SECTION("safety margin above full capacity") {
    std::string doc = R"({
      "segment_times_min": [10, 10],
      "stations": [ {"detour_min": 2} ],
      "battery": { "initial_kwh": 600, "safety_kwh": 700 }
    })";
    CHECK_THROWS_MATCHES(
        parse_instance(doc), ValidationError,
        Catch::Matchers::MessageMatches(ContainsSubstring("safety_kwh")));
  }
}

TEST_CASE("validate_instance reports each broken rule", "[model]") {
  SECTION("valid instance yields nothing") {
    CHECK(validate_instance(testutil::tiny2()).empty());
  }
  SECTION("rest as long as the consecutive cap") {
    RouteInstance inst = testutil::tiny2();
    inst.hos.min_rest_min = inst.hos.max_consec_min;
    const auto errs = validate_instance(inst);
    REQUIRE(errs.size() == 1);
    CHECK_THAT(errs[0], ContainsSubstring("T_r < T_d"));
  }
  SECTION("negative detour") {
    RouteInstance inst = testutil::tiny2();
    inst.stations[0].detour_min = -1.0;
    const auto errs = validate_instance(inst);
    REQUIRE(errs.size() == 1);
    CHECK_THAT(errs[0], ContainsSubstring("d_k >= 0"));
    CHECK_THAT(errs[0], ContainsSubstring("stations[0]"));
  }
  SECTION("dwell ceiling below the daily window plus deadline slack") {
    RouteInstance inst = testutil::tiny2();
    inst.cost.delta_big_min = 500.0;
    const auto errs = validate_instance(inst);
    REQUIRE(errs.size() == 1);
    CHECK_THAT(errs[0], ContainsSubstring("delta_big"));
  }
  SECTION("several problems at once are all reported") {
    RouteInstance inst = testutil::tiny2();
    inst.stations[1].detour_min = -2.0;
    inst.battery.initial_kwh = 0.0;
    CHECK(validate_instance(inst).size() == 2);
  }
}

TEST_CASE("serialize then parse is the identity", "[model]") {
  const RouteInstance& inst = testutil::tiny2();
  const RouteInstance back = parse_instance(serialize_instance(inst).dump());

  // Field-exact: every double survives the round trip bit for bit.
  REQUIRE(back.segment_times_min == inst.segment_times_min);
  REQUIRE(back.num_stations() == inst.num_stations());
  for (int k = 0; k < inst.num_stations(); ++k) {
    CHECK(back.stations[k].detour_min == inst.stations[k].detour_min);
    CHECK(back.stations[k].charge_kw == inst.stations[k].charge_kw);
    CHECK(back.stations[k].prep_min == inst.stations[k].prep_min);
  }
  CHECK(back.battery.full_kwh == inst.battery.full_kwh);
  CHECK(back.battery.safety_kwh == inst.battery.safety_kwh);
  CHECK(back.battery.consumption_kwh_per_min == inst.battery.consumption_kwh_per_min);
  CHECK(back.battery.max_accept_kw == inst.battery.max_accept_kw);
  CHECK(back.battery.initial_kwh == inst.battery.initial_kwh);
  CHECK(back.hos.max_consec_min == inst.hos.max_consec_min);
  CHECK(back.hos.min_rest_min == inst.hos.min_rest_min);
  CHECK(back.hos.max_daily_min == inst.hos.max_daily_min);
  CHECK(back.hos.extra_budget_min == inst.hos.extra_budget_min);
  CHECK(back.cost.energy_price_eur_per_kwh == inst.cost.energy_price_eur_per_kwh);
  CHECK(back.cost.time_loss_eur_per_min == inst.cost.time_loss_eur_per_min);
  CHECK(back.cost.delta_small_min == inst.cost.delta_small_min);
  CHECK(back.cost.delta_big_min == inst.cost.delta_big_min);

  // An awkward non-representable decimal also survives.
  RouteInstance odd = inst;
  odd.segment_times_min[0] = 100.0 / 3.0;
  const RouteInstance odd_back = parse_instance(serialize_instance(odd).dump());
  CHECK(odd_back.segment_times_min[0] == odd.segment_times_min[0]);
}

TEST_CASE("solve reports serialize to JSON", "[model]") {
  evplan::SolveReport report;
  report.method = "exact";
  report.feasible = true;
  report.binary_plan = testutil::make_plan({{1, 1}, {0, 0}});
  report.continuous_plan = {61.98, 0.0};
  report.cost = 142.756;
  report.lp_calls = 6;
  report.leaves_pruned = 10;
  report.wall_time_s = 0.001;

  const nlohmann::json j = evplan::report_to_json(report);
  CHECK(j["method"] == "exact");
  CHECK(j["feasible"] == true);
  CHECK(j["binary_plan"] == nlohmann::json({{1, 1}, {0, 0}}));
  CHECK(j["cost"] == 142.756);
  CHECK(j["lp_calls"] == 6);
  CHECK(j["leaves_pruned"] == 10);
  // Absent optionals stay absent rather than appearing as null.
  CHECK_FALSE(j.contains("lower_bound"));
  CHECK_FALSE(j.contains("upper_bound"));
  CHECK_FALSE(j.contains("violation_score"));

  report.feasible = false;
  report.cost.reset();
  report.violation_score = 12.5;
  const nlohmann::json k = evplan::report_to_json(report);
  CHECK(k["violation_score"] == 12.5);
  CHECK_FALSE(k.contains("cost"));
}

TEST_CASE("stop choices compare and classify", "[model]") {
  const evplan::StopChoice none{false, false};
  const evplan::StopChoice charge{true, false};
  const evplan::StopChoice rest{false, true};
  const evplan::StopChoice both{true, true};

  CHECK_FALSE(none.visits());
  CHECK(charge.visits());
  CHECK(rest.visits());
  CHECK(both.visits());
  CHECK(both.charge_and_rest());
  CHECK_FALSE(charge.charge_and_rest());
  CHECK(charge == evplan::StopChoice{true, false});
  CHECK_FALSE(charge == rest);
}
