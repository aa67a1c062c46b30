#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <utility>
#include <vector>

#include "evplan/harness.hpp"
#include "evplan/linearize.hpp"
#include "evplan/lp.hpp"
#include "evplan/model.hpp"
#include "evplan/solvers.hpp"
#include "evplan/subproblem.hpp"
#include "helpers.hpp"

using Catch::Matchers::WithinAbs;
using evplan::BinaryPlan;
using evplan::fix_binaries;
using evplan::linearize;
using evplan::LpStatus;
using evplan::relax_solve;
using evplan::RelaxationSolution;
using evplan::solve_lp;
using evplan::solve_subproblem;
using testutil::make_plan;
using testutil::tiny2;

namespace {

// Every pattern of n stop choices, in enumeration order.
std::vector<BinaryPlan> all_patterns(int n) {
  std::vector<BinaryPlan> out;
  const int total = 1 << (2 * n);
  for (int mask = 0; mask < total; ++mask) {
    BinaryPlan plan;
    for (int k = n - 1; k >= 0; --k) {
      const int bits = (mask >> (2 * k)) & 3;
      plan.push_back(evplan::StopChoice{(bits & 2) != 0, (bits & 1) != 0});
    }
    out.push_back(plan);
  }
  return out;
}

}  // namespace

TEST_CASE("fixing the tiny2 optimum pattern reproduces its cost", "[linearize]") {
  const auto model = linearize(tiny2());
  const auto lp = fix_binaries(model, make_plan({{1, 1}, {0, 0}}));
  const auto sol = solve_lp(lp);

  REQUIRE(sol.status == LpStatus::kOptimal);
  CHECK_THAT(sol.objective, WithinAbs(142.756, 1e-6));
}

TEST_CASE("fixed-pattern LPs agree with the direct subproblem on tiny2", "[linearize]") {
  const auto model = linearize(tiny2());

  for (const BinaryPlan& plan : all_patterns(2)) {
    const auto direct = solve_subproblem(tiny2(), plan);
    const auto sol = solve_lp(fix_binaries(model, plan));

    INFO("pattern (" << plan[0].charge << plan[0].rest << ")("
                     << plan[1].charge << plan[1].rest << ")");
    if (direct.optimal) {
      REQUIRE(sol.status == LpStatus::kOptimal);
      CHECK_THAT(sol.objective, WithinAbs(*direct.cost, 1e-6));
    } else {
      CHECK(sol.status == LpStatus::kInfeasible);
    }
  }
}

TEST_CASE("the relaxation bounds the enumerated optimum from below", "[linearize]") {
  const RelaxationSolution relax = relax_solve(tiny2());

  REQUIRE(relax.feasible);
  CHECK(relax.bound >= 0.0);
  CHECK(relax.bound <= 142.756 + 1e-9);

  SECTION("and the value is reproducible") {
    const RelaxationSolution again = relax_solve(tiny2());
    CHECK(again.bound == relax.bound);
  }
}

TEST_CASE("rounding keeps every nonzero stop decision", "[linearize]") {
  SECTION("fractional values round up, solver noise rounds away") {
    const std::vector<std::pair<double, double>> raw{{0.3, 0.0}, {0.0, 1e-7}};
    const BinaryPlan plan = evplan::round_binaries(raw);
    CHECK(plan[0] == evplan::StopChoice{true, false});
    CHECK(plan[1] == evplan::StopChoice{false, false});
  }
  SECTION("the tiny2 relaxation keeps station 0 in the plan") {
    // Some charging before ramp 1 is unavoidable, so the relaxed solution
    // cannot zero station 0 entirely.
    const RelaxationSolution relax = relax_solve(tiny2());
    CHECK(relax.raw[0].first > 1e-6);
    CHECK(relax.rounded[0].visits());
  }
}

TEST_CASE("a route needing no stops relaxes to cost zero", "[linearize]") {
  const evplan::RouteInstance inst = testutil::easy1();

  const auto bound = evplan::relaxation_bound(inst);
  REQUIRE(bound.has_value());
  CHECK_THAT(*bound, WithinAbs(0.0, 1e-9));
  CHECK(evplan::relaxed_base(inst) == make_plan({{0, 0}}));
}

TEST_CASE("an unreachable first ramp makes the relaxation infeasible", "[linearize]") {
  // Not enough battery to reach ramp 0 with the required reserve, and no
  // station can help before that point.
  evplan::RouteInstance inst = tiny2();
  inst.battery.initial_kwh = 300.0;

  CHECK_FALSE(evplan::relaxation_bound(inst).has_value());
  CHECK_FALSE(relax_solve(inst).feasible);
  CHECK_THROWS_AS(evplan::relaxed_base(inst), evplan::RelaxationInfeasible);
}

TEST_CASE("tight and loose energy big-M constants cut no integer point", "[linearize]") {
  // On small seeded routes, fixing any pattern must give the same verdict and
  // cost whether the charge-product bound is the tight battery size or the
  // loose dwell ceiling.
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    evplan::GenConfig cfg;
    cfg.seed = seed;
    cfg.n = 3;
    const evplan::RouteInstance inst = evplan::generate_instance(cfg, 0.6);

    const auto tight = linearize(inst);
    const auto loose = linearize(inst, inst.cost.delta_big_min);

    for (const BinaryPlan& plan : all_patterns(3)) {
      const auto sol_tight = solve_lp(fix_binaries(tight, plan));
      const auto sol_loose = solve_lp(fix_binaries(loose, plan));

      INFO("seed " << seed);
      REQUIRE((sol_tight.status == LpStatus::kOptimal) ==
              (sol_loose.status == LpStatus::kOptimal));
      if (sol_tight.status == LpStatus::kOptimal)
        CHECK_THAT(sol_tight.objective, WithinAbs(sol_loose.objective, 1e-6));
    }
  }
}

TEST_CASE("relaxation bound sits under the exact optimum on seeded routes", "[linearize]") {
  int compared = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    for (double frac : {0.5, 0.7, 0.9}) {
      evplan::GenConfig cfg;
      cfg.seed = seed;
      cfg.n = 4;
      cfg.overrides.extra_budget_min = 220.0;
      const evplan::RouteInstance inst = evplan::generate_instance(cfg, frac);

      const auto report = evplan::exact_solve(inst);
      if (!report.feasible) continue;
      const auto bound = evplan::relaxation_bound(inst);
      REQUIRE(bound.has_value());
      CHECK(*bound <= *report.cost + 1e-6);
      ++compared;
    }
  }
  // The suite only means something if some routes were actually solvable.
  CHECK(compared >= 8);
}
