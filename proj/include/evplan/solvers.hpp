// Plan search over stop patterns. The exact solver enumerates all 4^N
// patterns with one LP each. The rollout solver walks the stations once,
// trying the four choices at the visited station with every other station
// held at its current value, and keeps the cheapest feasible candidate; when
// the starting pattern is feasible the result can never cost more than it.
#pragma once

#include <array>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "dynamics.hpp"
#include "linearize.hpp"
#include "model.hpp"
#include "subproblem.hpp"

namespace evplan {

// Ranking used for per-station candidates and for tie-breaking everywhere:
// skip < rest < charge < charge-and-rest.
inline constexpr std::array<StopChoice, 4> kCandidateOrder{
    StopChoice{false, false}, StopChoice{false, true}, StopChoice{true, false},
    StopChoice{true, true}};

struct RolloutConfig {
  std::vector<int> stage_order;      // empty = stations in route order
  std::optional<int> stage_budget;   // empty = visit every station
  int max_repeat_iters = 10;         // cap for repeated_rollout
};

inline constexpr int kDefaultExactCap = 12;

namespace detail {

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

inline std::vector<int> resolve_stage_order(const RolloutConfig& cfg, int n) {
  std::vector<int> order = cfg.stage_order;
  if (order.empty()) {
    order.resize(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    return order;
  }
  std::vector<bool> seen(static_cast<size_t>(n), false);
  if (static_cast<int>(order.size()) != n)
    throw std::invalid_argument("stage_order must be a permutation of the stations");
  for (int k : order) {
    if (k < 0 || k >= n || seen[static_cast<size_t>(k)])
      throw std::invalid_argument("stage_order must be a permutation of the stations");
    seen[static_cast<size_t>(k)] = true;
  }
  return order;
}

}  // namespace detail

// Forward pass that stops, rests, and tops the battery up whenever driving
// on would break the next reserve margin. Never fails; the pattern it emits
// may still be infeasible on other rules (fine for a rollout base).
inline BinaryPlan greedy_base(const RouteInstance& inst) {
  const int n = inst.num_stations();
  const double pbar = inst.battery.consumption_kwh_per_min;
  const double es = inst.battery.safety_kwh;

  BinaryPlan plan(static_cast<size_t>(n), StopChoice{false, false});
  double e = inst.initial_ramp_energy();
  for (int k = 0; k < n; ++k) {
    const double if_skipped = e - pbar * inst.tau(k + 1);
    const double need = es + (k + 1 < n ? pbar * inst.detour(k + 1) : 0.0);
    if (if_skipped + kFeasTol < need) {
      plan[static_cast<size_t>(k)] = StopChoice{true, true};
      const double at_station = e - pbar * inst.detour(k);
      const double topped = std::max(at_station, inst.battery.full_kwh);
      e = topped - pbar * (inst.detour(k) + inst.tau(k + 1));
    } else {
      e = if_skipped;
    }
  }
  return plan;
}

// Exhaustive enumeration: one LP per stop pattern, skipping patterns whose
// t-free checks already fail. Ties go to the pattern that comes first in
// kCandidateOrder read station by station.
inline SolveReport exact_solve(const RouteInstance& inst, int cap = kDefaultExactCap) {
  const int n = inst.num_stations();
  if (n > cap)
    throw std::invalid_argument("station count exceeds the exact enumeration cap");
  detail::Stopwatch watch;

  SolveReport report;
  report.method = "exact";
  double best_cost = std::numeric_limits<double>::infinity();
  BinaryPlan plan(static_cast<size_t>(n));

  const unsigned long long total = 1ULL << (2 * n);
  for (unsigned long long idx = 0; idx < total; ++idx) {
    for (int k = 0; k < n; ++k) {
      const unsigned digit = static_cast<unsigned>(idx >> (2 * (n - 1 - k))) & 3u;
      plan[static_cast<size_t>(k)] = kCandidateOrder[digit];
    }
    const SubproblemModel model = build_subproblem(inst, plan);
    if (model.trivially_infeasible) {
      ++report.leaves_pruned;
      continue;
    }
    const LpSolution sol = solve_lp(model.lp);
    ++report.lp_calls;
    if (sol.status == LpStatus::kUnbounded || sol.status == LpStatus::kIterationLimit)
      throw SolverError("charge-time LP did not converge");
    if (sol.status != LpStatus::kOptimal) continue;

    const double cost = sol.objective + model.cost_constant;
    if (cost < best_cost) {
      best_cost = cost;
      report.feasible = true;
      report.binary_plan = plan;
      report.continuous_plan.assign(static_cast<size_t>(n), 0.0);
      for (int k = 0; k < n; ++k) {
        const int t = model.t_var[static_cast<size_t>(k)];
        if (t >= 0)
          report.continuous_plan[static_cast<size_t>(k)] = sol.x[static_cast<size_t>(t)];
      }
      report.cost = cost;
    }
  }

  report.wall_time_s = watch.seconds();
  return report;
}

// One rollout pass from a base pattern. Every candidate evaluation counts as
// an LP call, so a full pass costs 4*N + 1 of them (plus nothing else).
inline SolveReport rollout(const RouteInstance& inst, const BinaryPlan& base,
                           const RolloutConfig& cfg = {}) {
  const int n = inst.num_stations();
  if (static_cast<int>(base.size()) != n)
    throw std::invalid_argument("base plan length must equal the station count");
  const std::vector<int> order = detail::resolve_stage_order(cfg, n);
  const int budget = cfg.stage_budget.value_or(n);
  if (budget < 0 || budget > n)
    throw std::invalid_argument("stage_budget must lie in [0, N]");
  detail::Stopwatch watch;

  SolveReport report;
  report.method = "rollout";

  BinaryPlan current = base;
  bool base_known = false;
  bool base_feasible = false;
  double base_cost = 0.0;

  for (int idx = 0; idx < budget; ++idx) {
    const int k = order[static_cast<size_t>(idx)];
    int best = 0;
    bool best_feasible = false;
    double best_cost = std::numeric_limits<double>::infinity();
    double best_score = std::numeric_limits<double>::infinity();

    for (int ci = 0; ci < 4; ++ci) {
      BinaryPlan candidate = current;
      candidate[static_cast<size_t>(k)] = kCandidateOrder[static_cast<size_t>(ci)];
      const SubproblemResult res = solve_subproblem(inst, candidate);
      ++report.lp_calls;

      if (idx == 0 && kCandidateOrder[static_cast<size_t>(ci)] == base[static_cast<size_t>(k)]) {
        base_known = true;
        base_feasible = res.optimal;
        if (res.optimal) base_cost = *res.cost;
      }
      if (res.optimal) {
        if (!best_feasible || *res.cost < best_cost) {
          best = ci;
          best_feasible = true;
          best_cost = *res.cost;
        }
      } else if (!best_feasible && *res.violation_score < best_score) {
        best = ci;
        best_score = *res.violation_score;
      }
    }
    current[static_cast<size_t>(k)] = kCandidateOrder[static_cast<size_t>(best)];
  }

  const SubproblemResult final_res = solve_subproblem(inst, current);
  ++report.lp_calls;
  if (!base_known) {  // zero budget: the final solve is the base solve
    base_feasible = final_res.optimal;
    if (final_res.optimal) base_cost = *final_res.cost;
  }

  report.feasible = final_res.optimal;
  report.binary_plan = current;
  report.continuous_plan = final_res.t;
  report.cost = final_res.cost;
  report.violation_score = final_res.violation_score;
  if (base_feasible) report.upper_bound = base_cost;
  report.wall_time_s = watch.seconds();
  return report;
}

// Rollout from several bases; keeps the cheapest feasible outcome (earliest
// base wins ties) and reports the best feasible base cost as the upper
// bound. With no feasible outcome, the least-violating one is returned.
inline SolveReport multi_base_rollout(const RouteInstance& inst,
                                      const std::vector<BinaryPlan>& bases,
                                      const RolloutConfig& cfg = {}) {
  if (bases.empty()) throw std::invalid_argument("multi_base_rollout needs a base plan");
  detail::Stopwatch watch;

  std::optional<SolveReport> best;
  std::optional<double> upper;
  long total_calls = 0;
  for (const BinaryPlan& base : bases) {
    SolveReport r = rollout(inst, base, cfg);
    total_calls += r.lp_calls;
    if (r.upper_bound && (!upper || *r.upper_bound < *upper)) upper = r.upper_bound;
    const bool better =
        !best ||
        (r.feasible && (!best->feasible || *r.cost < *best->cost)) ||
        (!r.feasible && !best->feasible &&
         *r.violation_score < *best->violation_score);
    if (better) best = std::move(r);
  }

  best->upper_bound = upper;
  best->lp_calls = total_calls;
  best->wall_time_s = watch.seconds();
  return *best;
}

// Re-runs rollout on its own output until the stop pattern stops changing
// (or the iteration cap is hit). While the iterate stays feasible the cost
// trace is non-increasing.
inline SolveReport repeated_rollout(const RouteInstance& inst, const BinaryPlan& base,
                                    const RolloutConfig& cfg = {}) {
  if (cfg.max_repeat_iters < 1)
    throw std::invalid_argument("max_repeat_iters must be at least 1");
  detail::Stopwatch watch;

  BinaryPlan current = base;
  SolveReport last;
  std::vector<double> trace;
  std::optional<double> first_upper;
  long total_calls = 0;

  for (int it = 0; it < cfg.max_repeat_iters; ++it) {
    SolveReport r = rollout(inst, current, cfg);
    total_calls += r.lp_calls;
    if (it == 0) first_upper = r.upper_bound;
    trace.push_back(r.feasible ? *r.cost : std::numeric_limits<double>::quiet_NaN());
    const bool fixed_point = r.binary_plan == current;
    current = r.binary_plan;
    last = std::move(r);
    if (fixed_point) break;
  }

  last.method = "repeated_rollout";
  last.lp_calls = total_calls;
  last.iteration_costs = std::move(trace);
  last.upper_bound = first_upper;
  last.wall_time_s = watch.seconds();
  return last;
}

}  // namespace evplan
