// With the stop pattern fixed, optimal charge times are a small LP: battery
// levels are affine in the charge minutes, the consecutive-driving clock is
// fully determined by the pattern, and per-stop overheads enter through
// epigraph variables that the deadline row and the objective share.
#pragma once

#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "dynamics.hpp"
#include "lp.hpp"
#include "model.hpp"

namespace evplan {

struct SubproblemModel {
  LpProblem lp;
  std::vector<int> t_var;  // per stage; -1 where the plan does not charge
  std::vector<int> z_var;  // per stage; -1 where no epigraph variable exists
  double cost_constant = 0.0;     // overhead cost of rest-only stops
  bool trivially_infeasible = false;  // pattern already breaks t-free rules
  double build_violation_min = 0.0;   // minutes of t-free violation (driving caps)
  int n = 0;
};

// Assembles the LP for a fixed stop pattern. Constraints that do not involve
// charge times (the consecutive and daily driving caps) are checked here;
// their residuals are kept for ranking infeasible patterns. Energy rows that
// end up with no charge variable ahead of them become constant rows and are
// caught the same way by the solver.
inline SubproblemModel build_subproblem(const RouteInstance& inst, const BinaryPlan& bin) {
  const int n = inst.num_stations();
  if (static_cast<int>(bin.size()) != n)
    throw std::invalid_argument("plan length must equal the station count");
  const double pbar = inst.battery.consumption_kwh_per_min;
  const double es = inst.battery.safety_kwh;
  const double ef = inst.battery.full_kwh;

  SubproblemModel model;
  model.n = n;
  model.t_var.assign(static_cast<size_t>(n), -1);
  model.z_var.assign(static_cast<size_t>(n), -1);

  // Variables: a charge time and an overhead epigraph variable per charging
  // stop. Rest-only overheads are constants.
  for (int k = 0; k < n; ++k) {
    const StopChoice u = bin[static_cast<size_t>(k)];
    if (u.charge) {
      model.t_var[static_cast<size_t>(k)] = model.lp.add_var(inst.charge_price_eur_min(k));
      model.z_var[static_cast<size_t>(k)] =
          model.lp.add_var(inst.cost.time_loss_eur_per_min);
    } else if (u.rest) {
      model.cost_constant += inst.cost.time_loss_eur_per_min *
                             (2.0 * inst.detour(k) + inst.hos.min_rest_min);
    }
  }

  // Battery at ramp k is (ramp-0 energy) - (consumption so far) + (sum of
  // earlier charges); the constant part accumulates in e_const.
  double e_const = inst.initial_ramp_energy();
  std::vector<std::pair<int, double>> charge_terms;  // rate * t for stages so far

  for (int k = 0; k <= n; ++k) {
    // Reserve margin at ramp k (at the destination for k = n).
    const double need = es + (k < n ? pbar * inst.detour(k) : 0.0);
    model.lp.add_row(charge_terms, RowSense::kGe, need - e_const, RowUnit::kEnergy);
    if (k == n) break;

    const StopChoice u = bin[static_cast<size_t>(k)];
    if (u.charge) {
      const int t = model.t_var[static_cast<size_t>(k)];
      const int z = model.z_var[static_cast<size_t>(k)];
      const double rate = inst.charge_rate_kwh_min(k);

      // Charge must fit under the ceiling: rate*t + e_k <= e_f + Pbar*d_k.
      std::vector<std::pair<int, double>> cap = charge_terms;
      cap.emplace_back(t, rate);
      model.lp.add_row(std::move(cap), RowSense::kLe,
                       ef + pbar * inst.detour(k) - e_const, RowUnit::kEnergy);

      // Stop-length rule: within a rest break the charge window is nearly
      // unbounded, otherwise it must fit under the rest threshold.
      const double window = (u.rest ? inst.cost.delta_big_min
                                    : inst.hos.min_rest_min - inst.cost.delta_small_min) -
                            inst.prep(k);
      model.lp.add_row({{t, 1.0}}, RowSense::kLe, window, RowUnit::kTime);

      // Overhead epigraph: z >= detours + prep + t, and z >= rest overhead
      // when the stop also rests.
      model.lp.add_row({{z, 1.0}, {t, -1.0}}, RowSense::kGe,
                       2.0 * inst.detour(k) + inst.prep(k), RowUnit::kTime);
      if (u.rest) {
        model.lp.add_row({{z, 1.0}}, RowSense::kGe,
                         2.0 * inst.detour(k) + inst.hos.min_rest_min, RowUnit::kTime);
      }

      charge_terms.emplace_back(t, rate);
    }
    const double drive = 2.0 * (u.visits() ? inst.detour(k) : 0.0) + inst.tau(k + 1);
    e_const -= pbar * drive;
  }

  // Deadline: variable overheads plus the rest-only constants.
  {
    std::vector<std::pair<int, double>> zsum;
    double z_const = 0.0;
    for (int k = 0; k < n; ++k) {
      if (model.z_var[static_cast<size_t>(k)] >= 0)
        zsum.emplace_back(model.z_var[static_cast<size_t>(k)], 1.0);
      else if (bin[static_cast<size_t>(k)].rest)
        z_const += 2.0 * inst.detour(k) + inst.hos.min_rest_min;
    }
    model.lp.add_row(std::move(zsum), RowSense::kLe,
                     inst.hos.extra_budget_min - z_const, RowUnit::kTime);
  }

  // t-free checks: the consecutive-driving clock is determined by the stop
  // pattern alone, as is total daily driving.
  {
    double c = inst.tau(0);
    double total_drive = inst.tau(0);
    for (int k = 0; k <= n; ++k) {
      const double reach = c + (k < n ? inst.detour(k) : 0.0);
      const double over = reach - inst.hos.max_consec_min;
      if (over > kFeasTol) {
        model.trivially_infeasible = true;
        model.build_violation_min += over;
      }
      if (k == n) break;
      const StopChoice u = bin[static_cast<size_t>(k)];
      c = step_consecutive(c, u, inst.detour(k), inst.tau(k + 1));
      total_drive += inst.tau(k + 1) + (u.visits() ? 2.0 * inst.detour(k) : 0.0);
    }
    const double over_daily = total_drive - inst.hos.max_daily_min;
    if (over_daily > kFeasTol) {
      model.trivially_infeasible = true;
      model.build_violation_min += over_daily;
    }
  }

  // Constant rows that can never hold (e.g. a reserve margin with no charge
  // opportunity ahead of it) also make the pattern trivially infeasible.
  for (const LpRow& row : model.lp.rows) {
    if (!row.terms.empty()) continue;
    const double lhs = 0.0;
    const bool bad = (row.sense == RowSense::kGe && lhs < row.rhs - kFeasTol) ||
                     (row.sense == RowSense::kLe && lhs > row.rhs + kFeasTol);
    if (bad) model.trivially_infeasible = true;
  }

  return model;
}

struct SubproblemResult {
  bool optimal = false;
  ContinuousPlan t;  // length N, zero where the plan does not charge
  std::optional<double> cost;             // set when optimal
  std::optional<double> violation_score;  // set when infeasible, in minutes
};

namespace detail {

// Minimum total weighted violation over all rows: every row gets a slack,
// energy rows weighted 1/Pbar so everything is commensurate in minutes.
inline double min_violation_minutes(const SubproblemModel& model, double pbar) {
  LpProblem slack = model.lp;
  std::fill(slack.objective.begin(), slack.objective.end(), 0.0);
  std::vector<LpRow>& rows = slack.rows;
  const size_t base_rows = rows.size();
  for (size_t i = 0; i < base_rows; ++i) {
    const double weight = rows[i].unit == RowUnit::kEnergy ? 1.0 / pbar : 1.0;
    const int s = slack.add_var(weight);
    rows[i].terms.emplace_back(s, rows[i].sense == RowSense::kGe ? 1.0 : -1.0);
  }
  const LpSolution sol = solve_lp(slack);
  if (sol.status != LpStatus::kOptimal)
    throw SolverError("violation scoring LP did not solve");
  return sol.objective;
}

}  // namespace detail

// Optimal charge times for a fixed stop pattern, or a violation score (in
// minutes) measuring how far from feasible the pattern is.
inline SubproblemResult solve_subproblem(const RouteInstance& inst, const BinaryPlan& bin) {
  const SubproblemModel model = build_subproblem(inst, bin);
  SubproblemResult result;
  result.t.assign(static_cast<size_t>(model.n), 0.0);

  if (!model.trivially_infeasible) {
    const LpSolution sol = solve_lp(model.lp);
    if (sol.status == LpStatus::kUnbounded || sol.status == LpStatus::kIterationLimit)
      throw SolverError("charge-time LP did not converge");
    if (sol.status == LpStatus::kOptimal) {
      result.optimal = true;
      for (int k = 0; k < model.n; ++k) {
        const int t = model.t_var[static_cast<size_t>(k)];
        if (t >= 0) result.t[static_cast<size_t>(k)] = sol.x[static_cast<size_t>(t)];
      }
      result.cost = sol.objective + model.cost_constant;
      return result;
    }
  }

  result.optimal = false;
  result.violation_score =
      model.build_violation_min +
      detail::min_violation_minutes(model, inst.battery.consumption_kwh_per_min);
  return result;
}

}  // namespace evplan
