// Big-M linearization of the full planning problem: binaries become [0,1]
// variables, the bilinear charge and clock updates become McCormick
// envelopes, and per-stop overheads become epigraph variables. Solving the
// LP relaxation yields a certified lower bound on every integer plan;
// fixing the binaries must reproduce the fixed-pattern subproblem exactly.
#pragma once

#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "lp.hpp"
#include "model.hpp"

namespace evplan {

class RelaxationInfeasible : public std::runtime_error {
 public:
  explicit RelaxationInfeasible(const std::string& what) : std::runtime_error(what) {}
};

// Variable layout, per stage k (all nonnegative):
//   t      charge minutes                that   = b * t        (McCormick)
//   de     charged kWh (rate * t)        dehat  = b * de       (McCormick)
//   y      = (1 - brest) * (c_k + d_k b) (McCormick)
//   z      stop-overhead epigraph
//   e_1..e_N, c_1..c_N  ramp states (ramp 0 is a constant)
//   b, brest in [0,1], plus bor = b OR brest and band = b AND brest.
struct MilpModel {
  LpProblem relaxation;
  int n = 0;
  double energy_big_m = 0.0;

  int t(int k) const { return k; }
  int that(int k) const { return n + k; }
  int de(int k) const { return 2 * n + k; }
  int dehat(int k) const { return 3 * n + k; }
  int y(int k) const { return 4 * n + k; }
  int z(int k) const { return 5 * n + k; }
  int e(int k) const { return 6 * n + (k - 1); }  // k in 1..n
  int c(int k) const { return 7 * n + (k - 1); }  // k in 1..n
  int b(int k) const { return 8 * n + k; }
  int brest(int k) const { return 9 * n + k; }
  int bor(int k) const { return 10 * n + k; }
  int band(int k) const { return 11 * n + k; }
};

// Builds the linearized model. energy_big_m caps the charged-energy
// McCormick block; the battery capacity is the tightest valid choice and the
// default (pass a larger value to study looser relaxations).
inline MilpModel linearize(const RouteInstance& inst, double energy_big_m = -1.0) {
  const int n = inst.num_stations();
  const double pbar = inst.battery.consumption_kwh_per_min;
  const double es = inst.battery.safety_kwh;
  const double ef = inst.battery.full_kwh;
  const double td = inst.hos.max_consec_min;
  const double tr = inst.hos.min_rest_min;
  const double me = energy_big_m > 0.0 ? energy_big_m : ef;
  const double mt = inst.cost.delta_big_min;
  const double mc = inst.hos.max_daily_min;
  const double e0 = inst.initial_ramp_energy();
  const double c0 = inst.tau(0);

  MilpModel m;
  m.n = n;
  m.energy_big_m = me;
  LpProblem& lp = m.relaxation;
  lp.num_vars = 12 * n;
  lp.objective.assign(static_cast<size_t>(12 * n), 0.0);
  for (int k = 0; k < n; ++k) {
    lp.objective[static_cast<size_t>(m.that(k))] = inst.charge_price_eur_min(k);
    lp.objective[static_cast<size_t>(m.z(k))] = inst.cost.time_loss_eur_per_min;
    lp.set_upper(m.b(k), 1.0);
    lp.set_upper(m.brest(k), 1.0);
    lp.set_upper(m.bor(k), 1.0);
    lp.set_upper(m.band(k), 1.0);
  }

  using Terms = std::vector<std::pair<int, double>>;

  for (int k = 0; k < n; ++k) {
    const double d = inst.detour(k);
    const double p = inst.prep(k);
    const double rate = inst.charge_rate_kwh_min(k);

    // de = rate * t
    lp.add_row({{m.de(k), 1.0}, {m.t(k), -rate}}, RowSense::kEq, 0.0, RowUnit::kEnergy);

    // dehat = b * de with de in [0, me]
    lp.add_row({{m.dehat(k), 1.0}, {m.b(k), -me}}, RowSense::kLe, 0.0, RowUnit::kEnergy);
    lp.add_row({{m.de(k), 1.0}, {m.dehat(k), -1.0}}, RowSense::kGe, 0.0, RowUnit::kEnergy);
    lp.add_row({{m.de(k), 1.0}, {m.dehat(k), -1.0}, {m.b(k), me}}, RowSense::kLe, me,
               RowUnit::kEnergy);

    // that = b * t with t in [0, mt]
    lp.add_row({{m.that(k), 1.0}, {m.b(k), -mt}}, RowSense::kLe, 0.0);
    lp.add_row({{m.t(k), 1.0}, {m.that(k), -1.0}}, RowSense::kGe, 0.0);
    lp.add_row({{m.t(k), 1.0}, {m.that(k), -1.0}, {m.b(k), mt}}, RowSense::kLe, mt);

    // Energy step: e_{k+1} = e_k + dehat - pbar*(2 d bor + tau_{k+1})
    {
      Terms terms{{m.e(k + 1), 1.0}, {m.dehat(k), -1.0}, {m.bor(k), 2.0 * pbar * d}};
      double rhs = -pbar * inst.tau(k + 1);
      if (k == 0) rhs += e0;
      else terms.emplace_back(m.e(k), -1.0);
      lp.add_row(std::move(terms), RowSense::kEq, rhs, RowUnit::kEnergy);
    }

    // y = (1 - brest) * (c_k + d b) with the inner sum in [0, mc]
    {
      Terms le{{m.y(k), 1.0}, {m.b(k), -d}};
      Terms ge{{m.y(k), 1.0}, {m.b(k), -d}, {m.brest(k), mc}};
      double rhs_le = 0.0, rhs_ge = 0.0;
      if (k == 0) { rhs_le = c0; rhs_ge = c0; }
      else {
        le.emplace_back(m.c(k), -1.0);
        ge.emplace_back(m.c(k), -1.0);
      }
      lp.add_row(std::move(le), RowSense::kLe, rhs_le);
      lp.add_row(std::move(ge), RowSense::kGe, rhs_ge);
      lp.add_row({{m.y(k), 1.0}, {m.brest(k), mc}}, RowSense::kLe, mc);
    }

    // Clock step: c_{k+1} = tau_{k+1} + d bor + y
    lp.add_row({{m.c(k + 1), 1.0}, {m.bor(k), -d}, {m.y(k), -1.0}}, RowSense::kEq,
               inst.tau(k + 1));

    // band = b AND brest; bor = b OR brest
    lp.add_row({{m.band(k), 1.0}, {m.brest(k), -1.0}}, RowSense::kLe, 0.0);
    lp.add_row({{m.band(k), 1.0}, {m.b(k), -1.0}}, RowSense::kLe, 0.0);
    lp.add_row({{m.band(k), 1.0}, {m.b(k), -1.0}, {m.brest(k), -1.0}}, RowSense::kGe,
               -1.0);
    lp.add_row({{m.bor(k), 1.0}, {m.b(k), -1.0}}, RowSense::kGe, 0.0);
    lp.add_row({{m.bor(k), 1.0}, {m.brest(k), -1.0}}, RowSense::kGe, 0.0);
    lp.add_row({{m.bor(k), 1.0}, {m.b(k), -1.0}, {m.brest(k), -1.0}}, RowSense::kLe, 0.0);

    // Overhead epigraph
    lp.add_row({{m.z(k), 1.0}, {m.b(k), -(2.0 * d + p)}, {m.that(k), -1.0}}, RowSense::kGe,
               0.0);
    lp.add_row({{m.z(k), 1.0}, {m.brest(k), -(2.0 * d + tr)}}, RowSense::kGe, 0.0);

    // Stop-length rule
    lp.add_row({{m.that(k), 1.0},
                {m.b(k), p},
                {m.brest(k), tr - inst.cost.delta_small_min - inst.cost.delta_big_min}},
               RowSense::kLe, tr - inst.cost.delta_small_min);

    // Charge ceiling
    {
      Terms terms{{m.de(k), 1.0}};
      double rhs = ef + pbar * d;
      if (k == 0) rhs -= e0;
      else terms.emplace_back(m.e(k), 1.0);
      lp.add_row(std::move(terms), RowSense::kLe, rhs, RowUnit::kEnergy);
    }

    // Reserve margin at ramp k (constant row at k = 0)
    {
      const double need = es + pbar * d;
      if (k == 0) lp.add_row({}, RowSense::kGe, need - e0, RowUnit::kEnergy);
      else lp.add_row({{m.e(k), 1.0}}, RowSense::kGe, need, RowUnit::kEnergy);
    }

    // Consecutive-driving cap at ramp k (constant row at k = 0)
    if (k == 0) lp.add_row({}, RowSense::kLe, td - (c0 + d));
    else lp.add_row({{m.c(k), 1.0}}, RowSense::kLe, td - d);
  }

  // Terminal reserve and clock caps.
  lp.add_row({{m.e(n), 1.0}}, RowSense::kGe, es, RowUnit::kEnergy);
  lp.add_row({{m.c(n), 1.0}}, RowSense::kLe, td);

  // Daily driving cap: segments are constant, detours depend on visits.
  {
    Terms terms;
    double tau_total = 0.0;
    for (int k = 0; k <= n; ++k) tau_total += inst.tau(k);
    for (int k = 0; k < n; ++k) terms.emplace_back(m.bor(k), 2.0 * inst.detour(k));
    lp.add_row(std::move(terms), RowSense::kLe, inst.hos.max_daily_min - tau_total);
  }

  // Deadline budget over all stop overheads.
  {
    Terms terms;
    for (int k = 0; k < n; ++k) terms.emplace_back(m.z(k), 1.0);
    lp.add_row(std::move(terms), RowSense::kLe, inst.hos.extra_budget_min);
  }

  return m;
}

// The model with the stop pattern pinned: used to cross-check the
// linearization against the direct fixed-pattern LP.
inline LpProblem fix_binaries(const MilpModel& model, const BinaryPlan& bin) {
  if (static_cast<int>(bin.size()) != model.n)
    throw std::invalid_argument("plan length must equal the station count");
  LpProblem lp = model.relaxation;
  for (int k = 0; k < model.n; ++k) {
    lp.add_row({{model.b(k), 1.0}}, RowSense::kEq,
               bin[static_cast<size_t>(k)].charge ? 1.0 : 0.0);
    lp.add_row({{model.brest(k), 1.0}}, RowSense::kEq,
               bin[static_cast<size_t>(k)].rest ? 1.0 : 0.0);
  }
  return lp;
}

inline constexpr double kRoundThreshold = 1e-6;

// Fractional (charge, rest) values -> a stop pattern: anything meaningfully
// positive becomes a stop.
inline BinaryPlan round_binaries(const std::vector<std::pair<double, double>>& raw,
                                 double threshold = kRoundThreshold) {
  BinaryPlan plan;
  plan.reserve(raw.size());
  for (const auto& [b, brest] : raw)
    plan.push_back(StopChoice{b > threshold, brest > threshold});
  return plan;
}

struct RelaxationSolution {
  bool feasible = false;
  double bound = 0.0;                           // LP relaxation optimum
  std::vector<std::pair<double, double>> raw;   // fractional (b, brest) per stage
  BinaryPlan rounded;                           // thresholded stop pattern
};

// Solves the LP relaxation once; the bound and the rounded base plan come
// from the same solve.
inline RelaxationSolution relax_solve(const RouteInstance& inst) {
  const MilpModel model = linearize(inst);
  const LpSolution sol = solve_lp(model.relaxation);
  RelaxationSolution out;
  if (sol.status == LpStatus::kInfeasible) return out;
  if (sol.status != LpStatus::kOptimal)
    throw SolverError("relaxation LP did not converge");
  out.feasible = true;
  out.bound = sol.objective;
  out.raw.reserve(static_cast<size_t>(model.n));
  for (int k = 0; k < model.n; ++k)
    out.raw.emplace_back(sol.x[static_cast<size_t>(model.b(k))],
                         sol.x[static_cast<size_t>(model.brest(k))]);
  out.rounded = round_binaries(out.raw);
  return out;
}

// Certified lower bound on the cost of every feasible plan; empty when the
// relaxation itself is infeasible (so the instance is too).
inline std::optional<double> relaxation_bound(const RouteInstance& inst) {
  const RelaxationSolution sol = relax_solve(inst);
  if (!sol.feasible) return std::nullopt;
  return sol.bound;
}

// Stop pattern obtained by rounding the relaxation; may be infeasible, which
// is fine for a rollout base.
inline BinaryPlan relaxed_base(const RouteInstance& inst) {
  const RelaxationSolution sol = relax_solve(inst);
  if (!sol.feasible) throw RelaxationInfeasible("relaxation infeasible: no base plan");
  return sol.rounded;
}

}  // namespace evplan
