// State-update laws for a plan along the route, plan simulation, the
// feasibility checker, and a cheap sufficient-feasibility pre-check.
//
// State per ramp k: battery energy e_k (kWh) and the consecutive-driving
// clock c_k (minutes). A stop at station k adds a detour d_k each way;
// resting clears the clock, charging alone does not.
#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "model.hpp"

namespace evplan {

// Residuals at or below this (native units) count as satisfied.
inline constexpr double kFeasTol = 1e-6;

// kWh added by charging t minutes at a charger of charge_kw, subject to the
// vehicle's acceptance limit.
inline double charging_energy(double t_min, double charge_kw, double max_accept_kw) {
  return t_min * std::min(charge_kw, max_accept_kw) / 60.0;
}

// Battery at the next ramp given the battery at this ramp, the decision,
// the energy charged, and the driving to come (detour both ways plus the
// next segment).
inline double step_energy(double e_k, StopChoice u, double charged_kwh,
                          double detour_min, double tau_next_min,
                          double consumption_kwh_per_min) {
  const double drive = 2.0 * (u.visits() ? detour_min : 0.0) + tau_next_min;
  return e_k + (u.charge ? charged_kwh : 0.0) - consumption_kwh_per_min * drive;
}

// Consecutive-driving clock at the next ramp. A rest zeroes the clock before
// the return detour; a charge-only stop keeps it running through the full
// round trip; driving past just accumulates.
inline double step_consecutive(double c_k, StopChoice u, double detour_min,
                               double tau_next_min) {
  double next = tau_next_min + (u.visits() ? detour_min : 0.0);
  if (!u.rest) next += c_k + (u.charge ? detour_min : 0.0);
  return next;
}

// Minutes lost to the stop at a station: detours plus the longer of the
// charging visit (prep + charge time) and the rest break.
inline double stop_overhead(StopChoice u, double t_min, double detour_min,
                            double prep_min, double rest_min) {
  const double charge_part = u.charge ? 2.0 * detour_min + prep_min + t_min : 0.0;
  const double rest_part = u.rest ? 2.0 * detour_min + rest_min : 0.0;
  return std::max(charge_part, rest_part);
}

namespace detail {

inline void require_plan_lengths(const RouteInstance& inst, const BinaryPlan& bin,
                                 const ContinuousPlan& cont) {
  const size_t n = static_cast<size_t>(inst.num_stations());
  if (bin.size() != n || cont.size() != n)
    throw std::invalid_argument("plan length must equal the station count");
}

}  // namespace detail

// Rolls a plan forward through the dynamics and records every violated
// constraint. The violation list is ordered: charge bounds, energy margins,
// consecutive-driving, daily driving, rest/charge coupling, deadline.
inline Trajectory simulate(const RouteInstance& inst, const BinaryPlan& bin,
                           const ContinuousPlan& cont) {
  detail::require_plan_lengths(inst, bin, cont);
  const int n = inst.num_stations();
  const double pbar = inst.battery.consumption_kwh_per_min;

  Trajectory traj;
  traj.energy.reserve(static_cast<size_t>(n) + 1);
  traj.consecutive.reserve(static_cast<size_t>(n) + 1);
  traj.energy.push_back(inst.initial_ramp_energy());
  traj.consecutive.push_back(inst.tau(0));

  for (int k = 0; k < n; ++k) {
    const StopChoice u = bin[static_cast<size_t>(k)];
    const double charged =
        u.charge ? charging_energy(cont[static_cast<size_t>(k)],
                                   inst.stations[static_cast<size_t>(k)].charge_kw,
                                   inst.battery.max_accept_kw)
                 : 0.0;
    traj.charged_kwh.push_back(charged);
    traj.overhead_min.push_back(stop_overhead(u, cont[static_cast<size_t>(k)],
                                              inst.detour(k), inst.prep(k),
                                              inst.hos.min_rest_min));
    traj.energy.push_back(step_energy(traj.energy.back(), u, charged, inst.detour(k),
                                      inst.tau(k + 1), pbar));
    traj.consecutive.push_back(
        step_consecutive(traj.consecutive[static_cast<size_t>(k)], u, inst.detour(k),
                         inst.tau(k + 1)));
  }

  auto violated = [&traj](ConstraintKind kind, int stage, double residual) {
    if (residual > kFeasTol) traj.violations.push_back({kind, stage, residual});
  };

  // Charged energy must be nonnegative and fit under the battery ceiling.
  for (int k = 0; k < n; ++k) {
    const double de = traj.charged_kwh[static_cast<size_t>(k)];
    const double cap = inst.battery.full_kwh -
                       (traj.energy[static_cast<size_t>(k)] - pbar * inst.detour(k));
    violated(ConstraintKind::kChargeBound, k, std::max(-de, de - cap));
  }
  // Reserve margin at every ramp (enough to detour off it) and at the end.
  for (int k = 0; k <= n; ++k) {
    const double need =
        inst.battery.safety_kwh + (k < n ? pbar * inst.detour(k) : 0.0);
    violated(ConstraintKind::kEnergyMargin, k, need - traj.energy[static_cast<size_t>(k)]);
  }
  // Consecutive-driving cap, counting the detour off ramp k when k < N.
  for (int k = 0; k <= n; ++k) {
    const double reach =
        traj.consecutive[static_cast<size_t>(k)] + (k < n ? inst.detour(k) : 0.0);
    violated(ConstraintKind::kConsecutiveLimit, k, reach - inst.hos.max_consec_min);
  }
  // Total daily driving: all segments plus both detour legs of every visit.
  {
    double total = 0.0;
    for (int k = 0; k <= n; ++k) total += inst.tau(k);
    for (int k = 0; k < n; ++k)
      if (bin[static_cast<size_t>(k)].visits()) total += 2.0 * inst.detour(k);
    violated(ConstraintKind::kDailyLimit, -1, total - inst.hos.max_daily_min);
  }
  // A charging visit must fit inside a rest break, or be paired with one.
  for (int k = 0; k < n; ++k) {
    const StopChoice u = bin[static_cast<size_t>(k)];
    const double lhs =
        u.charge ? cont[static_cast<size_t>(k)] + inst.prep(k) : 0.0;
    const double rhs = u.rest ? inst.cost.delta_big_min
                              : inst.hos.min_rest_min - inst.cost.delta_small_min;
    violated(ConstraintKind::kRestCoupling, k, lhs - rhs);
  }
  // Deadline: total stop overhead within the extra-time budget.
  {
    double total = 0.0;
    for (double z : traj.overhead_min) total += z;
    violated(ConstraintKind::kDeadline, -1, total - inst.hos.extra_budget_min);
  }

  return traj;
}

inline std::vector<Violation> check_feasibility(const RouteInstance& inst,
                                                const BinaryPlan& bin,
                                                const ContinuousPlan& cont) {
  return simulate(inst, bin, cont).violations;
}

// Charging cost plus time-loss cost of a plan. Charge time at stations that
// do not charge is ignored.
inline double evaluate_cost(const RouteInstance& inst, const BinaryPlan& bin,
                            const ContinuousPlan& cont) {
  detail::require_plan_lengths(inst, bin, cont);
  double charge_eur = 0.0;
  double overhead_min = 0.0;
  for (int k = 0; k < inst.num_stations(); ++k) {
    const StopChoice u = bin[static_cast<size_t>(k)];
    if (u.charge) charge_eur += inst.charge_price_eur_min(k) * cont[static_cast<size_t>(k)];
    overhead_min += stop_overhead(u, cont[static_cast<size_t>(k)], inst.detour(k),
                                  inst.prep(k), inst.hos.min_rest_min);
  }
  return charge_eur + inst.cost.time_loss_eur_per_min * overhead_min;
}

// Longest useful charge at station k: from the reserve floor up to full.
inline double max_charge_time(const RouteInstance& inst, int k) {
  return (inst.battery.full_kwh - inst.battery.safety_kwh) / inst.charge_rate_kwh_min(k);
}

// The conservative witness plan: stop, rest, and top the battery up to full
// at every station. Charge times are time-to-fill, never the full
// reserve-to-full span, so the charge-bound cap is met by construction.
inline std::pair<BinaryPlan, ContinuousPlan> full_charge_plan(const RouteInstance& inst) {
  const int n = inst.num_stations();
  const double pbar = inst.battery.consumption_kwh_per_min;
  BinaryPlan bin(static_cast<size_t>(n), StopChoice{true, true});
  ContinuousPlan cont(static_cast<size_t>(n), 0.0);
  double e = inst.initial_ramp_energy();
  for (int k = 0; k < n; ++k) {
    const double at_station = e - pbar * inst.detour(k);
    const double missing = std::max(0.0, inst.battery.full_kwh - at_station);
    cont[static_cast<size_t>(k)] = missing / inst.charge_rate_kwh_min(k);
    e = at_station + missing - pbar * (inst.detour(k) + inst.tau(k + 1));
  }
  return {std::move(bin), std::move(cont)};
}

// Outcome of the sufficient-feasibility pre-check. When sufficient is true,
// the full-charge witness plan is guaranteed to pass check_feasibility.
struct SufficiencyReport {
  bool sufficient = true;
  std::vector<std::string> failed;  // ids of the conditions that do not hold
};

// Conservative per-leg conditions: every leg between consecutive stops must
// be drivable on one full battery and fit the consecutive-driving cap, total
// driving must fit the daily cap, and worst-case stop overheads must fit the
// deadline budget. Sufficient, not necessary.
inline SufficiencyReport sufficient_feasibility(const RouteInstance& inst) {
  const int n = inst.num_stations();
  const double pbar = inst.battery.consumption_kwh_per_min;
  const double es = inst.battery.safety_kwh;
  const double ef = inst.battery.full_kwh;

  SufficiencyReport rep;
  auto fail = [&rep](const std::string& id) {
    rep.sufficient = false;
    rep.failed.push_back(id);
  };

  // Energy: reach the first station, hop station to station, reach the end.
  if (inst.battery.initial_kwh < es + pbar * (inst.tau(0) + inst.detour(0)) - kFeasTol)
    fail("initial_leg_energy");
  for (int k = 1; k < n; ++k) {
    const double leg = inst.detour(k - 1) + inst.tau(k) + inst.detour(k);
    if (ef < es + pbar * leg - kFeasTol)
      fail("station_gap_energy[" + std::to_string(k) + "]");
  }
  if (ef < es + pbar * (inst.detour(n - 1) + inst.tau(n)) - kFeasTol)
    fail("final_leg_energy");

  // Duration: each leg must fit the consecutive-driving cap on its own.
  const double td = inst.hos.max_consec_min;
  if (inst.tau(0) + inst.detour(0) > td + kFeasTol) fail("initial_leg_duration");
  for (int k = 1; k < n; ++k) {
    const double leg = inst.detour(k - 1) + inst.tau(k) + inst.detour(k);
    if (leg > td + kFeasTol) fail("station_gap_duration[" + std::to_string(k) + "]");
  }
  if (inst.detour(n - 1) + inst.tau(n) > td + kFeasTol) fail("final_leg_duration");

  // Total driving with every detour taken.
  {
    double total = 0.0;
    for (int k = 0; k <= n; ++k) total += inst.tau(k);
    for (int k = 0; k < n; ++k) total += 2.0 * inst.detour(k);
    if (total > inst.hos.max_daily_min + kFeasTol) fail("total_driving_time");
  }

  // Deadline with worst-case (reserve-to-full) charge time at every station.
  {
    double total = 0.0;
    for (int k = 0; k < n; ++k) {
      const double charge_part =
          2.0 * inst.detour(k) + inst.prep(k) + max_charge_time(inst, k);
      const double rest_part = 2.0 * inst.detour(k) + inst.hos.min_rest_min;
      total += std::max(charge_part, rest_part);
    }
    if (total > inst.hos.extra_budget_min + kFeasTol) fail("deadline_budget");
  }

  return rep;
}

}  // namespace evplan
