// Core domain types for charge-and-rest planning along a fixed route.
//
// Everything downstream works in canonical units: minutes, kWh, euros.
// Charger powers arrive in kW and are turned into kWh/min in exactly one
// place (RouteInstance::charge_rate_kwh_min); no other code divides by 60.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace evplan {

// Thrown when an input document does not match the instance schema
// (wrong type, missing required field, unknown field).
class SchemaError : public std::runtime_error {
 public:
  explicit SchemaError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when a structurally valid document violates a model invariant.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure inside a solver (cycling, iteration cap).
class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

namespace defaults {
// Catalog values used when an instance document omits a field.
inline constexpr double kChargeKw = 300.0;
inline constexpr double kMaxAcceptKw = 375.0;
inline constexpr double kFullKwh = 624.0;
inline constexpr double kSafetyFraction = 0.25;  // of full_kwh (624 -> 156)
inline constexpr double kConsumptionKwhPerMin = 1.83;
inline constexpr double kPrepMin = 6.0;
inline constexpr double kEnergyPriceEurPerKwh = 0.36;
inline constexpr double kTimeLossEurPerMin = 0.4;
inline constexpr double kMaxConsecMin = 270.0;
inline constexpr double kMinRestMin = 45.0;
inline constexpr double kMaxDailyMin = 540.0;
inline constexpr double kExtraBudgetMin = 150.0;
inline constexpr double kDeltaSmallMin = 0.1;
inline constexpr double kDeltaBigMin = 10000.0;
}  // namespace defaults

struct Station {
  double detour_min = 0.0;                 // one-way detour from ramp to charger
  double charge_kw = defaults::kChargeKw;  // charger power
  double prep_min = defaults::kPrepMin;    // hook-up / paperwork overhead
};

struct BatteryParams {
  double full_kwh = defaults::kFullKwh;
  double safety_kwh = defaults::kSafetyFraction * defaults::kFullKwh;
  double consumption_kwh_per_min = defaults::kConsumptionKwhPerMin;
  double max_accept_kw = defaults::kMaxAcceptKw;  // vehicle-side acceptance limit
  double initial_kwh = defaults::kFullKwh;
};

// Hours-of-service limits, all in minutes.
struct HosParams {
  double max_consec_min = defaults::kMaxConsecMin;    // cap on consecutive driving
  double min_rest_min = defaults::kMinRestMin;        // duration of a rest break
  double max_daily_min = defaults::kMaxDailyMin;      // cap on total daily driving
  double extra_budget_min = defaults::kExtraBudgetMin;  // slack on top of bare driving time
};

struct CostParams {
  double energy_price_eur_per_kwh = defaults::kEnergyPriceEurPerKwh;
  double time_loss_eur_per_min = defaults::kTimeLossEurPerMin;
  double delta_small_min = defaults::kDeltaSmallMin;  // minimum meaningful stop duration
  double delta_big_min = defaults::kDeltaBigMin;      // effectively-unbounded stop duration
};

// A fixed route: N+1 driving segments separated by N candidate stop locations.
struct RouteInstance {
  std::vector<double> segment_times_min;  // length N+1, minutes of driving
  std::vector<Station> stations;          // length N
  BatteryParams battery;
  HosParams hos;
  CostParams cost;

  int num_stations() const { return static_cast<int>(stations.size()); }
  double tau(int k) const { return segment_times_min[static_cast<size_t>(k)]; }
  double detour(int k) const { return stations[static_cast<size_t>(k)].detour_min; }
  double prep(int k) const { return stations[static_cast<size_t>(k)].prep_min; }

  // kW the battery actually draws at station k.
  double effective_charge_kw(int k) const {
    return std::min(stations[static_cast<size_t>(k)].charge_kw, battery.max_accept_kw);
  }
  // The one kW -> kWh/min conversion point.
  double charge_rate_kwh_min(int k) const { return effective_charge_kw(k) / 60.0; }
  // Euro cost of one minute of charging at station k.
  double charge_price_eur_min(int k) const {
    return cost.energy_price_eur_per_kwh * charge_rate_kwh_min(k);
  }
  // Battery level on arrival at ramp 0 (after driving the first segment).
  double initial_ramp_energy() const {
    return battery.initial_kwh - battery.consumption_kwh_per_min * tau(0);
  }
};

// Per-station decision: charge, rest, both, or drive past.
struct StopChoice {
  bool charge = false;
  bool rest = false;

  bool visits() const { return charge || rest; }          // any detour taken
  bool charge_and_rest() const { return charge && rest; } // overlapping stop
  friend bool operator==(const StopChoice&, const StopChoice&) = default;
};

using BinaryPlan = std::vector<StopChoice>;
using ContinuousPlan = std::vector<double>;  // charge minutes per station, 0 where no charge

inline StopChoice make_choice(bool charge, bool rest) { return StopChoice{charge, rest}; }

enum class ConstraintKind {
  kChargeBound,       // charged energy must fit under the battery ceiling
  kEnergyMargin,      // reserve level at each ramp and at the destination
  kConsecutiveLimit,  // consecutive-driving cap
  kDailyLimit,        // total daily driving cap
  kRestCoupling,      // stop-length rules tying charging to resting
  kDeadline,          // overall delivery-time budget
};

inline const char* constraint_name(ConstraintKind kind) {
  switch (kind) {
    case ConstraintKind::kChargeBound: return "charge_bound";
    case ConstraintKind::kEnergyMargin: return "energy_margin";
    case ConstraintKind::kConsecutiveLimit: return "consecutive_limit";
    case ConstraintKind::kDailyLimit: return "daily_limit";
    case ConstraintKind::kRestCoupling: return "rest_coupling";
    case ConstraintKind::kDeadline: return "deadline";
  }
  return "?";
}

// One violated constraint: which rule, at which stage (-1 for route-wide
// rules), and by how much in the rule's native unit (kWh or minutes).
struct Violation {
  ConstraintKind kind;
  int stage = -1;
  double residual = 0.0;
};

inline std::string violation_label(const Violation& v) {
  std::ostringstream os;
  os << constraint_name(v.kind);
  if (v.stage >= 0) os << "[" << v.stage << "]";
  return os.str();
}

// Result of simulating a plan: state trajectories plus any violated rules.
struct Trajectory {
  std::vector<double> energy;       // battery at each ramp, length N+1
  std::vector<double> consecutive;  // consecutive-drive clock at each ramp, length N+1
  std::vector<double> charged_kwh;  // energy added at each station, length N
  std::vector<double> overhead_min; // per-station stop overhead, length N
  std::vector<Violation> violations;

  bool feasible() const { return violations.empty(); }
};

// Everything a solver hands back.
struct SolveReport {
  std::string method;
  bool feasible = false;
  BinaryPlan binary_plan;
  ContinuousPlan continuous_plan;
  std::optional<double> cost;
  std::optional<double> lower_bound;
  std::optional<double> upper_bound;
  std::optional<double> violation_score;  // set when infeasible
  long lp_calls = 0;
  long leaves_pruned = 0;              // exact solver only
  std::vector<double> iteration_costs; // repeated rollout trace (NaN = infeasible iterate)
  double wall_time_s = 0.0;
};

// ---------------------------------------------------------------------------
// Validation

// Returns one message per violated invariant ("field: reason"); empty means valid.
inline std::vector<std::string> validate_instance(const RouteInstance& inst) {
  std::vector<std::string> out;
  auto fail = [&out](const std::string& msg) { out.push_back(msg); };

  const size_t n = inst.stations.size();
  if (n == 0) fail("stations: N >= 1 required");
  if (inst.segment_times_min.size() != n + 1)
    fail("segment_times_min: segment count must be N+1");
  for (size_t k = 0; k < inst.segment_times_min.size(); ++k) {
    if (!(inst.segment_times_min[k] >= 0.0))
      fail("segment_times_min[" + std::to_string(k) + "]: tau_k >= 0 violated");
  }
  for (size_t k = 0; k < n; ++k) {
    const Station& s = inst.stations[k];
    const std::string at = "stations[" + std::to_string(k) + "].";
    if (!(s.detour_min >= 0.0)) fail(at + "detour_min: d_k >= 0 violated");
    if (!(s.charge_kw > 0.0)) fail(at + "charge_kw: P_k > 0 violated");
    if (!(s.prep_min >= 0.0)) fail(at + "prep_min: p_k >= 0 violated");
  }

  const BatteryParams& b = inst.battery;
  if (!(b.safety_kwh >= 0.0)) fail("battery.safety_kwh: e_s >= 0 violated");
  if (!(b.safety_kwh < b.full_kwh)) fail("battery.safety_kwh: e_s < e_f violated");
  if (!(b.initial_kwh > 0.0)) fail("battery.initial_kwh: e_ini > 0 violated");
  if (!(b.initial_kwh <= b.full_kwh)) fail("battery.initial_kwh: e_ini <= e_f violated");
  if (!(b.consumption_kwh_per_min > 0.0))
    fail("battery.consumption_kwh_per_min: Pbar > 0 violated");
  if (!(b.max_accept_kw > 0.0)) fail("battery.max_accept_kw: P_max > 0 violated");

  const HosParams& h = inst.hos;
  if (!(h.max_consec_min > 0.0)) fail("hos.max_consec_min: T_d > 0 violated");
  if (!(h.min_rest_min > 0.0)) fail("hos.min_rest_min: T_r > 0 violated");
  if (!(h.max_daily_min > 0.0)) fail("hos.max_daily_min: Tbar_d > 0 violated");
  if (!(h.extra_budget_min > 0.0)) fail("hos.extra_budget_min: DeltaT > 0 violated");
  if (!(h.min_rest_min < h.max_consec_min)) fail("hos.min_rest_min: T_r < T_d violated");
  if (!(h.max_consec_min <= h.max_daily_min))
    fail("hos.max_consec_min: T_d <= Tbar_d violated");

  const CostParams& c = inst.cost;
  if (!(c.energy_price_eur_per_kwh >= 0.0))
    fail("cost.energy_price_eur_per_kwh: price >= 0 violated");
  if (!(c.time_loss_eur_per_min >= 0.0))
    fail("cost.time_loss_eur_per_min: epsilon >= 0 violated");
  if (!(c.delta_small_min > 0.0)) fail("cost.delta_small_min: delta_small > 0 violated");
  if (!(c.delta_big_min >= h.max_daily_min + h.extra_budget_min))
    fail("cost.delta_big_min: delta_big >= Tbar_d + DeltaT violated");

  return out;
}

// ---------------------------------------------------------------------------
// JSON parsing (strict: unknown keys are schema errors)

namespace detail {

inline void require_object(const nlohmann::json& j, const std::string& where) {
  if (!j.is_object()) throw SchemaError(where + ": expected an object");
}

inline void reject_unknown_keys(const nlohmann::json& j, const std::string& where,
                                std::initializer_list<const char*> allowed) {
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* key : allowed)
      if (item.key() == key) { known = true; break; }
    if (!known) throw SchemaError(where + ": unknown field \"" + item.key() + "\"");
  }
}

inline double get_number(const nlohmann::json& j, const std::string& where) {
  if (!j.is_number()) throw SchemaError(where + ": expected a number");
  return j.get<double>();
}

inline double number_or(const nlohmann::json& obj, const char* key, double fallback,
                        const std::string& where) {
  if (!obj.contains(key)) return fallback;
  return get_number(obj.at(key), where + "." + key);
}

inline double required_number(const nlohmann::json& obj, const char* key,
                              const std::string& where) {
  if (!obj.contains(key))
    throw SchemaError(where + ": missing required field \"" + key + "\"");
  return get_number(obj.at(key), where + "." + key);
}

}  // namespace detail

inline RouteInstance parse_instance(const nlohmann::json& doc) {
  using namespace detail;
  require_object(doc, "instance");
  reject_unknown_keys(doc, "instance",
                      {"segment_times_min", "stations", "battery", "hos", "cost"});

  RouteInstance inst;

  if (!doc.contains("segment_times_min"))
    throw SchemaError("instance: missing required field \"segment_times_min\"");
  const auto& segs = doc.at("segment_times_min");
  if (!segs.is_array()) throw SchemaError("segment_times_min: expected an array");
  for (size_t i = 0; i < segs.size(); ++i)
    inst.segment_times_min.push_back(
        get_number(segs[i], "segment_times_min[" + std::to_string(i) + "]"));

  if (!doc.contains("stations"))
    throw SchemaError("instance: missing required field \"stations\"");
  const auto& stations = doc.at("stations");
  if (!stations.is_array()) throw SchemaError("stations: expected an array");
  for (size_t i = 0; i < stations.size(); ++i) {
    const std::string where = "stations[" + std::to_string(i) + "]";
    const auto& js = stations[i];
    require_object(js, where);
    reject_unknown_keys(js, where, {"detour_min", "charge_kw", "prep_min"});
    Station s;
    s.detour_min = required_number(js, "detour_min", where);
    s.charge_kw = number_or(js, "charge_kw", defaults::kChargeKw, where);
    s.prep_min = number_or(js, "prep_min", defaults::kPrepMin, where);
    inst.stations.push_back(s);
  }

  if (!doc.contains("battery"))
    throw SchemaError("instance: missing required field \"battery\"");
  {
    const auto& jb = doc.at("battery");
    require_object(jb, "battery");
    reject_unknown_keys(jb, "battery",
                        {"full_kwh", "safety_kwh", "consumption_kwh_per_min",
                         "max_accept_kw", "initial_kwh"});
    BatteryParams& b = inst.battery;
    b.full_kwh = number_or(jb, "full_kwh", defaults::kFullKwh, "battery");
    b.safety_kwh = number_or(jb, "safety_kwh", defaults::kSafetyFraction * b.full_kwh,
                             "battery");
    b.consumption_kwh_per_min = number_or(jb, "consumption_kwh_per_min",
                                          defaults::kConsumptionKwhPerMin, "battery");
    b.max_accept_kw = number_or(jb, "max_accept_kw", defaults::kMaxAcceptKw, "battery");
    b.initial_kwh = required_number(jb, "initial_kwh", "battery");
  }

  if (doc.contains("hos")) {
    const auto& jh = doc.at("hos");
    require_object(jh, "hos");
    reject_unknown_keys(jh, "hos", {"max_consec_min", "min_rest_min", "max_daily_min",
                                    "extra_budget_min"});
    HosParams& h = inst.hos;
    h.max_consec_min = number_or(jh, "max_consec_min", defaults::kMaxConsecMin, "hos");
    h.min_rest_min = number_or(jh, "min_rest_min", defaults::kMinRestMin, "hos");
    h.max_daily_min = number_or(jh, "max_daily_min", defaults::kMaxDailyMin, "hos");
    h.extra_budget_min =
        number_or(jh, "extra_budget_min", defaults::kExtraBudgetMin, "hos");
  }

  if (doc.contains("cost")) {
    const auto& jc = doc.at("cost");
    require_object(jc, "cost");
    reject_unknown_keys(jc, "cost",
                        {"energy_price_eur_per_kwh", "time_loss_eur_per_min",
                         "delta_small_min", "delta_big_min"});
    CostParams& c = inst.cost;
    c.energy_price_eur_per_kwh = number_or(jc, "energy_price_eur_per_kwh",
                                           defaults::kEnergyPriceEurPerKwh, "cost");
    c.time_loss_eur_per_min =
        number_or(jc, "time_loss_eur_per_min", defaults::kTimeLossEurPerMin, "cost");
    c.delta_small_min = number_or(jc, "delta_small_min", defaults::kDeltaSmallMin, "cost");
    c.delta_big_min = number_or(jc, "delta_big_min", defaults::kDeltaBigMin, "cost");
  }

  std::vector<std::string> problems = validate_instance(inst);
  if (!problems.empty()) {
    std::string msg = "invalid instance:";
    for (const std::string& p : problems) msg += "\n  " + p;
    throw ValidationError(msg);
  }
  return inst;
}

inline RouteInstance parse_instance(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(std::string("instance: not valid JSON: ") + e.what());
  }
  return parse_instance(doc);
}

inline nlohmann::json serialize_instance(const RouteInstance& inst) {
  nlohmann::json doc;
  doc["segment_times_min"] = inst.segment_times_min;
  nlohmann::json stations = nlohmann::json::array();
  for (const Station& s : inst.stations) {
    stations.push_back({{"detour_min", s.detour_min},
                        {"charge_kw", s.charge_kw},
                        {"prep_min", s.prep_min}});
  }
  doc["stations"] = stations;
  doc["battery"] = {{"full_kwh", inst.battery.full_kwh},
                    {"safety_kwh", inst.battery.safety_kwh},
                    {"consumption_kwh_per_min", inst.battery.consumption_kwh_per_min},
                    {"max_accept_kw", inst.battery.max_accept_kw},
                    {"initial_kwh", inst.battery.initial_kwh}};
  doc["hos"] = {{"max_consec_min", inst.hos.max_consec_min},
                {"min_rest_min", inst.hos.min_rest_min},
                {"max_daily_min", inst.hos.max_daily_min},
                {"extra_budget_min", inst.hos.extra_budget_min}};
  doc["cost"] = {{"energy_price_eur_per_kwh", inst.cost.energy_price_eur_per_kwh},
                 {"time_loss_eur_per_min", inst.cost.time_loss_eur_per_min},
                 {"delta_small_min", inst.cost.delta_small_min},
                 {"delta_big_min", inst.cost.delta_big_min}};
  return doc;
}

inline nlohmann::json report_to_json(const SolveReport& r) {
  nlohmann::json doc;
  doc["method"] = r.method;
  doc["feasible"] = r.feasible;
  if (!r.binary_plan.empty()) {
    nlohmann::json plan = nlohmann::json::array();
    for (const StopChoice& u : r.binary_plan)
      plan.push_back({u.charge ? 1 : 0, u.rest ? 1 : 0});
    doc["binary_plan"] = plan;
  }
  if (!r.continuous_plan.empty()) doc["continuous_plan"] = r.continuous_plan;
  if (r.cost) doc["cost"] = *r.cost;
  if (r.lower_bound) doc["lower_bound"] = *r.lower_bound;
  if (r.upper_bound) doc["upper_bound"] = *r.upper_bound;
  if (r.violation_score) doc["violation_score"] = *r.violation_score;
  doc["lp_calls"] = r.lp_calls;
  if (r.leaves_pruned > 0) doc["leaves_pruned"] = r.leaves_pruned;
  if (!r.iteration_costs.empty()) {
    nlohmann::json trace = nlohmann::json::array();
    for (double c : r.iteration_costs) {
      if (std::isnan(c)) trace.push_back(nullptr);
      else trace.push_back(c);
    }
    doc["iteration_costs"] = trace;
  }
  doc["wall_time"] = r.wall_time_s;
  return doc;
}

}  // namespace evplan
