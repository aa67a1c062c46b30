#pragma once

// Shared fixtures for the test suite: the two-station oracle instance and a
// couple of hand-built instances with known behavior.

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

#include "evplan/model.hpp"

namespace testutil {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// The checked-in two-station instance every oracle value below refers to.
inline const evplan::RouteInstance& tiny2() {
  static const evplan::RouteInstance inst =
      evplan::parse_instance(read_file(EVPLAN_TINY2_JSON));
  return inst;
}

inline evplan::BinaryPlan make_plan(std::initializer_list<std::pair<int, int>> choices) {
  evplan::BinaryPlan plan;
  for (const auto& [charge, rest] : choices)
    plan.push_back(evplan::StopChoice{charge != 0, rest != 0});
  return plan;
}

// One short segment pair around a single station, battery full at departure:
// the empty plan is feasible with cost zero.
inline evplan::RouteInstance easy1() {
  evplan::RouteInstance inst;
  inst.segment_times_min = {10.0, 10.0};
  inst.stations = {evplan::Station{2.0, 300.0, 6.0}};
  inst.battery.initial_kwh = inst.battery.full_kwh;
  return inst;
}

}  // namespace testutil
