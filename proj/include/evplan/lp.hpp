// Dense two-phase primal simplex.
//
// Small, deterministic, and boring on purpose: the planning subproblems are
// tiny (tens of variables, low hundreds of rows), so a dense tableau with
// Bland's anti-cycling rule beats pulling in an external solver. All
// variables are nonnegative; finite upper bounds are handled as extra rows.
#pragma once

#include <cmath>
#include <limits>
#include <utility>
#include <vector>

namespace evplan {

enum class RowSense { kLe, kGe, kEq };

// Unit of a row's residual. The solver ignores this; the subproblem layer
// uses it to weigh violation slacks commensurately (kWh vs minutes).
enum class RowUnit { kTime, kEnergy };

struct LpRow {
  std::vector<std::pair<int, double>> terms;  // (variable index, coefficient)
  RowSense sense = RowSense::kLe;
  double rhs = 0.0;
  RowUnit unit = RowUnit::kTime;
};

struct LpProblem {
  int num_vars = 0;
  std::vector<double> objective;  // length num_vars, minimized
  std::vector<LpRow> rows;
  std::vector<double> upper;  // optional per-variable upper bounds; empty = none

  int add_var(double cost) {
    objective.push_back(cost);
    if (!upper.empty()) upper.push_back(std::numeric_limits<double>::infinity());
    return num_vars++;
  }
  void set_upper(int var, double bound) {
    if (upper.empty())
      upper.assign(static_cast<size_t>(num_vars), std::numeric_limits<double>::infinity());
    upper[static_cast<size_t>(var)] = bound;
  }
  void add_row(std::vector<std::pair<int, double>> terms, RowSense sense, double rhs,
               RowUnit unit = RowUnit::kTime) {
    rows.push_back(LpRow{std::move(terms), sense, rhs, unit});
  }
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

struct LpSolution {
  LpStatus status = LpStatus::kIterationLimit;
  std::vector<double> x;
  double objective = 0.0;
  long pivots = 0;
};

namespace simplex_detail {

inline constexpr double kPivotEps = 1e-9;    // smallest usable pivot element
inline constexpr double kReducedEps = 1e-9;  // reduced-cost optimality tolerance
inline constexpr double kPhase1Tol = 1e-7;   // residual infeasibility threshold
inline constexpr double kSnapEps = 1e-11;    // zero-snap after elimination

// Flat row-major tableau: m rows of width `cols + 1` (last entry is the rhs).
class Tableau {
 public:
  Tableau(size_t m, size_t cols) : width_(cols + 1), data_(m * (cols + 1), 0.0) {}
  double* row(size_t i) { return data_.data() + i * width_; }
  const double* row(size_t i) const { return data_.data() + i * width_; }
  size_t width() const { return width_; }
  void erase_row(size_t i, size_t m) {
    data_.erase(data_.begin() + static_cast<long>(i * width_),
                data_.begin() + static_cast<long>((i + 1) * width_));
    (void)m;
  }

 private:
  size_t width_;
  std::vector<double> data_;
};

}  // namespace simplex_detail

// Minimizes objective over the rows; returns status, the structural part of
// the solution, and the objective value. Deterministic for fixed input.
inline LpSolution solve_lp(const LpProblem& problem) {
  using namespace simplex_detail;

  const int n = problem.num_vars;

  // Materialize rows, folding finite upper bounds in as x_i <= u rows.
  struct DenseRow {
    std::vector<double> a;
    RowSense sense;
    double rhs;
  };
  std::vector<DenseRow> rows;
  rows.reserve(problem.rows.size() + problem.upper.size());
  for (const LpRow& r : problem.rows) {
    DenseRow d{std::vector<double>(static_cast<size_t>(n), 0.0), r.sense, r.rhs};
    for (const auto& [var, coef] : r.terms) d.a[static_cast<size_t>(var)] += coef;
    rows.push_back(std::move(d));
  }
  for (size_t v = 0; v < problem.upper.size(); ++v) {
    if (std::isfinite(problem.upper[v])) {
      DenseRow d{std::vector<double>(static_cast<size_t>(n), 0.0), RowSense::kLe,
                 problem.upper[v]};
      d.a[v] = 1.0;
      rows.push_back(std::move(d));
    }
  }

  // Normalize all right-hand sides to be nonnegative.
  for (DenseRow& r : rows) {
    if (r.rhs < 0.0) {
      for (double& c : r.a) c = -c;
      r.rhs = -r.rhs;
      if (r.sense == RowSense::kLe) r.sense = RowSense::kGe;
      else if (r.sense == RowSense::kGe) r.sense = RowSense::kLe;
    }
  }

  const size_t m = rows.size();

  // Column layout: structural | slack/surplus | artificial.
  size_t num_slack = 0, num_art = 0;
  for (const DenseRow& r : rows) {
    if (r.sense != RowSense::kEq) ++num_slack;
    if (r.sense != RowSense::kLe) ++num_art;
  }
  const size_t slack_at = static_cast<size_t>(n);
  const size_t art_at = slack_at + num_slack;
  const size_t cols = art_at + num_art;

  Tableau tab(m, cols);
  std::vector<size_t> basis(m, 0);
  {
    size_t next_slack = slack_at, next_art = art_at;
    for (size_t i = 0; i < m; ++i) {
      double* row = tab.row(i);
      for (int j = 0; j < n; ++j) row[static_cast<size_t>(j)] = rows[i].a[static_cast<size_t>(j)];
      row[cols] = rows[i].rhs;
      switch (rows[i].sense) {
        case RowSense::kLe:
          row[next_slack] = 1.0;
          basis[i] = next_slack++;
          break;
        case RowSense::kGe:
          row[next_slack] = -1.0;
          ++next_slack;
          row[next_art] = 1.0;
          basis[i] = next_art++;
          break;
        case RowSense::kEq:
          row[next_art] = 1.0;
          basis[i] = next_art++;
          break;
      }
    }
  }

  std::vector<double> costrow(cols + 1, 0.0);
  long pivots = 0;
  const long pivot_cap = 20000 + 200 * static_cast<long>(m + cols);

  auto pivot = [&](size_t r, size_t j, size_t live_rows) {
    double* prow = tab.row(r);
    const double inv = 1.0 / prow[j];
    for (size_t c = 0; c <= cols; ++c) prow[c] *= inv;
    prow[j] = 1.0;
    for (size_t i = 0; i < live_rows; ++i) {
      if (i == r) continue;
      double* row = tab.row(i);
      const double f = row[j];
      if (f == 0.0) continue;
      for (size_t c = 0; c <= cols; ++c) {
        row[c] -= f * prow[c];
        if (std::fabs(row[c]) < kSnapEps) row[c] = 0.0;
      }
      row[j] = 0.0;
    }
    {
      const double f = costrow[j];
      if (f != 0.0) {
        for (size_t c = 0; c <= cols; ++c) {
          costrow[c] -= f * prow[c];
          if (std::fabs(costrow[c]) < kSnapEps) costrow[c] = 0.0;
        }
        costrow[j] = 0.0;
      }
    }
    basis[r] = j;
    ++pivots;
  };

  // Bland's rule: enter the lowest-index improving column; leave by minimum
  // ratio, ties broken by the lowest basis index. enter_limit excludes the
  // artificial block once phase 1 is done.
  auto run = [&](size_t enter_limit, size_t live_rows) -> LpStatus {
    while (true) {
      if (pivots > pivot_cap) return LpStatus::kIterationLimit;
      size_t enter = cols;
      for (size_t j = 0; j < enter_limit; ++j) {
        if (costrow[j] < -kReducedEps) { enter = j; break; }
      }
      if (enter == cols) return LpStatus::kOptimal;

      size_t leave = m;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (size_t i = 0; i < live_rows; ++i) {
        const double a = tab.row(i)[enter];
        if (a > kPivotEps) {
          const double ratio = tab.row(i)[cols] / a;
          if (ratio < best_ratio - 1e-12 ||
              (ratio < best_ratio + 1e-12 && (leave == m || basis[i] < basis[leave]))) {
            best_ratio = ratio;
            leave = i;
          }
        }
      }
      if (leave == m) return LpStatus::kUnbounded;
      pivot(leave, enter, live_rows);
    }
  };

  LpSolution sol;

  // Phase 1: drive the artificials to zero.
  size_t live_rows = m;
  if (num_art > 0) {
    for (size_t j = art_at; j < cols; ++j) costrow[j] = 1.0;
    for (size_t i = 0; i < m; ++i) {
      if (basis[i] >= art_at) {
        double* row = tab.row(i);
        for (size_t c = 0; c <= cols; ++c) {
          costrow[c] -= row[c];
          if (std::fabs(costrow[c]) < kSnapEps) costrow[c] = 0.0;
        }
      }
    }
    // Artificials never re-enter once they leave the basis.
    const LpStatus st = run(art_at, live_rows);
    if (st != LpStatus::kOptimal) {
      sol.status = st == LpStatus::kUnbounded ? LpStatus::kIterationLimit : st;
      sol.pivots = pivots;
      return sol;
    }
    const double infeas = -costrow[cols];
    if (infeas > kPhase1Tol) {
      sol.status = LpStatus::kInfeasible;
      sol.pivots = pivots;
      return sol;
    }
    // Remove lingering basic artificials: pivot them out where possible,
    // drop the row as redundant otherwise.
    for (size_t i = 0; i < live_rows;) {
      if (basis[i] < art_at) { ++i; continue; }
      double* row = tab.row(i);
      size_t j = art_at;
      for (size_t c = 0; c < art_at; ++c) {
        if (std::fabs(row[c]) > kPivotEps) { j = c; break; }
      }
      if (j < art_at) {
        pivot(i, j, live_rows);
        ++i;
      } else {
        tab.erase_row(i, live_rows);
        basis.erase(basis.begin() + static_cast<long>(i));
        --live_rows;
      }
    }
  }

  // Phase 2: the real objective over the surviving basis.
  std::fill(costrow.begin(), costrow.end(), 0.0);
  for (int j = 0; j < n; ++j) costrow[static_cast<size_t>(j)] = problem.objective[static_cast<size_t>(j)];
  for (size_t i = 0; i < live_rows; ++i) {
    const double f = costrow[basis[i]];
    if (f != 0.0) {
      const double* row = tab.row(i);
      for (size_t c = 0; c <= cols; ++c) {
        costrow[c] -= f * row[c];
        if (std::fabs(costrow[c]) < kSnapEps) costrow[c] = 0.0;
      }
      costrow[basis[i]] = 0.0;
    }
  }
  const LpStatus st = run(art_at, live_rows);
  sol.pivots = pivots;
  if (st != LpStatus::kOptimal) {
    sol.status = st;
    return sol;
  }

  sol.status = LpStatus::kOptimal;
  sol.x.assign(static_cast<size_t>(n), 0.0);
  for (size_t i = 0; i < live_rows; ++i) {
    if (basis[i] < static_cast<size_t>(n)) {
      double v = tab.row(i)[cols];
      if (v < 0.0 && v > -1e-9) v = 0.0;  // clean tiny negative noise
      sol.x[basis[i]] = v;
    }
  }
  sol.objective = 0.0;
  for (int j = 0; j < n; ++j)
    sol.objective += problem.objective[static_cast<size_t>(j)] * sol.x[static_cast<size_t>(j)];
  return sol;
}

}  // namespace evplan
