#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include "cutsel/common.hpp"
#include "cutsel/instance.hpp"

namespace cutsel {

enum class SimplexStatus { Optimal, Infeasible, Unbounded, IterationLimit };

enum class BasisStatus { Lower, Basic, Upper, Zero };  // Zero: nonbasic free at 0

inline const char* to_string(SimplexStatus s) {
  switch (s) {
    case SimplexStatus::Optimal: return "optimal";
    case SimplexStatus::Infeasible: return "infeasible";
    case SimplexStatus::Unbounded: return "unbounded";
    case SimplexStatus::IterationLimit: return "iteration_limit";
  }
  return "?";
}

/// Final tableau snapshot. Column layout: [0,n) structural, [n,n+m) row
/// slacks, [n+m,..) artificials left over from phase 1 (fixed at zero).
struct TableauData {
  int rows = 0;
  int cols = 0;
  int n_struct = 0;
  int n_slack = 0;
  std::vector<double> t;       // rows x cols, row-major: B^{-1} [A | I | R]
  std::vector<double> rhs;     // B^{-1} b
  std::vector<int> basic;      // basic column per row
  std::vector<BasisStatus> state;  // per column
  std::vector<double> val;     // resting value per column (basic: current value)
  std::vector<double> lower, upper;

  double at(int i, int j) const { return t[static_cast<std::size_t>(i) * cols + j]; }
};

struct TableauRow {
  std::vector<std::pair<int, double>> coefs;  // nonbasic column -> coefficient
  double rhs = 0.0;
};

struct SimplexSolution {
  SimplexStatus status = SimplexStatus::Infeasible;
  std::vector<double> x;               // structural values
  double objective = 0.0;
  std::vector<double> duals;           // one per row (c_B B^{-1})
  std::vector<double> reduced_costs;   // one per structural column
  std::vector<BasisStatus> col_status;
  std::vector<BasisStatus> row_status;
  long pivot_count = 0;
  std::shared_ptr<const LpProblem> problem;
  std::shared_ptr<const TableauData> tableau;
};

namespace simplex_detail {

constexpr double kFeasTol = 1e-6;
constexpr double kOptTol = 1e-7;
constexpr double kPivTol = 1e-10;
constexpr double kDegenTol = 1e-9;

class Tableau {
 public:
  Tableau(const LpProblem& lp, long max_iters)
      : n_(lp.num_vars), m_(lp.num_cons()), max_iters_(max_iters) {
    // Nonbasic structurals rest at a finite bound when one exists.
    lower_.assign(static_cast<std::size_t>(n_ + m_), 0.0);
    upper_.assign(static_cast<std::size_t>(n_ + m_), kInf);
    for (int j = 0; j < n_; ++j) {
      lower_[static_cast<std::size_t>(j)] = lp.var_lower[static_cast<std::size_t>(j)];
      upper_[static_cast<std::size_t>(j)] = lp.var_upper[static_cast<std::size_t>(j)];
    }
    val_.assign(static_cast<std::size_t>(n_ + m_), 0.0);
    state_.assign(static_cast<std::size_t>(n_ + m_), BasisStatus::Lower);
    for (int j = 0; j < n_; ++j) {
      if (std::isfinite(lower_[static_cast<std::size_t>(j)])) {
        state_[static_cast<std::size_t>(j)] = BasisStatus::Lower;
        val_[static_cast<std::size_t>(j)] = lower_[static_cast<std::size_t>(j)];
      } else if (std::isfinite(upper_[static_cast<std::size_t>(j)])) {
        state_[static_cast<std::size_t>(j)] = BasisStatus::Upper;
        val_[static_cast<std::size_t>(j)] = upper_[static_cast<std::size_t>(j)];
      } else {
        state_[static_cast<std::size_t>(j)] = BasisStatus::Zero;
        val_[static_cast<std::size_t>(j)] = 0.0;
      }
    }

    // Slack basis; find rows whose slack would start negative.
    std::vector<double> start(static_cast<std::size_t>(m_));
    std::vector<int> art_rows;
    for (int i = 0; i < m_; ++i) {
      double ax = 0;
      for (const auto& [j, a] : lp.rows[static_cast<std::size_t>(i)].entries)
        ax += a * val_[static_cast<std::size_t>(j)];
      start[static_cast<std::size_t>(i)] = lp.rows[static_cast<std::size_t>(i)].rhs - ax;
      if (start[static_cast<std::size_t>(i)] < -kFeasTol) art_rows.push_back(i);
    }
    n_art_ = static_cast<int>(art_rows.size());
    cols_ = n_ + m_ + n_art_;
    lower_.resize(static_cast<std::size_t>(cols_), 0.0);
    upper_.resize(static_cast<std::size_t>(cols_), kInf);
    val_.resize(static_cast<std::size_t>(cols_), 0.0);
    state_.resize(static_cast<std::size_t>(cols_), BasisStatus::Lower);

    t_.assign(static_cast<std::size_t>(m_) * cols_, 0.0);
    rhs_.assign(static_cast<std::size_t>(m_), 0.0);
    basic_.assign(static_cast<std::size_t>(m_), -1);
    xb_.assign(static_cast<std::size_t>(m_), 0.0);
    for (int i = 0; i < m_; ++i) {
      for (const auto& [j, a] : lp.rows[static_cast<std::size_t>(i)].entries)
        t_[static_cast<std::size_t>(i) * cols_ + j] = a;
      t_[static_cast<std::size_t>(i) * cols_ + (n_ + i)] = 1.0;
      rhs_[static_cast<std::size_t>(i)] = lp.rows[static_cast<std::size_t>(i)].rhs;
      basic_[static_cast<std::size_t>(i)] = n_ + i;
      state_[static_cast<std::size_t>(n_ + i)] = BasisStatus::Basic;
      xb_[static_cast<std::size_t>(i)] = start[static_cast<std::size_t>(i)];
    }
    // Artificial column k covers art_rows[k]; the row is negated so the
    // artificial enters the basis with coefficient +1 and a positive value.
    for (int k = 0; k < n_art_; ++k) {
      const int i = art_rows[static_cast<std::size_t>(k)];
      const int aj = n_ + m_ + k;
      double* row = &t_[static_cast<std::size_t>(i) * cols_];
      for (int j = 0; j < cols_; ++j) row[j] = -row[j];
      row[aj] = 1.0;
      rhs_[static_cast<std::size_t>(i)] = -rhs_[static_cast<std::size_t>(i)];
      state_[static_cast<std::size_t>(n_ + i)] = BasisStatus::Lower;
      val_[static_cast<std::size_t>(n_ + i)] = 0.0;
      basic_[static_cast<std::size_t>(i)] = aj;
      state_[static_cast<std::size_t>(aj)] = BasisStatus::Basic;
      xb_[static_cast<std::size_t>(i)] = -start[static_cast<std::size_t>(i)];
    }
  }

  SimplexStatus run(const std::vector<double>& struct_costs) {
    if (n_art_ > 0) {
      std::vector<double> phase1(static_cast<std::size_t>(cols_), 0.0);
      for (int j = n_ + m_; j < cols_; ++j) phase1[static_cast<std::size_t>(j)] = 1.0;
      const SimplexStatus s1 = iterate(phase1);
      if (s1 == SimplexStatus::IterationLimit) return s1;
      if (s1 == SimplexStatus::Unbounded)
        throw SolverError("simplex: phase-1 objective unbounded (numerical breakdown)");
      double infeas = 0;
      for (int i = 0; i < m_; ++i)
        if (basic_[static_cast<std::size_t>(i)] >= n_ + m_)
          infeas += std::max(xb_[static_cast<std::size_t>(i)], 0.0);
      if (infeas > kFeasTol) return SimplexStatus::Infeasible;
      for (int j = n_ + m_; j < cols_; ++j) upper_[static_cast<std::size_t>(j)] = 0.0;  // pin
      drive_out_artificials();
    }
    std::vector<double> costs(static_cast<std::size_t>(cols_), 0.0);
    for (int j = 0; j < n_; ++j) costs[static_cast<std::size_t>(j)] = struct_costs[static_cast<std::size_t>(j)];
    return iterate(costs);
  }

  long iterations() const { return iters_; }
  int n_struct() const { return n_; }
  int n_slack() const { return m_; }
  int cols() const { return cols_; }
  int basic_of_row(int i) const { return basic_[static_cast<std::size_t>(i)]; }
  BasisStatus col_state(int j) const { return state_[static_cast<std::size_t>(j)]; }
  const std::vector<double>& reduced() const { return d_; }

  double value_of(int j) const {
    if (state_[static_cast<std::size_t>(j)] != BasisStatus::Basic) return val_[static_cast<std::size_t>(j)];
    for (int i = 0; i < m_; ++i)
      if (basic_[static_cast<std::size_t>(i)] == j) return xb_[static_cast<std::size_t>(i)];
    return 0.0;
  }

  std::shared_ptr<TableauData> snapshot() {
    auto td = std::make_shared<TableauData>();
    td->rows = m_;
    td->cols = cols_;
    td->n_struct = n_;
    td->n_slack = m_;
    td->t = t_;
    td->rhs = rhs_;
    td->basic = basic_;
    td->state = state_;
    td->val = val_;
    for (int i = 0; i < m_; ++i)
      td->val[static_cast<std::size_t>(basic_[static_cast<std::size_t>(i)])] =
          xb_[static_cast<std::size_t>(i)];
    td->lower = lower_;
    td->upper = upper_;
    return td;
  }

 private:
  void refresh_basics() {
    for (int i = 0; i < m_; ++i) {
      double v = rhs_[static_cast<std::size_t>(i)];
      const double* row = &t_[static_cast<std::size_t>(i) * cols_];
      for (int j = 0; j < cols_; ++j) {
        if (state_[static_cast<std::size_t>(j)] == BasisStatus::Basic) continue;
        const double xv = val_[static_cast<std::size_t>(j)];
        if (xv != 0.0) v -= row[j] * xv;
      }
      xb_[static_cast<std::size_t>(i)] = v;
    }
  }

  void refresh_reduced(const std::vector<double>& costs) {
    d_ = costs;
    for (int i = 0; i < m_; ++i) {
      const double cb = costs[static_cast<std::size_t>(basic_[static_cast<std::size_t>(i)])];
      if (cb == 0.0) continue;
      const double* row = &t_[static_cast<std::size_t>(i) * cols_];
      for (int j = 0; j < cols_; ++j) d_[static_cast<std::size_t>(j)] -= cb * row[j];
    }
    for (int i = 0; i < m_; ++i) d_[static_cast<std::size_t>(basic_[static_cast<std::size_t>(i)])] = 0.0;
  }

  bool fixed(int j) const {
    return lower_[static_cast<std::size_t>(j)] == upper_[static_cast<std::size_t>(j)];
  }

  // entering column and direction (+1 from lower/free, -1 from upper/free)
  std::pair<int, int> price(bool bland) const {
    int best = -1, dir = 0;
    double best_score = kOptTol;
    for (int j = 0; j < cols_; ++j) {
      const BasisStatus st = state_[static_cast<std::size_t>(j)];
      if (st == BasisStatus::Basic || fixed(j)) continue;
      const double dj = d_[static_cast<std::size_t>(j)];
      int cand_dir = 0;
      if ((st == BasisStatus::Lower || st == BasisStatus::Zero) && dj < -kOptTol) cand_dir = +1;
      else if ((st == BasisStatus::Upper || st == BasisStatus::Zero) && dj > kOptTol) cand_dir = -1;
      if (cand_dir == 0) continue;
      if (bland) return {j, cand_dir};
      if (std::fabs(dj) > best_score) {
        best_score = std::fabs(dj);
        best = j;
        dir = cand_dir;
      }
    }
    return {best, dir};
  }

  SimplexStatus iterate(const std::vector<double>& costs) {
    refresh_reduced(costs);
    long degen_streak = 0;
    const long bland_after = 3L * (cols_ + 10);
    for (;;) {
      if (iters_ >= max_iters_) return SimplexStatus::IterationLimit;
      const bool bland = degen_streak > bland_after;
      auto [q, dir] = price(bland);
      if (q < 0) {
        // recheck against freshly computed reduced costs before declaring done
        refresh_reduced(costs);
        refresh_basics();
        auto [q2, dir2] = price(bland);
        if (q2 < 0) return SimplexStatus::Optimal;
        q = q2;
        dir = dir2;
      }

      // ratio test, pass 1: blocking step length per row
      const double sigma = dir;
      std::vector<double> ratio(static_cast<std::size_t>(m_), kInf);
      double row_min = kInf;
      for (int i = 0; i < m_; ++i) {
        const double g = t_[static_cast<std::size_t>(i) * cols_ + q];
        if (std::fabs(g) <= kPivTol) continue;
        const double delta = -sigma * g;  // rate of change of xb_[i]
        const int bj = basic_[static_cast<std::size_t>(i)];
        double t = kInf;
        if (delta < 0) {
          const double lo = lower_[static_cast<std::size_t>(bj)];
          if (std::isfinite(lo)) t = (xb_[static_cast<std::size_t>(i)] - lo) / (-delta);
        } else {
          const double up = upper_[static_cast<std::size_t>(bj)];
          if (std::isfinite(up)) t = (up - xb_[static_cast<std::size_t>(i)]) / delta;
        }
        if (!std::isfinite(t)) continue;
        t = std::max(t, 0.0);
        ratio[static_cast<std::size_t>(i)] = t;
        row_min = std::min(row_min, t);
      }
      const double range = upper_[static_cast<std::size_t>(q)] - lower_[static_cast<std::size_t>(q)];
      const double flip_t = std::isfinite(range) ? range : kInf;

      if (!std::isfinite(row_min) && !std::isfinite(flip_t)) return SimplexStatus::Unbounded;
      ++iters_;

      if (flip_t <= row_min) {
        // bound flip: q runs to its opposite bound, basis unchanged
        degen_streak = (flip_t <= kDegenTol) ? degen_streak + 1 : 0;
        for (int i = 0; i < m_; ++i) {
          const double g = t_[static_cast<std::size_t>(i) * cols_ + q];
          if (g != 0.0) xb_[static_cast<std::size_t>(i)] -= sigma * g * flip_t;
        }
        state_[static_cast<std::size_t>(q)] =
            (dir > 0) ? BasisStatus::Upper : BasisStatus::Lower;
        val_[static_cast<std::size_t>(q)] =
            (dir > 0) ? upper_[static_cast<std::size_t>(q)] : lower_[static_cast<std::size_t>(q)];
      } else {
        // pass 2: among near-minimal blockers pick Bland's smallest basic
        // index, otherwise the largest pivot magnitude (row index breaks ties)
        int best_row = -1;
        double best_pivmag = -1.0;
        for (int i = 0; i < m_; ++i) {
          if (ratio[static_cast<std::size_t>(i)] > row_min + kDegenTol) continue;
          if (bland) {
            if (best_row < 0 || basic_[static_cast<std::size_t>(i)] <
                                    basic_[static_cast<std::size_t>(best_row)])
              best_row = i;
          } else {
            const double mag = std::fabs(t_[static_cast<std::size_t>(i) * cols_ + q]);
            if (mag > best_pivmag) {
              best_pivmag = mag;
              best_row = i;
            }
          }
        }
        degen_streak = (ratio[static_cast<std::size_t>(best_row)] <= kDegenTol)
                           ? degen_streak + 1
                           : 0;
        pivot(best_row, q, sigma, ratio[static_cast<std::size_t>(best_row)]);
      }

      if ((iters_ & 0xff) == 0) {
        refresh_reduced(costs);
        refresh_basics();
      }
    }
  }

  void pivot(int r, int q, double sigma, double t) {
    const double piv = t_[static_cast<std::size_t>(r) * cols_ + q];
    if (std::fabs(piv) < kPivTol) throw SolverError("simplex: pivot element below threshold");

    const double enter_val = val_[static_cast<std::size_t>(q)] + sigma * t;
    for (int i = 0; i < m_; ++i) {
      if (i == r) continue;
      const double g = t_[static_cast<std::size_t>(i) * cols_ + q];
      if (g != 0.0) xb_[static_cast<std::size_t>(i)] -= sigma * g * t;
    }

    const int leave = basic_[static_cast<std::size_t>(r)];
    const double dgr = -sigma * t_[static_cast<std::size_t>(r) * cols_ + q];
    if (dgr < 0) {
      state_[static_cast<std::size_t>(leave)] = BasisStatus::Lower;
      val_[static_cast<std::size_t>(leave)] = lower_[static_cast<std::size_t>(leave)];
    } else {
      state_[static_cast<std::size_t>(leave)] = BasisStatus::Upper;
      val_[static_cast<std::size_t>(leave)] = upper_[static_cast<std::size_t>(leave)];
    }

    double* prow = &t_[static_cast<std::size_t>(r) * cols_];
    const double inv = 1.0 / piv;
    for (int j = 0; j < cols_; ++j) prow[j] *= inv;
    rhs_[static_cast<std::size_t>(r)] *= inv;
    for (int i = 0; i < m_; ++i) {
      if (i == r) continue;
      double* row = &t_[static_cast<std::size_t>(i) * cols_];
      const double f = row[q];
      if (f == 0.0) continue;
      for (int j = 0; j < cols_; ++j) row[j] -= f * prow[j];
      row[q] = 0.0;
      rhs_[static_cast<std::size_t>(i)] -= f * rhs_[static_cast<std::size_t>(r)];
    }

    const double dq = d_[static_cast<std::size_t>(q)];
    if (dq != 0.0) {
      for (int j = 0; j < cols_; ++j) d_[static_cast<std::size_t>(j)] -= dq * prow[j];
    }
    d_[static_cast<std::size_t>(q)] = 0.0;

    basic_[static_cast<std::size_t>(r)] = q;
    state_[static_cast<std::size_t>(q)] = BasisStatus::Basic;
    xb_[static_cast<std::size_t>(r)] = enter_val;
  }

  // Pivot zero-valued artificials out of the basis where possible; rows where
  // no real pivot exists are redundant and keep a pinned artificial.
  void drive_out_artificials() {
    for (int i = 0; i < m_; ++i) {
      if (basic_[static_cast<std::size_t>(i)] < n_ + m_) continue;
      const double* row = &t_[static_cast<std::size_t>(i) * cols_];
      int q = -1;
      double mag = kPivTol;
      for (int j = 0; j < n_ + m_; ++j) {
        if (state_[static_cast<std::size_t>(j)] == BasisStatus::Basic || fixed(j)) continue;
        if (std::fabs(row[j]) > mag) {
          mag = std::fabs(row[j]);
          q = j;
        }
      }
      if (q >= 0) pivot(i, q, +1, 0.0);
    }
  }

  int n_ = 0, m_ = 0, cols_ = 0, n_art_ = 0;
  long max_iters_ = 0;
  long iters_ = 0;
  std::vector<double> t_, rhs_, xb_, val_, lower_, upper_, d_;
  std::vector<int> basic_;
  std::vector<BasisStatus> state_;
};

}  // namespace simplex_detail

/// Solves the LP with a bounded-variable primal simplex (two-phase, dense
/// tableau, Dantzig pricing with Bland fallback after a degenerate streak).
inline SimplexSolution solve_lp(const LpProblem& lp, long max_iterations = 1000000) {
  for (int j = 0; j < lp.num_vars; ++j) {
    if (lp.var_lower[static_cast<std::size_t>(j)] > lp.var_upper[static_cast<std::size_t>(j)]) {
      SimplexSolution crossed;
      crossed.status = SimplexStatus::Infeasible;
      crossed.problem = std::make_shared<LpProblem>(lp);
      return crossed;
    }
  }

  simplex_detail::Tableau tab(lp, max_iterations);
  const SimplexStatus status = tab.run(lp.objective);

  SimplexSolution sol;
  sol.status = status;
  sol.pivot_count = tab.iterations();
  sol.problem = std::make_shared<LpProblem>(lp);
  if (status != SimplexStatus::Optimal) return sol;

  const int n = lp.num_vars;
  const int m = lp.num_cons();
  sol.x.resize(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) sol.x[static_cast<std::size_t>(j)] = tab.value_of(j);
  sol.objective = 0;
  for (int j = 0; j < n; ++j)
    sol.objective += lp.objective[static_cast<std::size_t>(j)] * sol.x[static_cast<std::size_t>(j)];

  sol.reduced_costs.resize(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) sol.reduced_costs[static_cast<std::size_t>(j)] = tab.reduced()[static_cast<std::size_t>(j)];
  sol.duals.resize(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i)
    sol.duals[static_cast<std::size_t>(i)] = -tab.reduced()[static_cast<std::size_t>(n + i)];

  auto to_status = [](BasisStatus s) { return s; };
  sol.col_status.resize(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) sol.col_status[static_cast<std::size_t>(j)] = to_status(tab.col_state(j));
  sol.row_status.resize(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) sol.row_status[static_cast<std::size_t>(i)] = to_status(tab.col_state(n + i));

  sol.tableau = tab.snapshot();
  return sol;
}

/// Row of the final tableau for a basic variable, as x_B = rhs - sum coef*x_N.
inline TableauRow tableau_row(const SimplexSolution& sol, int basic_var) {
  if (sol.status != SimplexStatus::Optimal) throw SolverError("tableau_row: solution not optimal");
  const TableauData& td = *sol.tableau;
  int r = -1;
  for (int i = 0; i < td.rows; ++i)
    if (td.basic[static_cast<std::size_t>(i)] == basic_var) { r = i; break; }
  if (r < 0) throw SolverError("tableau_row: variable is not basic");

  TableauRow out;
  out.rhs = td.rhs[static_cast<std::size_t>(r)];
  for (int j = 0; j < td.cols; ++j) {
    if (td.state[static_cast<std::size_t>(j)] == BasisStatus::Basic) continue;
    const double v = td.at(r, j);
    if (v != 0.0) out.coefs.emplace_back(j, v);
  }
  return out;
}

}  // namespace cutsel
