#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cutsel/common.hpp"
#include "cutsel/instance.hpp"
#include "cutsel/simplex.hpp"

namespace cutsel {

enum class CutOrigin { Gomory, Injected };

/// Linear inequality alpha'x <= beta, valid for every integer-feasible point
/// of its source instance and violated by the generating LP optimum.
struct Cut {
  std::uint64_t id = 0;  // content hash of (coefficients, rhs) at 1e-12 grid
  std::vector<std::pair<int, double>> alpha;  // column-sorted nonzeros
  double beta = 0.0;
  CutOrigin origin = CutOrigin::Gomory;

  double activity(const std::vector<double>& x) const {
    double s = 0;
    for (const auto& [j, a] : alpha) s += a * x[static_cast<std::size_t>(j)];
    return s;
  }
  double norm() const {
    double s = 0;
    for (const auto& [j, a] : alpha) s += a * a;
    return std::sqrt(s);
  }
};

inline std::uint64_t cut_content_id(const std::vector<std::pair<int, double>>& alpha, double beta) {
  auto grid = [](double v) { return std::nearbyint(v * 1e12) / 1e12; };
  Fnv1a h;
  for (const auto& [j, a] : alpha) {
    h.add(static_cast<std::uint64_t>(j));
    h.add_double(grid(a));
  }
  h.add_double(grid(beta));
  return h.h;
}

inline Cut make_cut(std::vector<std::pair<int, double>> alpha, double beta,
                    CutOrigin origin = CutOrigin::Injected) {
  std::sort(alpha.begin(), alpha.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  Cut c;
  c.alpha = std::move(alpha);
  c.beta = beta;
  c.origin = origin;
  c.id = cut_content_id(c.alpha, c.beta);
  return c;
}

/// Candidate cuts in the solver's default order (basis-row order at the root).
class CutPool {
 public:
  void push(Cut c) { cuts_.push_back(std::move(c)); }
  bool empty() const { return cuts_.empty(); }
  int size() const { return static_cast<int>(cuts_.size()); }
  const Cut& operator[](int k) const { return cuts_[static_cast<std::size_t>(k)]; }
  const std::vector<Cut>& cuts() const { return cuts_; }

  const Cut* find(std::uint64_t id) const {
    for (const auto& c : cuts_)
      if (c.id == id) return &c;
    return nullptr;
  }
  void permute(const std::vector<int>& perm) {
    std::vector<Cut> next;
    next.reserve(cuts_.size());
    for (int k : perm) next.push_back(cuts_[static_cast<std::size_t>(k)]);
    cuts_ = std::move(next);
  }

 private:
  std::vector<Cut> cuts_;
};

namespace cut_detail {

constexpr double kIntTol = 1e-9;
constexpr double kDropTol = 1e-11;
constexpr double kFracTol = 1e-6;

inline bool near_integer(double v) { return fractionality(v) <= kIntTol; }

// fractional part snapped so float noise around integers reads as exact
inline double snapped_frac(double v) {
  const double f = frac_part(v);
  if (f <= kIntTol || f >= 1.0 - kIntTol) return 0.0;
  return f;
}

// slack of row i takes integer values at every integer-feasible point iff the
// row has integral data and support only on integer variables
inline bool slack_is_integral(const MilpInstance& inst, const SparseRow& row) {
  if (!near_integer(row.rhs)) return false;
  for (const auto& [j, a] : row.entries) {
    if (!near_integer(a)) return false;
    if (!inst.is_integer(j)) return false;
  }
  return true;
}

}  // namespace cut_detail

/// Derives one Gomory cut from the tableau row of fractional basic integer
/// variable `basic_var`, re-expressed over the original variables in
/// canonical `alpha'x <= beta` form. Returns false when the derivation
/// degenerates (no usable fractional mass in the row).
inline bool derive_gomory_cut(const SimplexSolution& sol, const MilpInstance& inst,
                              int basic_var, Cut& out) {
  using namespace cut_detail;
  const TableauData& td = *sol.tableau;
  const LpProblem& lp = *sol.problem;
  const int n = td.n_struct;

  int r = -1;
  for (int i = 0; i < td.rows; ++i)
    if (td.basic[static_cast<std::size_t>(i)] == basic_var) { r = i; break; }
  if (r < 0) return false;

  const double bval = td.val[static_cast<std::size_t>(basic_var)];
  const double f0 = frac_part(bval);
  if (f0 <= kFracTol || f0 >= 1.0 - kFracTol) return false;

  // Walk the row over real nonbasic columns; complement every variable to
  // measure from zero, classify it integer or continuous, and apply the
  // mixed-integer fractional rule. gamma is the cut coefficient on the
  // complemented variable.
  struct Term {
    int col;          // extended column index
    double gamma;
    bool from_upper;  // complemented as bound - x
  };
  std::vector<Term> terms;
  for (int j = 0; j < n + td.n_slack; ++j) {
    const BasisStatus st = td.state[static_cast<std::size_t>(j)];
    if (st == BasisStatus::Basic) continue;
    const double a = td.at(r, j);
    if (std::fabs(a) <= kDropTol) continue;
    if (st == BasisStatus::Zero) return false;  // free nonbasic: no valid complement

    const bool at_upper = (st == BasisStatus::Upper);
    // complementing x = u - x^ flips the row coefficient
    const double ac = at_upper ? -a : a;

    bool integral;
    if (j < n) {
      const double bound = at_upper ? lp.var_upper[static_cast<std::size_t>(j)]
                                    : lp.var_lower[static_cast<std::size_t>(j)];
      integral = inst.is_integer(j) && near_integer(bound);
    } else {
      const int row_idx = j - n;
      integral = row_idx < static_cast<int>(inst.rows.size()) &&
                 slack_is_integral(inst, inst.rows[static_cast<std::size_t>(row_idx)]);
    }

    double gamma;
    if (integral) {
      const double fj = snapped_frac(ac);
      gamma = (fj <= f0) ? fj : f0 * (1.0 - fj) / (1.0 - f0);
    } else {
      gamma = (ac > 0) ? ac : -f0 * ac / (1.0 - f0);
    }
    if (std::fabs(gamma) <= kDropTol) continue;
    terms.push_back({j, gamma, at_upper});
  }

  double max_gamma = 0;
  for (const auto& t : terms) max_gamma = std::max(max_gamma, std::fabs(t.gamma));
  if (max_gamma <= 1e-9) return false;  // all-integral row, nothing to cut with

  // Un-complement: sum gamma_j xhat_j >= f0 becomes pi'x >= pi0 over x.
  std::vector<double> pi(static_cast<std::size_t>(n), 0.0);
  double pi0 = f0;
  for (const auto& t : terms) {
    if (t.col < n) {
      if (t.from_upper) {
        pi[static_cast<std::size_t>(t.col)] -= t.gamma;
        pi0 -= t.gamma * lp.var_upper[static_cast<std::size_t>(t.col)];
      } else {
        pi[static_cast<std::size_t>(t.col)] += t.gamma;
        pi0 += t.gamma * lp.var_lower[static_cast<std::size_t>(t.col)];
      }
    } else {
      // slack s_i = b_i - A_i x, never complemented from above
      const SparseRow& row = lp.rows[static_cast<std::size_t>(t.col - n)];
      for (const auto& [k, a] : row.entries) pi[static_cast<std::size_t>(k)] -= t.gamma * a;
      pi0 -= t.gamma * row.rhs;
    }
  }

  // canonical <= orientation; drop dust with a conservative rhs relaxation
  std::vector<std::pair<int, double>> alpha;
  double beta = -pi0;
  for (int j = 0; j < n; ++j) {
    const double aj = -pi[static_cast<std::size_t>(j)];
    if (aj == 0.0) continue;
    if (std::fabs(aj) <= kDropTol) {
      const double reach = std::max(std::fabs(lp.var_lower[static_cast<std::size_t>(j)]),
                                    std::fabs(lp.var_upper[static_cast<std::size_t>(j)]));
      if (std::isfinite(reach)) {
        beta += std::fabs(aj) * reach;
        continue;
      }
    }
    alpha.emplace_back(j, aj);
  }
  if (alpha.empty()) return false;

  out = make_cut(std::move(alpha), beta, CutOrigin::Gomory);
  return true;
}

/// One cut per fractional basic integer variable, in basis-row order; when
/// more than max_cuts qualify the most fractional ones are kept.
inline CutPool gomory_cuts(const SimplexSolution& sol, const MilpInstance& inst, int max_cuts) {
  if (sol.status != SimplexStatus::Optimal)
    throw SolverError("gomory_cuts: solution not optimal");
  const TableauData& td = *sol.tableau;

  struct Candidate {
    int row;
    double frac;
    Cut cut;
  };
  std::vector<Candidate> cands;
  for (int i = 0; i < td.rows; ++i) {
    const int bj = td.basic[static_cast<std::size_t>(i)];
    if (bj >= td.n_struct || !inst.is_integer(bj)) continue;
    const double v = td.val[static_cast<std::size_t>(bj)];
    if (fractionality(v) <= cut_detail::kFracTol) continue;
    Cut c;
    if (!derive_gomory_cut(sol, inst, bj, c)) continue;
    cands.push_back({i, fractionality(v), std::move(c)});
  }

  // drop duplicates (identical content), keep the earliest row
  {
    std::vector<Candidate> uniq;
    for (auto& c : cands) {
      bool seen = false;
      for (const auto& u : uniq) seen = seen || u.cut.id == c.cut.id;
      if (!seen) uniq.push_back(std::move(c));
    }
    cands = std::move(uniq);
  }

  if (max_cuts >= 0 && static_cast<int>(cands.size()) > max_cuts) {
    std::vector<int> order(cands.size());
    for (std::size_t k = 0; k < cands.size(); ++k) order[k] = static_cast<int>(k);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      if (cands[static_cast<std::size_t>(a)].frac != cands[static_cast<std::size_t>(b)].frac)
        return cands[static_cast<std::size_t>(a)].frac > cands[static_cast<std::size_t>(b)].frac;
      return cands[static_cast<std::size_t>(a)].row < cands[static_cast<std::size_t>(b)].row;
    });
    order.resize(static_cast<std::size_t>(max_cuts));
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      return cands[static_cast<std::size_t>(a)].row < cands[static_cast<std::size_t>(b)].row;
    });
    std::vector<Candidate> kept;
    for (int k : order) kept.push_back(std::move(cands[static_cast<std::size_t>(k)]));
    cands = std::move(kept);
  }

  CutPool pool;
  for (auto& c : cands) pool.push(std::move(c.cut));
  return pool;
}

/// 13 features per cut, in the order: coefficient mean/max/min/std, objective
/// mean/max/min/std over the cut support, parallelism, efficacy, support,
/// integral support, normalized violation.
struct CutFeatures {
  static constexpr int kDim = 13;
  double v[kDim] = {};

  double parallelism() const { return v[8]; }
  double efficacy() const { return v[9]; }
  double support() const { return v[10]; }
  double integral_support() const { return v[11]; }
  double normalized_violation() const { return v[12]; }
};

inline CutFeatures features(const Cut& cut, const MilpInstance& inst, const SimplexSolution& sol) {
  if (sol.status != SimplexStatus::Optimal) throw SolverError("features: solution not optimal");
  if (cut.alpha.empty()) throw SolverError("features: cut has empty support");
  CutFeatures f;

  auto stats = [](const std::vector<double>& xs, double* out) {
    double mean = 0, mx = -kInf, mn = kInf, sq = 0;
    for (double x : xs) {
      mean += x;
      mx = std::max(mx, x);
      mn = std::min(mn, x);
    }
    mean /= static_cast<double>(xs.size());
    for (double x : xs) sq += (x - mean) * (x - mean);
    out[0] = mean;
    out[1] = mx;
    out[2] = mn;
    out[3] = std::sqrt(sq / static_cast<double>(xs.size()));
  };

  std::vector<double> coefs, objs;
  int int_support = 0;
  double dot_obj = 0;
  for (const auto& [j, a] : cut.alpha) {
    coefs.push_back(a);
    objs.push_back(inst.objective[static_cast<std::size_t>(j)]);
    dot_obj += a * inst.objective[static_cast<std::size_t>(j)];
    if (inst.is_integer(j)) ++int_support;
  }
  stats(coefs, &f.v[0]);
  stats(objs, &f.v[4]);

  const double an = cut.norm();
  const double cn = norm2(inst.objective);
  f.v[8] = (an > 0 && cn > 0) ? dot_obj / (an * cn) : 0.0;
  const double viol = cut.activity(sol.x) - cut.beta;
  f.v[9] = viol / an;
  f.v[10] = static_cast<double>(cut.alpha.size()) / inst.num_vars;
  f.v[11] = static_cast<double>(int_support) / static_cast<double>(cut.alpha.size());
  f.v[12] = std::max(0.0, viol / std::max(std::fabs(cut.beta), 1.0));
  return f;
}

inline double nv_score(const Cut& cut, const MilpInstance& inst, const SimplexSolution& sol) {
  return features(cut, inst, sol).normalized_violation();
}

inline double eff_score(const Cut& cut, const MilpInstance& inst, const SimplexSolution& sol) {
  return features(cut, inst, sol).efficacy();
}

/// Appends the cuts as rows, in order, and re-solves from scratch.
inline SimplexSolution resolve_with_rows(const SimplexSolution& sol, const std::vector<Cut>& cuts,
                                         long max_iterations = 1000000) {
  LpProblem lp = *sol.problem;
  for (const Cut& c : cuts) {
    SparseRow row;
    for (const auto& [j, a] : c.alpha) {
      if (j < 0 || j >= lp.num_vars)
        throw SolverError("resolve_with_rows: cut references unknown variable");
      row.entries.emplace_back(j, a);
    }
    row.rhs = c.beta;
    lp.rows.push_back(std::move(row));
    lp.appended_cuts.push_back(c.id);
  }
  SimplexSolution next = solve_lp(lp, max_iterations);
  if (next.status == SimplexStatus::Infeasible)
    throw SolverError("resolve_with_rows: LP infeasible after cuts (invalid cut)");
  return next;
}

}  // namespace cutsel
