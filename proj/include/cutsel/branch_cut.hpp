#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <memory>
#include <queue>
#include <string>
#include <vector>

#include "cutsel/common.hpp"
#include "cutsel/cuts.hpp"
#include "cutsel/instance.hpp"
#include "cutsel/simplex.hpp"
#include "cutsel/trace.hpp"

namespace cutsel {

/// Strategy invoked exactly once, at the root, with the candidate pool in the
/// order the engine presents it. Returns an ordered subset of cut ids.
class CutSelector {
 public:
  virtual ~CutSelector() = default;
  virtual std::string id() const = 0;
  virtual std::vector<std::uint64_t> select(const MilpInstance& inst, const SimplexSolution& root,
                                            const CutPool& pool, Rng& rng) = 0;
};

namespace engine_detail {

constexpr double kFracTol = 1e-6;
constexpr double kPruneTol = 1e-6;

inline bool point_feasible(const MilpInstance& inst, const std::vector<double>& x) {
  for (int j = 0; j < inst.num_vars; ++j) {
    if (x[static_cast<std::size_t>(j)] < inst.var_lower[static_cast<std::size_t>(j)] - 1e-9 ||
        x[static_cast<std::size_t>(j)] > inst.var_upper[static_cast<std::size_t>(j)] + 1e-9)
      return false;
  }
  for (const auto& row : inst.rows)
    if (row.dot(x) > row.rhs + 1e-9) return false;
  return true;
}

// nearest / floor / ceil roundings of the integer coordinates; best feasible
// objective wins
inline std::optional<double> greedy_round(const MilpInstance& inst, const std::vector<double>& x) {
  std::optional<double> best;
  for (int mode = 0; mode < 3; ++mode) {
    std::vector<double> y = x;
    for (int j : inst.integer_set) {
      double v = y[static_cast<std::size_t>(j)];
      if (mode == 0) v = std::floor(v + 0.5);
      if (mode == 1) v = std::floor(v);
      if (mode == 2) v = std::ceil(v);
      v = std::min(std::max(v, inst.var_lower[static_cast<std::size_t>(j)]),
                   inst.var_upper[static_cast<std::size_t>(j)]);
      y[static_cast<std::size_t>(j)] = v;
    }
    if (!point_feasible(inst, y)) continue;
    double z = 0;
    for (int j = 0; j < inst.num_vars; ++j)
      z += inst.objective[static_cast<std::size_t>(j)] * y[static_cast<std::size_t>(j)];
    if (!best || z < *best) best = z;
  }
  return best;
}

inline int most_fractional_var(const MilpInstance& inst, const std::vector<double>& x) {
  int best = -1;
  double best_frac = kFracTol;
  for (int j : inst.integer_set) {
    const double f = fractionality(x[static_cast<std::size_t>(j)]);
    if (f > best_frac) {
      best_frac = f;
      best = j;
    }
  }
  return best;
}

struct Node {
  double bound;
  long id;
  std::vector<double> lower, upper;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;  // min-heap on bound
    return a.id > b.id;
  }
};

}  // namespace engine_detail

/// Branch and bound with one cut round at the root: solve the root LP,
/// generate Gomory candidates, let the selector pick an ordered subset, append
/// and re-solve, then run best-first most-fractional branching to optimality
/// or budget. Fully deterministic for a deterministic selector.
///
/// shuffle_seed != 0 permutes the candidate pool before the selector sees it
/// (seed 0 keeps the engine's default order); used by the order-stability
/// experiments.
inline SolveTrace solve(const MilpInstance& inst, CutSelector& selector, const SolveLimits& limits,
                        std::uint64_t rng_seed, std::uint64_t shuffle_seed = 0) {
  const auto t_start = std::chrono::steady_clock::now();
  {
    const auto violations = validate(inst);
    if (!violations.empty())
      throw InvalidInstanceError("solve: invalid instance: " + violations.front().message);
  }
  if (limits.max_pivots <= 0 || limits.max_nodes <= 0)
    throw SolverError("solve: budgets must be positive");

  SolveTrace trace;
  trace.instance_id = inst.name;
  trace.selector_id = selector.id();
  trace.seed = rng_seed;

  const int overshoot = inst.num_vars + inst.num_cons() + inst.num_vars;  // one LP allowance
  long work = 0;
  auto lp_cap = [&]() { return std::max(limits.max_pivots - work, 0L) + overshoot; };

  const LpProblem root_lp = relax(inst);
  SimplexSolution root = solve_lp(root_lp, lp_cap());
  work += root.pivot_count;
  if (root.status == SimplexStatus::Infeasible || root.status == SimplexStatus::Unbounded)
    throw SolverError(std::string("solve: root LP ") + to_string(root.status));
  if (root.status == SimplexStatus::IterationLimit)
    throw SolverError("solve: root LP exceeded the pivot budget");

  double dual = root.objective;
  std::optional<double> incumbent = engine_detail::greedy_round(inst, root.x);
  trace.gap_cap = incumbent ? std::fabs(*incumbent) : dual + 10.0 * (1.0 + std::fabs(dual));

  auto emit = [&](long w, std::optional<double> primal, double d) {
    if (primal && d > *primal) d = *primal;  // numerical guard
    trace.events.push_back({w, primal, d});
  };
  emit(work, incumbent, dual);

  // one cut round
  CutPool pool = gomory_cuts(root, inst, inst.num_vars);
  if (shuffle_seed != 0 && pool.size() > 1) {
    std::vector<int> perm(static_cast<std::size_t>(pool.size()));
    for (std::size_t k = 0; k < perm.size(); ++k) perm[k] = static_cast<int>(k);
    Rng shuffle_rng(shuffle_seed);
    shuffle_rng.shuffle(perm);
    pool.permute(perm);
  }

  SimplexSolution current = root;
  if (!pool.empty()) {
    Rng rng(rng_seed);
    const std::vector<std::uint64_t> chosen = selector.select(inst, root, pool, rng);
    std::vector<Cut> cuts;
    for (auto id : chosen) {
      const Cut* c = pool.find(id);
      if (c == nullptr) throw SolverError("solve: selector returned unknown cut id");
      cuts.push_back(*c);
    }
    trace.selected_cuts = chosen;
    if (!cuts.empty()) {
      current = resolve_with_rows(root, cuts, lp_cap());
      work += current.pivot_count;
      if (current.status == SimplexStatus::IterationLimit) {
        trace.final_status = SolveStatus::BudgetExhausted;
        trace.total_work = work;
        trace.horizon = std::max(limits.max_pivots, work);
        trace.pd_integral = pd_integral(trace, trace.horizon);
        return trace;
      }
      if (current.status != SimplexStatus::Optimal)
        throw SolverError("solve: post-cut LP not optimal");
      dual = std::max(dual, current.objective);
      if (auto z = engine_detail::greedy_round(inst, current.x))
        if (!incumbent || *z < *incumbent) incumbent = z;
      emit(work, incumbent, dual);
    }
  }

  // best-first tree search on the cut-augmented relaxation
  using engine_detail::Node;
  std::priority_queue<Node, std::vector<Node>, engine_detail::NodeOrder> open;
  long next_id = 0;
  open.push({current.objective, next_id++, inst.var_lower, inst.var_upper});

  const LpProblem& cut_lp = *current.problem;
  long nodes_expanded = 0;
  bool budget_hit = false;

  while (!open.empty()) {
    if (work >= limits.max_pivots || nodes_expanded >= limits.max_nodes) {
      budget_hit = true;
      break;
    }
    Node node = open.top();
    open.pop();
    ++nodes_expanded;

    if (incumbent && node.bound >= *incumbent - engine_detail::kPruneTol) {
      // best-first order: every remaining node is at least as bad
      break;
    }
    if (node.bound > dual + 1e-12) {
      dual = node.bound;
      emit(work, incumbent, dual);
    }

    LpProblem node_lp = cut_lp;
    node_lp.var_lower = node.lower;
    node_lp.var_upper = node.upper;
    SimplexSolution sol = solve_lp(node_lp, lp_cap());
    work += sol.pivot_count;
    if (sol.status == SimplexStatus::IterationLimit) {
      budget_hit = true;
      break;
    }
    if (sol.status != SimplexStatus::Optimal) continue;  // infeasible child
    if (incumbent && sol.objective >= *incumbent - engine_detail::kPruneTol) continue;

    const int branch_var = engine_detail::most_fractional_var(inst, sol.x);
    if (branch_var < 0) {
      // integral solution: new incumbent
      if (!incumbent || sol.objective < *incumbent - 1e-12) {
        incumbent = sol.objective;
        emit(work, incumbent, dual);
      }
      continue;
    }

    const double v = sol.x[static_cast<std::size_t>(branch_var)];
    Node down{sol.objective, next_id++, node.lower, node.upper};
    down.upper[static_cast<std::size_t>(branch_var)] = std::floor(v);
    Node up{sol.objective, next_id++, node.lower, node.upper};
    up.lower[static_cast<std::size_t>(branch_var)] = std::ceil(v);
    open.push(std::move(down));
    open.push(std::move(up));
  }

  if (budget_hit) {
    trace.final_status = SolveStatus::BudgetExhausted;
  } else {
    trace.final_status = SolveStatus::Optimal;
    if (incumbent && dual < *incumbent) {
      dual = *incumbent;
      emit(work, incumbent, dual);
    }
  }
  trace.total_work = work;
  trace.horizon = std::max(limits.max_pivots, work);
  trace.pd_integral = pd_integral(trace, trace.horizon);
  trace.wall_clock_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return trace;
}

}  // namespace cutsel
