#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "cutsel/branch_cut.hpp"
#include "cutsel/generators.hpp"
#include "oracles.hpp"

using namespace cutsel;

namespace {

struct NoCutsSel final : CutSelector {
  std::string id() const override { return "nocuts"; }
  std::vector<std::uint64_t> select(const MilpInstance&, const SimplexSolution&, const CutPool&,
                                    Rng&) override {
    return {};
  }
};

// replays a fixed id order, restricted to ids present in the pool
struct FixedSel final : CutSelector {
  std::vector<std::uint64_t> ids;
  explicit FixedSel(std::vector<std::uint64_t> v) : ids(std::move(v)) {}
  std::string id() const override { return "fixed"; }
  std::vector<std::uint64_t> select(const MilpInstance&, const SimplexSolution&,
                                    const CutPool& pool, Rng&) override {
    std::vector<std::uint64_t> out;
    for (auto i : ids)
      if (pool.find(i)) out.push_back(i);
    return out;
  }
};

// selects the whole pool in presentation order
struct AllSel final : CutSelector {
  std::string id() const override { return "all"; }
  std::vector<std::uint64_t> select(const MilpInstance&, const SimplexSolution&,
                                    const CutPool& pool, Rng&) override {
    std::vector<std::uint64_t> out;
    for (const auto& c : pool.cuts()) out.push_back(c.id);
    return out;
  }
};

SolveTrace synthetic_trace(std::vector<TraceEvent> events, double cap) {
  SolveTrace t;
  t.instance_id = "synthetic";
  t.selector_id = "none";
  t.gap_cap = cap;
  t.events = std::move(events);
  t.total_work = t.events.empty() ? 0 : t.events.back().work;
  return t;
}

}  // namespace

TEST_CASE("pd integral: constant gap over the horizon") {
  // single event at work 0 with gap g = 3 (primal 5, dual 2)
  const auto t = synthetic_trace({{0, 5.0, 2.0}}, 5.0);
  CHECK_THAT(pd_integral(t, 1000), Catch::Matchers::WithinAbs(3.0 * 1000, 1e-12));
}

TEST_CASE("pd integral: gap closed at work w") {
  const auto t = synthetic_trace({{0, 5.0, 2.0}, {40, 5.0, 5.0}}, 5.0);
  CHECK_THAT(pd_integral(t, 1000), Catch::Matchers::WithinAbs(3.0 * 40, 1e-12));
}

TEST_CASE("pd integral: three-event hand sum") {
  const auto t =
      synthetic_trace({{10, 8.0, 2.0}, {30, 4.0, 3.0}, {50, 4.0, 4.0}}, 8.0);
  // [0,10): cap 8 vs dual 2 = 6; [10,30): 8-2=6; [30,50): 4-3=1; [50,100]: 0
  const double expect = 6.0 * 10 + 6.0 * 20 + 1.0 * 20 + 0.0 * 50;
  CHECK_THAT(pd_integral(t, 100), Catch::Matchers::WithinAbs(expect, 1e-12));
}

TEST_CASE("reward normalizes and negates") {
  SolveTrace a = synthetic_trace({{0, 3.0, 2.9}}, 3.0);   // gap 0.1 * 1000 = 100
  SolveTrace b = synthetic_trace({{0, 3.0, 2.95}}, 3.0);  // gap 0.05 * 1000 = 50
  CHECK_THAT(reward(a, 1000), Catch::Matchers::WithinAbs(-0.1, 1e-12));
  CHECK_THAT(reward(b, 1000), Catch::Matchers::WithinAbs(-0.05, 1e-12));
}

TEST_CASE("malformed traces are rejected") {
  auto t = synthetic_trace({{10, 5.0, 2.0}, {5, 5.0, 3.0}}, 5.0);
  CHECK_THROWS_AS(pd_integral(t, 100), SolverError);
  t = synthetic_trace({{0, 5.0, 2.0}, {5, 5.0, 1.0}}, 5.0);
  CHECK_THROWS_AS(pd_integral(t, 100), SolverError);
  t = synthetic_trace({{0, 5.0, 2.0}, {5, 6.0, 2.0}}, 5.0);
  CHECK_THROWS_AS(pd_integral(t, 100), SolverError);
  t = synthetic_trace({{0, 5.0, 2.0}}, 5.0);
  CHECK_THROWS_AS(pd_integral(t, -1), SolverError);
}

TEST_CASE("solve reaches the enumeration optimum on small knapsacks") {
  NoCutsSel nocuts;
  AllSel all;
  SolveLimits limits;
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    const auto inst = generate(InstanceKind::Knapsack, seed, 10, 4);
    const auto expect = oracles::integer_enum_min(inst);
    REQUIRE(expect.has_value());
    for (CutSelector* sel : {static_cast<CutSelector*>(&nocuts), static_cast<CutSelector*>(&all)}) {
      const auto trace = solve(inst, *sel, limits, 1);
      REQUIRE(trace.final_status == SolveStatus::Optimal);
      REQUIRE_FALSE(trace.events.empty());
      const auto& last = trace.events.back();
      REQUIRE(last.primal.has_value());
      CHECK_THAT(*last.primal, Catch::Matchers::WithinAbs(*expect, 1e-6));
      CHECK_THAT(last.dual, Catch::Matchers::WithinAbs(*expect, 1e-6));
    }
  }
}

TEST_CASE("trace invariants hold along real solves") {
  AllSel all;
  SolveLimits limits;
  for (auto kind : {InstanceKind::Knapsack, InstanceKind::SetCover, InstanceKind::Packing}) {
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
      const auto inst = generate(kind, seed, 12, 6);
      const auto trace = solve(inst, all, limits, 1);
      check_trace(trace);  // throws on violation
      long w = 0;
      double dual = -kInf;
      for (const auto& e : trace.events) {
        CHECK(e.work >= w);
        CHECK(e.dual >= dual - 1e-9);
        if (e.primal) CHECK(*e.primal >= e.dual - 1e-6);
        w = e.work;
        dual = e.dual;
      }
      CHECK(trace.pd_integral >= 0.0);
    }
  }
}

TEST_CASE("integral root: no cut round, optimal at the root") {
  MilpInstance inst;
  inst.name = "integral_root";
  inst.num_vars = 2;
  inst.objective = {-1.0, -1.0};
  inst.var_lower = {0.0, 0.0};
  inst.var_upper = {1.0, 1.0};
  inst.integer_set = {0, 1};
  SparseRow row;
  row.entries = {{0, 1.0}, {1, 1.0}};
  row.rhs = 2.0;
  inst.rows.push_back(row);

  NoCutsSel nocuts;
  const auto trace = solve(inst, nocuts, SolveLimits{}, 1);
  REQUIRE(trace.final_status == SolveStatus::Optimal);
  CHECK(trace.selected_cuts.empty());
  // gap closes at the first event; all pd mass sits before it
  const double expect =
      std::max(0.0, trace.gap_cap - trace.events.front().dual) *
      static_cast<double>(trace.events.front().work);
  CHECK_THAT(trace.pd_integral, Catch::Matchers::WithinAbs(expect, 1e-9));
}

TEST_CASE("adding a valid cut never lowers the root dual bound") {
  NoCutsSel nocuts;
  AllSel all;
  SolveLimits limits;
  for (std::uint64_t seed = 1; seed <= 15; ++seed) {
    const auto inst = generate(InstanceKind::Knapsack, seed, 10, 4);
    const auto t0 = solve(inst, nocuts, limits, 1);
    const auto t1 = solve(inst, all, limits, 1);
    REQUIRE_FALSE(t0.events.empty());
    REQUIRE_FALSE(t1.events.empty());
    const double root_dual = t0.events.front().dual;
    double post_cut_dual = t1.events.front().dual;
    if (t1.events.size() > 1) post_cut_dual = t1.events[1].dual;
    CHECK(post_cut_dual >= root_dual - 1e-9);
  }
}

TEST_CASE("same inputs give bit-identical traces") {
  AllSel all;
  SolveLimits limits;
  const auto inst = generate(InstanceKind::Knapsack, 6, 14, 6);
  const auto a = solve(inst, all, limits, 42);
  const auto b = solve(inst, all, limits, 42);
  std::ostringstream sa, sb;
  write_trace(a, sa);
  write_trace(b, sb);
  CHECK(sa.str() == sb.str());
}

TEST_CASE("budget respect: work stays within one LP of the cap") {
  AllSel all;
  SolveLimits limits;
  limits.max_pivots = 60;  // deliberately tiny
  const auto inst = generate(InstanceKind::Knapsack, 8, 20, 8);
  const auto trace = solve(inst, all, limits, 1);
  CHECK(trace.final_status == SolveStatus::BudgetExhausted);
  const long overshoot = 3L * inst.num_vars + inst.num_cons();
  CHECK(trace.total_work <= limits.max_pivots + overshoot);
}

TEST_CASE("node budget is respected") {
  NoCutsSel nocuts;
  SolveLimits limits;
  limits.max_nodes = 3;
  const auto inst = generate(InstanceKind::Knapsack, 8, 20, 8);
  const auto trace = solve(inst, nocuts, limits, 1);
  CHECK(trace.final_status == SolveStatus::BudgetExhausted);
}

TEST_CASE("selector returning an unknown id is an error") {
  struct BadSel final : CutSelector {
    std::string id() const override { return "bad"; }
    std::vector<std::uint64_t> select(const MilpInstance&, const SimplexSolution&, const CutPool&,
                                      Rng&) override {
      return {0xdeadbeefull};
    }
  } bad;
  const auto inst = generate(InstanceKind::Knapsack, 3, 10, 4);
  CHECK_THROWS_AS(solve(inst, bad, SolveLimits{}, 1), SolverError);
}

TEST_CASE("cut order changes total work on some corpus instance") {
  // regression guard: the engine must not silently canonicalize row order.
  // knapsack seed 45 (n=11, m=6) diverges under the third shuffle; the
  // deterministic search keeps the guard robust to pivot-rule adjustments.
  SolveLimits limits;
  bool found = false;
  for (std::uint64_t seed = 1; seed <= 120 && !found; ++seed) {
    const int n = static_cast<int>(10 + seed % 11);
    const int m = static_cast<int>(3 + seed % 6);
    const auto inst = generate(InstanceKind::Knapsack, seed, n, m);
    const auto root = solve_lp(relax(inst));
    if (root.status != SimplexStatus::Optimal) continue;
    const auto pool = gomory_cuts(root, inst, inst.num_vars);
    if (pool.size() < 2) continue;
    std::vector<std::uint64_t> ids;
    for (const auto& c : pool.cuts()) ids.push_back(c.id);
    FixedSel fwd(ids);
    const long base = solve(inst, fwd, limits, 1).total_work;
    for (int p = 0; p < 4 && !found; ++p) {
      auto perm = ids;
      Rng shuffle_rng(100 + static_cast<std::uint64_t>(p));
      shuffle_rng.shuffle(perm);
      if (perm == ids) continue;
      FixedSel sel(perm);
      found = solve(inst, sel, limits, 1).total_work != base;
    }
  }
  CHECK(found);
}

TEST_CASE("trace round-trips through the text format") {
  AllSel all;
  const auto inst = generate(InstanceKind::Knapsack, 11, 12, 5);
  const auto trace = solve(inst, all, SolveLimits{}, 7);
  std::ostringstream out;
  write_trace(trace, out);
  std::istringstream in(out.str());
  const auto back = read_trace(in);
  std::ostringstream out2;
  write_trace(back, out2);
  CHECK(out.str() == out2.str());
}
