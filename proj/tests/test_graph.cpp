#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <set>
#include <sstream>

#include "cutsel/generators.hpp"
#include "cutsel/state_graph.hpp"

using namespace cutsel;
using Catch::Matchers::WithinAbs;

namespace {

// min -3x - 2y s.t. 2x + 3y <= 4, x,y binary; optimum x=1, y=2/3
MilpInstance hand_instance() {
  MilpInstance inst;
  inst.name = "hand2";
  inst.num_vars = 2;
  inst.objective = {-3.0, -2.0};
  inst.var_lower = {0.0, 0.0};
  inst.var_upper = {1.0, 1.0};
  inst.integer_set = {0, 1};
  SparseRow row;
  row.entries = {{0, 2.0}, {1, 3.0}};
  row.rhs = 4.0;
  inst.rows.push_back(row);
  return inst;
}

std::multiset<std::pair<int, int>> reversed(const std::vector<std::pair<int, int>>& edges) {
  std::multiset<std::pair<int, int>> out;
  for (const auto& [s, t] : edges) out.insert({t, s});
  return out;
}

}  // namespace

TEST_CASE("hand-built LP: variable features match manual evaluation") {
  const auto inst = hand_instance();
  const auto sol = solve_lp(relax(inst));
  REQUIRE(sol.status == SimplexStatus::Optimal);
  REQUIRE_THAT(sol.x[0], WithinAbs(1.0, 1e-9));
  REQUIRE_THAT(sol.x[1], WithinAbs(2.0 / 3.0, 1e-9));

  const auto vf = var_features(inst, sol);
  const double cn = std::sqrt(13.0);

  // var 0: nonbasic at upper bound, reduced cost -5/3
  const auto& f0 = vf[0];
  CHECK_THAT(f0[0], WithinAbs(-3.0 / cn, 1e-9));
  CHECK_THAT(f0[1], WithinAbs(1.0, 0.0));  // binary one-hot
  CHECK(f0[2] == 0.0);
  CHECK(f0[3] == 0.0);
  CHECK(f0[4] == 0.0);
  CHECK(f0[5] == 1.0);
  CHECK(f0[6] == 1.0);
  CHECK_THAT(f0[7], WithinAbs((-5.0 / 3.0) / cn, 1e-9));
  CHECK_THAT(f0[8], WithinAbs(1.0, 1e-9));
  CHECK_THAT(f0[9], WithinAbs(0.0, 1e-9));
  CHECK(f0[10] == 0.0);
  CHECK(f0[11] == 1.0);
  CHECK(f0[12] == 0.0);
  CHECK(f0[13] == 0.0);  // basestat: upper
  CHECK(f0[14] == 0.0);
  CHECK(f0[15] == 1.0);
  CHECK(f0[16] == 0.0);

  // var 1: basic with zero reduced cost, fractional 2/3
  const auto& f1 = vf[1];
  CHECK_THAT(f1[0], WithinAbs(-2.0 / cn, 1e-9));
  CHECK(f1[1] == 1.0);
  CHECK_THAT(f1[7], WithinAbs(0.0, 1e-9));
  CHECK_THAT(f1[8], WithinAbs(2.0 / 3.0, 1e-9));
  CHECK_THAT(f1[9], WithinAbs(2.0 / 3.0, 1e-9));
  CHECK(f1[10] == 0.0);
  CHECK(f1[11] == 0.0);
  CHECK(f1[14] == 1.0);  // basic
}

TEST_CASE("hand-built LP: constraint features match manual evaluation") {
  const auto inst = hand_instance();
  const auto sol = solve_lp(relax(inst));
  REQUIRE(sol.status == SimplexStatus::Optimal);
  const auto cf = con_features(inst, sol);
  REQUIRE(cf.size() == 1);
  const auto& f = cf[0];
  const double rn = std::sqrt(13.0);

  CHECK(f[0] == 0.0);                            // rank
  CHECK_THAT(f[1], WithinAbs(1.0, 0.0));          // nnz / n = 2/2
  CHECK_THAT(f[2], WithinAbs(4.0 / rn, 1e-9));    // rhs / row norm
  CHECK(f[3] == 0.0);                            // at lhs
  CHECK(f[4] == 1.0);                            // tight at rhs
  CHECK_THAT(f[5], WithinAbs((-2.0 / 3.0) / 13.0, 1e-9));  // dual over both norms
  CHECK(f[6] == 1.0);                            // slack at lower
  CHECK(f[7] == 0.0);
  CHECK(f[12] == 1.0);                           // integer columns fraction
  CHECK(f[13] == 1.0);                           // integral row
  CHECK(f[14] == 0.0);
  CHECK(f[15] == 1.0);
}

TEST_CASE("tight row reads at_rhs, slack basic otherwise") {
  auto inst = hand_instance();
  SparseRow slackrow;  // x + y <= 10, never tight
  slackrow.entries = {{0, 1.0}, {1, 1.0}};
  slackrow.rhs = 10.0;
  inst.rows.push_back(slackrow);
  const auto sol = solve_lp(relax(inst));
  REQUIRE(sol.status == SimplexStatus::Optimal);
  const auto cf = con_features(inst, sol);
  CHECK(cf[0][4] == 1.0);
  CHECK(cf[1][4] == 0.0);
  CHECK(cf[1][7] == 1.0);  // loose row's slack is basic
}

TEST_CASE("single var-con-cut triangle has one edge per relation") {
  MilpInstance inst;
  inst.name = "triangle";
  inst.num_vars = 1;
  inst.objective = {-1.0};
  inst.var_lower = {0.0};
  inst.var_upper = {1.0};
  inst.integer_set = {0};
  SparseRow row;
  row.entries = {{0, 2.0}};
  row.rhs = 1.0;  // x <= 1/2, fractional optimum 0.5
  inst.rows.push_back(row);
  const auto sol = solve_lp(relax(inst));
  REQUIRE(sol.status == SimplexStatus::Optimal);

  CutPool pool;
  pool.push(make_cut({{0, 1.0}}, 0.0));  // x <= 0
  const auto g = build_graph(inst, sol, pool);
  for (int r = 0; r < kNumRelations; ++r)
    CHECK(g.edges[static_cast<std::size_t>(r)].size() == 1);
}

TEST_CASE("cut orthogonal to a row produces no con-cut edge") {
  MilpInstance inst;
  inst.name = "ortho";
  inst.num_vars = 2;
  inst.objective = {-1.0, -1.0};
  inst.var_lower = {0.0, 0.0};
  inst.var_upper = {1.0, 1.0};
  inst.integer_set = {0, 1};
  SparseRow row;
  row.entries = {{0, 2.0}};
  row.rhs = 1.0;
  inst.rows.push_back(row);
  const auto sol = solve_lp(relax(inst));
  REQUIRE(sol.status == SimplexStatus::Optimal);

  CutPool pool;
  pool.push(make_cut({{1, 1.0}}, 0.5));  // support disjoint from the row
  const auto g = build_graph(inst, sol, pool);
  CHECK(g.rel(Relation::ConToCut).empty());
  CHECK(g.rel(Relation::CutToCon).empty());
  CHECK(g.rel(Relation::VarToCut).size() == 1);
}

TEST_CASE("mirror property and one-hot sums on generated instances") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto inst = generate(InstanceKind::Knapsack, seed, 12, 5);
    const auto sol = solve_lp(relax(inst));
    REQUIRE(sol.status == SimplexStatus::Optimal);
    const auto pool = gomory_cuts(sol, inst, inst.num_vars);
    if (pool.empty()) continue;
    const auto g = build_graph(inst, sol, pool);

    CHECK(reversed(g.rel(Relation::VarToCon)) ==
          std::multiset<std::pair<int, int>>(g.rel(Relation::ConToVar).begin(),
                                             g.rel(Relation::ConToVar).end()));
    CHECK(reversed(g.rel(Relation::VarToCut)) ==
          std::multiset<std::pair<int, int>>(g.rel(Relation::CutToVar).begin(),
                                             g.rel(Relation::CutToVar).end()));
    CHECK(reversed(g.rel(Relation::ConToCut)) ==
          std::multiset<std::pair<int, int>>(g.rel(Relation::CutToCon).begin(),
                                             g.rel(Relation::CutToCon).end()));

    for (const auto& f : g.var_feats) {
      CHECK(f[1] + f[2] + f[3] + f[4] == 1.0);      // type one-hot
      CHECK(f[13] + f[14] + f[15] + f[16] == 1.0);  // basis one-hot
      for (double v : f) {
        CHECK(std::isfinite(v));
        CHECK(std::fabs(v) <= 10.0);
      }
    }
    for (const auto& f : g.con_feats) {
      CHECK(f[6] + f[7] + f[8] + f[9] == 1.0);
      for (double v : f) {
        CHECK(std::isfinite(v));
        CHECK(std::fabs(v) <= 10.0);
      }
    }
    for (const auto& f : g.cut_feats)
      for (double v : f) CHECK(std::isfinite(v));

    // cut_feats row k equals the cutgen features of pool cut k
    for (int k = 0; k < pool.size(); ++k) {
      const auto expect = features(pool[k], inst, sol);
      for (int d = 0; d < kCutFeatDim; ++d)
        CHECK(g.cut_feats[static_cast<std::size_t>(k)][static_cast<std::size_t>(d)] ==
              expect.v[d]);
    }
  }
}

TEST_CASE("feature determinism: bit-identical graphs for identical inputs") {
  const auto inst = generate(InstanceKind::SetCover, 4, 12, 8);
  const auto sol = solve_lp(relax(inst));
  REQUIRE(sol.status == SimplexStatus::Optimal);
  const auto pool = gomory_cuts(sol, inst, inst.num_vars);
  if (pool.empty()) return;
  std::ostringstream a, b;
  dump_graph(build_graph(inst, sol, pool), a);
  dump_graph(build_graph(inst, sol, pool), b);
  CHECK(a.str() == b.str());
}

TEST_CASE("pool shuffle relabels the graph without changing content") {
  const auto inst = generate(InstanceKind::Knapsack, 13, 14, 6);
  const auto sol = solve_lp(relax(inst));
  REQUIRE(sol.status == SimplexStatus::Optimal);
  auto pool = gomory_cuts(sol, inst, inst.num_vars);
  if (pool.size() < 2) return;

  const auto g0 = build_graph(inst, sol, pool);
  std::vector<int> perm(static_cast<std::size_t>(pool.size()));
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
  Rng rng(99);
  rng.shuffle(perm);
  auto shuffled = pool;
  shuffled.permute(perm);
  const auto g1 = build_graph(inst, sol, shuffled);

  // map cut node index -> id, compare feature rows and edge multisets by id
  REQUIRE(g0.cut_ids.size() == g1.cut_ids.size());
  for (std::size_t k1 = 0; k1 < g1.cut_ids.size(); ++k1) {
    const auto id = g1.cut_ids[k1];
    const auto it = std::find(g0.cut_ids.begin(), g0.cut_ids.end(), id);
    REQUIRE(it != g0.cut_ids.end());
    const auto k0 = static_cast<std::size_t>(it - g0.cut_ids.begin());
    CHECK(g0.cut_feats[k0] == g1.cut_feats[k1]);
  }
  auto keyed = [](const StateGraph& g, Relation r, bool cut_is_source) {
    std::multiset<std::pair<std::uint64_t, int>> out;
    for (const auto& [s, t] : g.rel(r))
      out.insert(cut_is_source ? std::make_pair(g.cut_ids[static_cast<std::size_t>(s)], t)
                               : std::make_pair(g.cut_ids[static_cast<std::size_t>(t)], s));
    return out;
  };
  CHECK(keyed(g0, Relation::CutToVar, true) == keyed(g1, Relation::CutToVar, true));
  CHECK(keyed(g0, Relation::VarToCut, false) == keyed(g1, Relation::VarToCut, false));
  CHECK(keyed(g0, Relation::CutToCon, true) == keyed(g1, Relation::CutToCon, true));
  CHECK(keyed(g0, Relation::ConToCut, false) == keyed(g1, Relation::ConToCut, false));
}

TEST_CASE("empty pool is rejected") {
  const auto inst = hand_instance();
  const auto sol = solve_lp(relax(inst));
  CutPool empty;
  CHECK_THROWS_AS(build_graph(inst, sol, empty), SolverError);
}
