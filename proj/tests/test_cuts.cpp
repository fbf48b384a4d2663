#include <catch2/catch_amalgamated.hpp>

#include "cutsel/cuts.hpp"
#include "cutsel/generators.hpp"
#include "cutsel/simplex.hpp"
#include "oracles.hpp"

using namespace cutsel;

namespace {

MilpInstance two_var_example() {
  // min -x - y ; x + y <= 1.5 ; 0 <= x,y <= 1 integer
  MilpInstance inst;
  inst.name = "twovar";
  inst.num_vars = 2;
  inst.objective = {-1.0, -1.0};
  inst.var_lower = {0.0, 0.0};
  inst.var_upper = {1.0, 1.0};
  inst.integer_set = {0, 1};
  SparseRow row;
  row.entries = {{0, 1.0}, {1, 1.0}};
  row.rhs = 1.5;
  inst.rows.push_back(row);
  return inst;
}

void check_cut_valid(const MilpInstance& inst, const Cut& cut) {
  std::vector<std::vector<double>> pts;
  REQUIRE(oracles::enumerate_integer_points(inst, pts));
  for (const auto& x : pts) CHECK(cut.activity(x) <= cut.beta + 1e-9);
}

}  // namespace

TEST_CASE("integral LP optimum yields an empty pool") {
  MilpInstance inst = two_var_example();
  inst.rows[0].rhs = 2.0;  // LP optimum (1,1) is integral
  const auto sol = solve_lp(relax(inst));
  REQUIRE(sol.status == SimplexStatus::Optimal);
  const auto pool = gomory_cuts(sol, inst, 100);
  CHECK(pool.empty());
}

TEST_CASE("two-variable example: cut separates the fractional optimum") {
  const auto inst = two_var_example();
  const auto sol = solve_lp(relax(inst));
  REQUIRE(sol.status == SimplexStatus::Optimal);
  CHECK_THAT(sol.objective, Catch::Matchers::WithinAbs(-1.5, 1e-9));
  const auto pool = gomory_cuts(sol, inst, 100);
  REQUIRE(pool.size() >= 1);
  for (const auto& cut : pool.cuts()) {
    CHECK(cut.activity(sol.x) > cut.beta + 1e-9);
    check_cut_valid(inst, cut);
  }
}

TEST_CASE("random knapsacks: every cut is valid and separating") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const auto inst = generate(InstanceKind::Knapsack, seed, 10, 4);
    const auto sol = solve_lp(relax(inst));
    REQUIRE(sol.status == SimplexStatus::Optimal);
    const auto pool = gomory_cuts(sol, inst, 100);
    std::vector<std::vector<double>> pts;
    REQUIRE(oracles::enumerate_integer_points(inst, pts));
    for (const auto& cut : pool.cuts()) {
      CHECK(cut.activity(sol.x) > cut.beta + 1e-9);
      for (const auto& x : pts) CHECK(cut.activity(x) <= cut.beta + 1e-9);
    }
  }
}

TEST_CASE("setcover cuts are valid too") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto inst = generate(InstanceKind::SetCover, seed, 10, 8);
    const auto sol = solve_lp(relax(inst));
    REQUIRE(sol.status == SimplexStatus::Optimal);
    const auto pool = gomory_cuts(sol, inst, 100);
    for (const auto& cut : pool.cuts()) {
      CHECK(cut.activity(sol.x) > cut.beta + 1e-9);
      check_cut_valid(inst, cut);
    }
  }
}

TEST_CASE("pool is capped by descending fractionality") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto inst = generate(InstanceKind::Knapsack, seed, 16, 8);
    const auto sol = solve_lp(relax(inst));
    REQUIRE(sol.status == SimplexStatus::Optimal);
    const auto full = gomory_cuts(sol, inst, 1000);
    if (full.size() < 3) continue;
    const auto capped = gomory_cuts(sol, inst, 2);
    REQUIRE(capped.size() == 2);
    // capped pool is a subset of the full pool, in the full pool's order
    int pos = -1;
    for (const auto& c : capped.cuts()) {
      int found = -1;
      for (int k = 0; k < full.size(); ++k)
        if (full[k].id == c.id) found = k;
      REQUIRE(found >= 0);
      CHECK(found > pos);
      pos = found;
    }
  }
}

TEST_CASE("cut ids are stable content hashes") {
  Cut a = make_cut({{0, 1.0}, {3, 2.0}}, 5.0);
  Cut b = make_cut({{3, 2.0}, {0, 1.0}}, 5.0);  // same content, different entry order
  CHECK(a.id == b.id);
  Cut c = make_cut({{0, 1.0}, {3, 2.0}}, 5.0 + 1e-9);
  CHECK(a.id != c.id);
  Cut d = make_cut({{0, 1.0 + 1e-14}, {3, 2.0}}, 5.0);  // below the 1e-12 grid
  CHECK(a.id == d.id);
}

TEST_CASE("feature vector matches hand computation on x1+x2 <= 1") {
  MilpInstance inst;
  inst.name = "hand";
  inst.num_vars = 2;
  inst.objective = {-1.0, -1.0};
  inst.var_lower = {0.0, 0.0};
  inst.var_upper = {1.0, 1.0};
  inst.integer_set = {0, 1};
  SparseRow r1, r2;
  r1.entries = {{0, 1.0}};
  r1.rhs = 1.0;
  r2.entries = {{1, 1.0}};
  r2.rhs = 1.0;
  inst.rows = {r1, r2};
  const auto sol = solve_lp(relax(inst));
  REQUIRE(sol.status == SimplexStatus::Optimal);  // x* = (1,1)

  const Cut cut = make_cut({{0, 1.0}, {1, 1.0}}, 1.0);
  const auto f = features(cut, inst, sol);
  CHECK_THAT(f.v[0], Catch::Matchers::WithinAbs(1.0, 1e-12));   // coef mean
  CHECK_THAT(f.v[1], Catch::Matchers::WithinAbs(1.0, 1e-12));   // coef max
  CHECK_THAT(f.v[2], Catch::Matchers::WithinAbs(1.0, 1e-12));   // coef min
  CHECK_THAT(f.v[3], Catch::Matchers::WithinAbs(0.0, 1e-12));   // coef std
  CHECK_THAT(f.v[4], Catch::Matchers::WithinAbs(-1.0, 1e-12));  // obj mean over support
  CHECK_THAT(f.efficacy(), Catch::Matchers::WithinAbs(1.0 / std::sqrt(2.0), 1e-9));
  CHECK_THAT(f.normalized_violation(), Catch::Matchers::WithinAbs(1.0, 1e-9));
  CHECK_THAT(f.support(), Catch::Matchers::WithinAbs(1.0, 1e-12));
  CHECK_THAT(f.integral_support(), Catch::Matchers::WithinAbs(1.0, 1e-12));
  // parallelism of alpha=(1,1) against c=(-1,-1) is -1
  CHECK_THAT(f.parallelism(), Catch::Matchers::WithinAbs(-1.0, 1e-12));

  CHECK_THAT(nv_score(cut, inst, sol), Catch::Matchers::WithinAbs(1.0, 1e-9));
  CHECK_THAT(eff_score(cut, inst, sol), Catch::Matchers::WithinAbs(1.0 / std::sqrt(2.0), 1e-9));
}

TEST_CASE("cut parallel to the objective has parallelism one") {
  MilpInstance inst = two_var_example();
  inst.objective = {2.0, 3.0};
  const auto sol = solve_lp(relax(inst));
  REQUIRE(sol.status == SimplexStatus::Optimal);
  const Cut cut = make_cut({{0, 2.0}, {1, 3.0}}, 10.0);
  CHECK_THAT(features(cut, inst, sol).parallelism(), Catch::Matchers::WithinAbs(1.0, 1e-12));
}

TEST_CASE("support counts nonzeros over n") {
  MilpInstance inst;
  inst.name = "support";
  inst.num_vars = 4;
  inst.objective = {1.0, 1.0, 1.0, 1.0};
  inst.var_lower.assign(4, 0.0);
  inst.var_upper.assign(4, 1.0);
  inst.integer_set = {0, 1};
  SparseRow row;
  row.entries = {{0, 1.0}};
  row.rhs = 1.0;
  inst.rows.push_back(row);
  const auto sol = solve_lp(relax(inst));
  REQUIRE(sol.status == SimplexStatus::Optimal);
  const Cut cut = make_cut({{1, 1.0}, {2, 1.0}}, 1.0);
  const auto f = features(cut, inst, sol);
  CHECK_THAT(f.support(), Catch::Matchers::WithinAbs(0.5, 1e-12));
  CHECK_THAT(f.integral_support(), Catch::Matchers::WithinAbs(0.5, 1e-12));
}

TEST_CASE("satisfied cut has zero normalized violation") {
  const auto inst = two_var_example();
  const auto sol = solve_lp(relax(inst));
  const Cut cut = make_cut({{0, 1.0}}, 5.0);  // x <= 5 holds everywhere
  CHECK(nv_score(cut, inst, sol) == 0.0);
}

TEST_CASE("scores are invariant under positive scaling") {
  const auto inst = two_var_example();
  const auto sol = solve_lp(relax(inst));
  REQUIRE(sol.status == SimplexStatus::Optimal);
  const Cut base = make_cut({{0, 1.0}, {1, 1.0}}, 1.0);
  const Cut scaled = make_cut({{0, 2.0}, {1, 2.0}}, 2.0);
  const auto fb = features(base, inst, sol);
  const auto fs = features(scaled, inst, sol);
  CHECK_THAT(fs.efficacy(), Catch::Matchers::WithinAbs(fb.efficacy(), 1e-12));
  CHECK_THAT(fs.parallelism(), Catch::Matchers::WithinAbs(fb.parallelism(), 1e-12));
  CHECK_THAT(fs.support(), Catch::Matchers::WithinAbs(fb.support(), 1e-12));
  CHECK_THAT(fs.integral_support(), Catch::Matchers::WithinAbs(fb.integral_support(), 1e-12));
  // |beta| >= 1 on both, so normalized violation is scale-invariant too
  CHECK_THAT(fs.normalized_violation(), Catch::Matchers::WithinAbs(fb.normalized_violation(), 1e-12));
}

TEST_CASE("feature ranges hold on generated corpora") {
  int cuts_seen = 0;
  for (auto kind : {InstanceKind::Knapsack, InstanceKind::Packing, InstanceKind::SetCover}) {
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
      const auto inst = generate(kind, seed, 14, 6);
      const auto sol = solve_lp(relax(inst));
      if (sol.status != SimplexStatus::Optimal) continue;
      const auto pool = gomory_cuts(sol, inst, 1000);
      for (const auto& cut : pool.cuts()) {
        const auto f = features(cut, inst, sol);
        for (double v : f.v) CHECK(std::isfinite(v));
        CHECK(f.support() >= 0.0);
        CHECK(f.support() <= 1.0);
        CHECK(f.integral_support() >= 0.0);
        CHECK(f.integral_support() <= 1.0);
        CHECK(f.parallelism() >= -1.0 - 1e-12);
        CHECK(f.parallelism() <= 1.0 + 1e-12);
        CHECK(f.normalized_violation() >= 0.0);
        ++cuts_seen;
      }
    }
  }
  CHECK(cuts_seen > 100);
}

TEST_CASE("packing instances exercise the continuous branch and stay valid") {
  // mixed instances: check validity of each cut by maximizing alpha'x over the
  // integer grid of the integer variables crossed with LP vertices of the rest
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    const auto inst = generate(InstanceKind::Packing, seed, 6, 4);
    const auto sol = solve_lp(relax(inst));
    if (sol.status != SimplexStatus::Optimal) continue;
    const auto pool = gomory_cuts(sol, inst, 1000);
    if (pool.empty()) continue;

    for (const auto& cut : pool.cuts()) {
      CHECK(cut.activity(sol.x) > cut.beta + 1e-9);
      // maximize alpha'x subject to the instance rows with integers fixed to
      // each grid point: oracle via vertex enumeration on the continuous part
      std::vector<int> ints = inst.integer_set;
      std::vector<long> lo, hi;
      long grid = 1;
      for (int j : ints) {
        lo.push_back(static_cast<long>(std::ceil(inst.var_lower[static_cast<std::size_t>(j)] - 1e-9)));
        hi.push_back(static_cast<long>(std::floor(inst.var_upper[static_cast<std::size_t>(j)] + 1e-9)));
        grid *= hi.back() - lo.back() + 1;
      }
      if (grid > 4000) continue;
      std::vector<long> cur = lo;
      for (;;) {
        LpProblem sub = relax(inst);
        // maximize alpha'x == minimize -alpha'x
        sub.objective.assign(static_cast<std::size_t>(sub.num_vars), 0.0);
        for (const auto& [j, a] : cut.alpha) sub.objective[static_cast<std::size_t>(j)] = -a;
        for (std::size_t k = 0; k < ints.size(); ++k) {
          const auto j = static_cast<std::size_t>(ints[k]);
          sub.var_lower[j] = sub.var_upper[j] = static_cast<double>(cur[k]);
        }
        const auto worst = oracles::vertex_enum_min(sub);
        if (worst.has_value()) CHECK(-*worst <= cut.beta + 1e-9);

        std::size_t k = 0;
        while (k < cur.size()) {
          if (++cur[k] <= hi[k]) break;
          cur[k] = lo[k];
          ++k;
        }
        if (k == cur.size()) break;
      }
    }
  }
}
