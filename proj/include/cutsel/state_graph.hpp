#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <vector>

#include "cutsel/common.hpp"
#include "cutsel/cuts.hpp"
#include "cutsel/instance.hpp"
#include "cutsel/simplex.hpp"

namespace cutsel {

inline constexpr int kVarFeatDim = 17;
inline constexpr int kConFeatDim = 16;
inline constexpr int kCutFeatDim = 13;

/// Directed relations of the tripartite state graph, one list each.
enum class Relation {
  VarToCon = 0,
  ConToVar = 1,
  VarToCut = 2,
  CutToVar = 3,
  ConToCut = 4,
  CutToCon = 5,
};
inline constexpr int kNumRelations = 6;

inline const char* relation_name(Relation r) {
  switch (r) {
    case Relation::VarToCon: return "var->con";
    case Relation::ConToVar: return "con->var";
    case Relation::VarToCut: return "var->cut";
    case Relation::CutToVar: return "cut->var";
    case Relation::ConToCut: return "con->cut";
    case Relation::CutToCon: return "cut->con";
  }
  return "?";
}

/// Solver state as a heterogeneous tripartite graph: variable, constraint and
/// cut nodes with directed edges both ways between related nodes.
struct StateGraph {
  std::vector<std::array<double, kVarFeatDim>> var_feats;
  std::vector<std::array<double, kConFeatDim>> con_feats;
  std::vector<std::array<double, kCutFeatDim>> cut_feats;
  std::array<std::vector<std::pair<int, int>>, kNumRelations> edges;  // (source, target)
  std::vector<std::uint64_t> cut_ids;  // identity key per cut node, pool order

  int num_vars() const { return static_cast<int>(var_feats.size()); }
  int num_cons() const { return static_cast<int>(con_feats.size()); }
  int num_cuts() const { return static_cast<int>(cut_feats.size()); }
  const std::vector<std::pair<int, int>>& rel(Relation r) const {
    return edges[static_cast<std::size_t>(r)];
  }
};

namespace graph_detail {

constexpr double kAtBoundTol = 1e-6;
constexpr double kCosineTol = 1e-9;

inline double sparse_cosine(const std::vector<std::pair<int, double>>& a,
                            const std::vector<std::pair<int, double>>& b) {
  double dot = 0, na = 0, nb = 0;
  std::size_t i = 0, k = 0;
  while (i < a.size() && k < b.size()) {
    if (a[i].first == b[k].first) {
      dot += a[i].second * b[k].second;
      ++i;
      ++k;
    } else if (a[i].first < b[k].first) {
      ++i;
    } else {
      ++k;
    }
  }
  for (const auto& [j, v] : a) na += v * v;
  for (const auto& [j, v] : b) nb += v * v;
  if (na == 0 || nb == 0) return 0;
  return dot / std::sqrt(na * nb);
}

}  // namespace graph_detail

/// Table-ordered 17 features per variable. Age counters are identically zero
/// in the single-root-round setting; the slots are kept so dimensions match.
inline std::vector<std::array<double, kVarFeatDim>> var_features(const MilpInstance& inst,
                                                                 const SimplexSolution& sol) {
  if (sol.status != SimplexStatus::Optimal) throw SolverError("var_features: not optimal");
  const double cnorm = norm2(inst.objective);
  std::vector<std::array<double, kVarFeatDim>> out(static_cast<std::size_t>(inst.num_vars));
  for (int j = 0; j < inst.num_vars; ++j) {
    auto& f = out[static_cast<std::size_t>(j)];
    f.fill(0.0);
    const double lo = inst.var_lower[static_cast<std::size_t>(j)];
    const double up = inst.var_upper[static_cast<std::size_t>(j)];
    const double xj = sol.x[static_cast<std::size_t>(j)];

    f[0] = cnorm > 0 ? inst.objective[static_cast<std::size_t>(j)] / cnorm : 0.0;
    const bool integer = inst.is_integer(j);
    const bool binary = integer && lo == 0.0 && up == 1.0;
    f[1] = binary ? 1.0 : 0.0;
    f[2] = (integer && !binary) ? 1.0 : 0.0;
    f[3] = 0.0;  // implint: never produced by this artifact
    f[4] = integer ? 0.0 : 1.0;
    f[5] = std::isfinite(lo) ? 1.0 : 0.0;
    f[6] = std::isfinite(up) ? 1.0 : 0.0;
    f[7] = cnorm > 0 ? sol.reduced_costs[static_cast<std::size_t>(j)] / cnorm : 0.0;
    f[8] = xj;
    f[9] = frac_part(xj);
    f[10] = (std::isfinite(lo) && std::fabs(xj - lo) <= graph_detail::kAtBoundTol) ? 1.0 : 0.0;
    f[11] = (std::isfinite(up) && std::fabs(xj - up) <= graph_detail::kAtBoundTol) ? 1.0 : 0.0;
    f[12] = 0.0;  // norm_age at the single root round
    const BasisStatus st = sol.col_status[static_cast<std::size_t>(j)];
    f[13] = st == BasisStatus::Lower ? 1.0 : 0.0;
    f[14] = st == BasisStatus::Basic ? 1.0 : 0.0;
    f[15] = st == BasisStatus::Upper ? 1.0 : 0.0;
    f[16] = st == BasisStatus::Zero ? 1.0 : 0.0;
  }
  return out;
}

/// Table-ordered 16 features per constraint row.
inline std::vector<std::array<double, kConFeatDim>> con_features(const MilpInstance& inst,
                                                                 const SimplexSolution& sol) {
  if (sol.status != SimplexStatus::Optimal) throw SolverError("con_features: not optimal");
  const double cnorm = norm2(inst.objective);
  std::vector<std::array<double, kConFeatDim>> out(static_cast<std::size_t>(inst.num_cons()));
  for (int i = 0; i < inst.num_cons(); ++i) {
    auto& f = out[static_cast<std::size_t>(i)];
    f.fill(0.0);
    const auto& row = inst.rows[static_cast<std::size_t>(i)];
    const double rnorm = row.norm();
    const double activity = row.dot(sol.x);

    int int_cols = 0;
    bool integral = true;
    for (const auto& [j, a] : row.entries) {
      const bool ij = inst.is_integer(j);
      int_cols += ij ? 1 : 0;
      integral = integral && ij && is_integral(a, 1e-9);
    }

    f[0] = 0.0;  // rank of an original row at the root
    f[1] = static_cast<double>(row.entries.size()) / inst.num_vars;
    f[2] = rnorm > 0 ? row.rhs / rnorm : 0.0;
    f[3] = 0.0;  // canonical <= rows have no finite lhs
    f[4] = std::fabs(activity - row.rhs) <= graph_detail::kAtBoundTol ? 1.0 : 0.0;
    f[5] = (rnorm > 0 && cnorm > 0) ? sol.duals[static_cast<std::size_t>(i)] / (rnorm * cnorm) : 0.0;
    const BasisStatus st = sol.row_status[static_cast<std::size_t>(i)];
    f[6] = st == BasisStatus::Lower ? 1.0 : 0.0;
    f[7] = st == BasisStatus::Basic ? 1.0 : 0.0;
    f[8] = st == BasisStatus::Upper ? 1.0 : 0.0;
    f[9] = st == BasisStatus::Zero ? 1.0 : 0.0;
    f[10] = 0.0;  // norm_age
    f[11] = 0.0;  // norm_nlp_creation
    f[12] = static_cast<double>(int_cols) / static_cast<double>(row.entries.size());
    f[13] = integral ? 1.0 : 0.0;
    f[14] = 0.0;  // is_removable: this engine never removes rows
    f[15] = 1.0;  // is_in_lp
  }
  return out;
}

/// Assembles the full tripartite graph for a root state with candidate cuts.
/// Cut node k carries pool cut k's features; every relation is mirrored.
inline StateGraph build_graph(const MilpInstance& inst, const SimplexSolution& sol,
                              const CutPool& pool) {
  if (pool.empty()) throw SolverError("build_graph: empty cut pool");
  StateGraph g;
  g.var_feats = var_features(inst, sol);
  g.con_feats = con_features(inst, sol);

  for (int k = 0; k < pool.size(); ++k) {
    const CutFeatures f = features(pool[k], inst, sol);
    std::array<double, kCutFeatDim> row;
    for (int d = 0; d < kCutFeatDim; ++d) row[static_cast<std::size_t>(d)] = f.v[d];
    g.cut_feats.push_back(row);
    g.cut_ids.push_back(pool[k].id);
  }

  auto& var_con = g.edges[static_cast<std::size_t>(Relation::VarToCon)];
  auto& con_var = g.edges[static_cast<std::size_t>(Relation::ConToVar)];
  for (int i = 0; i < inst.num_cons(); ++i) {
    for (const auto& [j, a] : inst.rows[static_cast<std::size_t>(i)].entries) {
      if (a == 0.0) continue;
      var_con.emplace_back(j, i);
      con_var.emplace_back(i, j);
    }
  }

  auto& var_cut = g.edges[static_cast<std::size_t>(Relation::VarToCut)];
  auto& cut_var = g.edges[static_cast<std::size_t>(Relation::CutToVar)];
  for (int k = 0; k < pool.size(); ++k) {
    for (const auto& [j, a] : pool[k].alpha) {
      if (a == 0.0) continue;
      var_cut.emplace_back(j, k);
      cut_var.emplace_back(k, j);
    }
  }

  auto& con_cut = g.edges[static_cast<std::size_t>(Relation::ConToCut)];
  auto& cut_con = g.edges[static_cast<std::size_t>(Relation::CutToCon)];
  for (int i = 0; i < inst.num_cons(); ++i) {
    for (int k = 0; k < pool.size(); ++k) {
      const double cosine =
          graph_detail::sparse_cosine(inst.rows[static_cast<std::size_t>(i)].entries, pool[k].alpha);
      if (std::fabs(cosine) > graph_detail::kCosineTol) {
        con_cut.emplace_back(i, k);
        cut_con.emplace_back(k, i);
      }
    }
  }
  return g;
}

/// Text dump for golden-file comparisons.
inline void dump_graph(const StateGraph& g, std::ostream& out) {
  out << "GRAPH vars " << g.num_vars() << " cons " << g.num_cons() << " cuts " << g.num_cuts()
      << "\n";
  for (const auto& f : g.var_feats) {
    out << "VARF";
    for (double v : f) out << ' ' << fmt_g17(v);
    out << "\n";
  }
  for (const auto& f : g.con_feats) {
    out << "CONF";
    for (double v : f) out << ' ' << fmt_g17(v);
    out << "\n";
  }
  for (std::size_t k = 0; k < g.cut_feats.size(); ++k) {
    out << "CUTF " << g.cut_ids[k];
    for (double v : g.cut_feats[k]) out << ' ' << fmt_g17(v);
    out << "\n";
  }
  for (int r = 0; r < kNumRelations; ++r) {
    out << "EDGES " << relation_name(static_cast<Relation>(r));
    for (const auto& [s, t] : g.edges[static_cast<std::size_t>(r)]) out << ' ' << s << ':' << t;
    out << "\n";
  }
}

}  // namespace cutsel
