#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cutsel/common.hpp"

namespace cutsel {

inline constexpr double kMaxCoef = 1e9;

/// One sparse row `sum coef_j * x_j <= rhs`.
struct SparseRow {
  std::vector<std::pair<int, double>> entries;  // (column, coefficient), column-sorted
  double rhs = 0.0;

  double dot(const std::vector<double>& x) const {
    double s = 0;
    for (const auto& [j, a] : entries) s += a * x[static_cast<std::size_t>(j)];
    return s;
  }
  double norm() const {
    double s = 0;
    for (const auto& [j, a] : entries) s += a * a;
    return std::sqrt(s);
  }
};

/// Canonical mixed-integer program: minimize c'x subject to Ax <= b,
/// l <= x <= u, x_j integer for j in integer_set.
struct MilpInstance {
  std::string name;
  int num_vars = 0;
  std::vector<double> objective;       // size n
  std::vector<SparseRow> rows;         // size m
  std::vector<double> var_lower;       // size n, -inf allowed
  std::vector<double> var_upper;       // size n, +inf allowed
  std::vector<int> integer_set;        // sorted, distinct, subset of 0..n-1

  int num_cons() const { return static_cast<int>(rows.size()); }
  bool is_integer(int j) const {
    return std::binary_search(integer_set.begin(), integer_set.end(), j);
  }
};

/// LP over the same data with integrality dropped; appended_cuts records the
/// identity of every cut row added after row `base_rows`.
struct LpProblem {
  std::string instance_name;
  int num_vars = 0;
  std::vector<double> objective;
  std::vector<SparseRow> rows;
  std::vector<double> var_lower;
  std::vector<double> var_upper;
  int base_rows = 0;
  std::vector<std::uint64_t> appended_cuts;

  int num_cons() const { return static_cast<int>(rows.size()); }
};

struct Violation {
  std::string field;
  int index = -1;
  std::string message;
};

/// Checks every type invariant; returns one descriptor per breach.
inline std::vector<Violation> validate(const MilpInstance& inst) {
  std::vector<Violation> out;
  const int n = inst.num_vars;
  auto bad_coef = [](double v) { return !std::isfinite(v) || std::fabs(v) > kMaxCoef; };

  if (n <= 0) out.push_back({"num_vars", -1, "instance must have at least one variable"});
  if (static_cast<int>(inst.objective.size()) != n)
    out.push_back({"objective", -1, "objective length does not match num_vars"});
  if (static_cast<int>(inst.var_lower.size()) != n || static_cast<int>(inst.var_upper.size()) != n)
    out.push_back({"bounds", -1, "bound vectors do not match num_vars"});

  for (int j = 0; j < static_cast<int>(inst.objective.size()); ++j)
    if (bad_coef(inst.objective[j]))
      out.push_back({"objective", j, "objective coefficient not finite or above magnitude cap"});

  const int nb = static_cast<int>(std::min(inst.var_lower.size(), inst.var_upper.size()));
  for (int j = 0; j < nb; ++j) {
    if (std::isnan(inst.var_lower[j]) || std::isnan(inst.var_upper[j]))
      out.push_back({"bounds", j, "bound is NaN"});
    else if (inst.var_lower[j] > inst.var_upper[j])
      out.push_back({"bounds", j, "lower bound exceeds upper bound"});
  }

  for (int i = 0; i < inst.num_cons(); ++i) {
    const auto& row = inst.rows[i];
    if (row.entries.empty()) {
      out.push_back({"rows", i, "row has no nonzero coefficient"});
      continue;
    }
    bool any_nonzero = false;
    for (const auto& [j, a] : row.entries) {
      if (j < 0 || j >= n) out.push_back({"rows", i, "column index out of range"});
      if (bad_coef(a)) out.push_back({"rows", i, "row coefficient not finite or above magnitude cap"});
      if (a != 0.0) any_nonzero = true;
    }
    if (!any_nonzero) out.push_back({"rows", i, "row has no nonzero coefficient"});
    if (bad_coef(row.rhs)) out.push_back({"rows", i, "rhs not finite or above magnitude cap"});
  }

  for (std::size_t k = 0; k < inst.integer_set.size(); ++k) {
    const int j = inst.integer_set[k];
    if (j < 0 || j >= n) out.push_back({"integer_set", static_cast<int>(k), "index out of range"});
    if (k > 0 && inst.integer_set[k - 1] >= j)
      out.push_back({"integer_set", static_cast<int>(k), "indices not strictly increasing"});
  }
  return out;
}

/// Drops integrality. Precondition: validate(inst) is empty.
inline LpProblem relax(const MilpInstance& inst) {
  if (!validate(inst).empty()) throw InvalidInstanceError("relax: instance fails validation");
  LpProblem lp;
  lp.instance_name = inst.name;
  lp.num_vars = inst.num_vars;
  lp.objective = inst.objective;
  lp.rows = inst.rows;
  lp.var_lower = inst.var_lower;
  lp.var_upper = inst.var_upper;
  lp.base_rows = inst.num_cons();
  return lp;
}

}  // namespace cutsel
