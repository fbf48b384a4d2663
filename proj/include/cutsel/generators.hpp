#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "cutsel/common.hpp"
#include "cutsel/instance.hpp"

namespace cutsel {

enum class InstanceKind { Knapsack, Packing, SetCover };

inline const char* kind_name(InstanceKind k) {
  switch (k) {
    case InstanceKind::Knapsack: return "knapsack";
    case InstanceKind::Packing: return "packing";
    case InstanceKind::SetCover: return "setcover";
  }
  return "?";
}

inline InstanceKind kind_from_name(const std::string& s) {
  if (s == "knapsack") return InstanceKind::Knapsack;
  if (s == "packing") return InstanceKind::Packing;
  if (s == "setcover") return InstanceKind::SetCover;
  throw std::invalid_argument("unknown instance kind: " + s);
}

namespace detail {

// distinct column subset of size k, ascending
inline std::vector<int> pick_support(Rng& rng, int n, int k) {
  std::vector<int> cols(static_cast<std::size_t>(n));
  std::iota(cols.begin(), cols.end(), 0);
  for (int i = 0; i < k; ++i) {
    const auto j = static_cast<std::size_t>(rng.uniform_int(i, n - 1));
    std::swap(cols[static_cast<std::size_t>(i)], cols[j]);
  }
  cols.resize(static_cast<std::size_t>(k));
  std::sort(cols.begin(), cols.end());
  return cols;
}

}  // namespace detail

/// Deterministic synthetic families. All binary for knapsack/setcover,
/// mixed integer/continuous on [0,10] for packing. Knapsack data is integral
/// so that cut derivation sees integral slacks; packing data is fractional on
/// purpose to exercise the continuous branches.
inline MilpInstance generate(InstanceKind kind, std::uint64_t seed, int n, int m) {
  if (n < 2 || n > 200 || m < 1 || m > 200)
    throw std::out_of_range("generate: require 2 <= n <= 200 and 1 <= m <= 200");

  // Mix the family tag into the stream so kinds do not share variates.
  Rng rng(seed * 6364136223846793005ull + static_cast<std::uint64_t>(kind) + 1442695040888963407ull);

  MilpInstance inst;
  inst.name = std::string(kind_name(kind)) + "_s" + std::to_string(seed) + "_n" +
              std::to_string(n) + "_m" + std::to_string(m);
  inst.num_vars = n;
  inst.objective.assign(static_cast<std::size_t>(n), 0.0);

  switch (kind) {
    case InstanceKind::Knapsack: {
      inst.var_lower.assign(static_cast<std::size_t>(n), 0.0);
      inst.var_upper.assign(static_cast<std::size_t>(n), 1.0);
      inst.integer_set.resize(static_cast<std::size_t>(n));
      std::iota(inst.integer_set.begin(), inst.integer_set.end(), 0);

      std::vector<std::vector<double>> w(static_cast<std::size_t>(m),
                                         std::vector<double>(static_cast<std::size_t>(n)));
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j)
          w[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
              static_cast<double>(rng.uniform_int(2, 15));
      for (int j = 0; j < n; ++j) {
        double mean_w = 0;
        for (int i = 0; i < m; ++i) mean_w += w[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        mean_w /= m;
        // value correlated with weight; minimization of -value
        inst.objective[static_cast<std::size_t>(j)] =
            -(std::floor(mean_w) + static_cast<double>(rng.uniform_int(1, 10)));
      }
      for (int i = 0; i < m; ++i) {
        SparseRow row;
        double total = 0, wmax = 0;
        for (int j = 0; j < n; ++j) {
          const double wij = w[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
          row.entries.emplace_back(j, wij);
          total += wij;
          wmax = std::max(wmax, wij);
        }
        row.rhs = std::max(wmax, std::floor(rng.uniform(0.35, 0.6) * total));
        inst.rows.push_back(std::move(row));
      }
      break;
    }
    case InstanceKind::Packing: {
      inst.var_lower.assign(static_cast<std::size_t>(n), 0.0);
      inst.var_upper.assign(static_cast<std::size_t>(n), 10.0);
      for (int j = 0; j < n; ++j)
        if (rng.uniform() < 0.5) inst.integer_set.push_back(j);
      if (inst.integer_set.empty()) inst.integer_set.push_back(0);
      for (int j = 0; j < n; ++j)
        inst.objective[static_cast<std::size_t>(j)] = -rng.uniform(1.0, 10.0);
      for (int i = 0; i < m; ++i) {
        const int k = static_cast<int>(rng.uniform_int(2, std::min(n, 6)));
        SparseRow row;
        double total = 0;
        for (int j : detail::pick_support(rng, n, k)) {
          const double a = rng.uniform(0.5, 5.0);
          row.entries.emplace_back(j, a);
          total += a;
        }
        row.rhs = rng.uniform(0.2, 0.5) * 10.0 * total;
        inst.rows.push_back(std::move(row));
      }
      break;
    }
    case InstanceKind::SetCover: {
      inst.var_lower.assign(static_cast<std::size_t>(n), 0.0);
      inst.var_upper.assign(static_cast<std::size_t>(n), 1.0);
      inst.integer_set.resize(static_cast<std::size_t>(n));
      std::iota(inst.integer_set.begin(), inst.integer_set.end(), 0);
      for (int j = 0; j < n; ++j)
        inst.objective[static_cast<std::size_t>(j)] = static_cast<double>(rng.uniform_int(1, 10));
      for (int i = 0; i < m; ++i) {
        const int k = static_cast<int>(rng.uniform_int(2, std::min(n, 5)));
        SparseRow row;
        for (int j : detail::pick_support(rng, n, k)) row.entries.emplace_back(j, -1.0);
        row.rhs = -1.0;  // covering constraint sum x_j >= 1 in canonical <= form
        inst.rows.push_back(std::move(row));
      }
      break;
    }
  }
  return inst;
}

}  // namespace cutsel
