#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cutsel/common.hpp"

namespace cutsel {

/// Work-unit budgets. "Time" throughout the artifact is simplex pivot count;
/// the wall-clock cap is diagnostic only and never drives tests.
struct SolveLimits {
  long max_pivots = 200000;
  long max_nodes = 10000;
  double wall_clock_cap_s = 0.0;  // 0 = unlimited
};

enum class SolveStatus { Optimal, BudgetExhausted };

inline const char* to_string(SolveStatus s) {
  return s == SolveStatus::Optimal ? "optimal" : "budget_exhausted";
}

struct TraceEvent {
  long work = 0;
  std::optional<double> primal;  // best incumbent objective, if any
  double dual = 0.0;             // best proven lower bound
};

/// Event timeline of a solve in deterministic work units. gap_cap stands in
/// for the primal bound wherever no incumbent exists yet.
struct SolveTrace {
  std::string instance_id;
  std::string selector_id;
  std::uint64_t seed = 0;
  long horizon = 0;
  double gap_cap = 0.0;
  SolveStatus final_status = SolveStatus::Optimal;
  std::vector<TraceEvent> events;
  std::vector<std::uint64_t> selected_cuts;
  long total_work = 0;
  double pd_integral = 0.0;
  double wall_clock_s = 0.0;  // diagnostic
};

inline void check_trace(const SolveTrace& t) {
  long w = 0;
  double dual = -kInf, primal = kInf;
  bool has_primal = false;
  for (const auto& e : t.events) {
    if (e.work < w) throw SolverError("malformed trace: work units decrease");
    if (e.dual < dual - 1e-9) throw SolverError("malformed trace: dual bound decreases");
    if (e.primal) {
      if (has_primal && *e.primal > primal + 1e-9)
        throw SolverError("malformed trace: primal bound increases");
      if (*e.primal < e.dual - 1e-6) throw SolverError("malformed trace: primal below dual");
      primal = *e.primal;
      has_primal = true;
    } else if (has_primal) {
      throw SolverError("malformed trace: incumbent vanished");
    }
    w = e.work;
    dual = e.dual;
  }
}

/// Area of the primal-dual gap over [0, horizon] in work units, piecewise
/// constant between events; the segment before the first event uses gap_cap
/// against the first proven dual bound.
inline double pd_integral(const SolveTrace& t, long horizon) {
  check_trace(t);
  if (t.events.empty()) return 0.0;
  if (horizon < t.events.back().work)
    throw SolverError("pd_integral: horizon below recorded work");

  auto gap = [&](const TraceEvent& e) {
    const double p = e.primal ? *e.primal : t.gap_cap;
    return std::max(0.0, p - e.dual);
  };

  double area = 0.0;
  const double gap0 = std::max(0.0, t.gap_cap - t.events.front().dual);
  area += gap0 * static_cast<double>(t.events.front().work);
  for (std::size_t i = 0; i + 1 < t.events.size(); ++i)
    area += gap(t.events[i]) * static_cast<double>(t.events[i + 1].work - t.events[i].work);
  area += gap(t.events.back()) * static_cast<double>(horizon - t.events.back().work);
  return area;
}

/// Normalized negated PD integral; larger is better, 0 is ideal.
inline double reward(const SolveTrace& t, long horizon) {
  return -pd_integral(t, horizon) / static_cast<double>(horizon);
}

inline void write_trace(const SolveTrace& t, std::ostream& out) {
  out << "TRACE " << t.instance_id << ' ' << t.selector_id << ' ' << t.seed << ' ' << t.horizon
      << ' ' << fmt_g17(t.gap_cap) << ' ' << to_string(t.final_status) << ' ' << t.total_work
      << "\n";
  for (const auto& e : t.events) {
    out << "EVENT " << e.work << ' ' << (e.primal ? fmt_g17(*e.primal) : std::string("-")) << ' '
        << fmt_g17(e.dual) << "\n";
  }
  out << "CUTS";
  for (auto id : t.selected_cuts) out << ' ' << id;
  out << "\n";
  out << "PD " << fmt_g17(t.pd_integral) << "\n";
}

inline SolveTrace read_trace(std::istream& in) {
  SolveTrace t;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    if (key == "TRACE") {
      std::string status;
      if (!(ls >> t.instance_id >> t.selector_id >> t.seed >> t.horizon >> t.gap_cap >> status >>
            t.total_work))
        throw ParseError("bad TRACE header", lineno);
      t.final_status = (status == "optimal") ? SolveStatus::Optimal : SolveStatus::BudgetExhausted;
    } else if (key == "EVENT") {
      TraceEvent e;
      std::string primal;
      if (!(ls >> e.work >> primal >> e.dual)) throw ParseError("bad EVENT line", lineno);
      if (primal != "-") e.primal = std::stod(primal);
      t.events.push_back(e);
    } else if (key == "CUTS") {
      std::uint64_t id;
      while (ls >> id) t.selected_cuts.push_back(id);
    } else if (key == "PD") {
      if (!(ls >> t.pd_integral)) throw ParseError("bad PD line", lineno);
    } else {
      throw ParseError("unknown trace line '" + key + "'", lineno);
    }
  }
  return t;
}

}  // namespace cutsel
