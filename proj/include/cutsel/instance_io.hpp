#pragma once

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cutsel/common.hpp"
#include "cutsel/instance.hpp"

namespace cutsel {

namespace detail {

inline double parse_real(const std::string& tok, int line) {
  if (tok == "inf") return kInf;
  if (tok == "-inf") return -kInf;
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0')
    throw ParseError("bad numeric literal '" + tok + "'", line);
  return v;
}

inline int parse_index(const std::string& tok, int line) {
  char* end = nullptr;
  const long v = std::strtol(tok.c_str(), &end, 10);
  if (end == tok.c_str() || *end != '\0')
    throw ParseError("bad index '" + tok + "'", line);
  return static_cast<int>(v);
}

}  // namespace detail

/// Text instance format, one section keyword per line:
///   NAME <id>
///   VARS <n>
///   OBJ c0 ... c{n-1}
///   BOUNDS j lo hi          (one line per variable; missing vars get [0, inf))
///   INT j1 j2 ...
///   ROW rhs idx:coef ...    (one line per constraint)
/// '#' starts a comment. "inf"/"-inf" are accepted bound literals.
inline MilpInstance parse_instance(std::istream& in) {
  MilpInstance inst;
  bool saw_vars = false, saw_obj = false, saw_name = false;
  std::string raw;
  int lineno = 0;

  while (std::getline(in, raw)) {
    ++lineno;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    std::istringstream ls(raw);
    std::string key;
    if (!(ls >> key)) continue;

    if (key == "NAME") {
      ls >> inst.name;
      saw_name = true;
    } else if (key == "VARS") {
      int n = 0;
      if (!(ls >> n) || n <= 0) throw ParseError("VARS expects a positive count", lineno);
      inst.num_vars = n;
      inst.var_lower.assign(static_cast<std::size_t>(n), 0.0);
      inst.var_upper.assign(static_cast<std::size_t>(n), kInf);
      saw_vars = true;
    } else if (key == "OBJ") {
      if (!saw_vars) throw ParseError("OBJ before VARS", lineno);
      std::string tok;
      while (ls >> tok) inst.objective.push_back(detail::parse_real(tok, lineno));
      if (static_cast<int>(inst.objective.size()) != inst.num_vars)
        throw ParseError("OBJ lists " + std::to_string(inst.objective.size()) +
                             " entries, expected " + std::to_string(inst.num_vars),
                         lineno);
      saw_obj = true;
    } else if (key == "BOUNDS") {
      if (!saw_vars) throw ParseError("BOUNDS before VARS", lineno);
      std::string jt, lt, ut;
      if (!(ls >> jt >> lt >> ut)) throw ParseError("BOUNDS expects: j lo hi", lineno);
      const int j = detail::parse_index(jt, lineno);
      if (j < 0 || j >= inst.num_vars) throw ParseError("BOUNDS index out of range", lineno);
      inst.var_lower[static_cast<std::size_t>(j)] = detail::parse_real(lt, lineno);
      inst.var_upper[static_cast<std::size_t>(j)] = detail::parse_real(ut, lineno);
    } else if (key == "INT") {
      if (!saw_vars) throw ParseError("INT before VARS", lineno);
      std::string tok;
      while (ls >> tok) {
        const int j = detail::parse_index(tok, lineno);
        if (j < 0 || j >= inst.num_vars) throw ParseError("INT index out of range", lineno);
        inst.integer_set.push_back(j);
      }
    } else if (key == "ROW") {
      if (!saw_vars) throw ParseError("ROW before VARS", lineno);
      SparseRow row;
      std::string tok;
      if (!(ls >> tok)) throw ParseError("ROW expects rhs", lineno);
      row.rhs = detail::parse_real(tok, lineno);
      while (ls >> tok) {
        const auto colon = tok.find(':');
        if (colon == std::string::npos)
          throw ParseError("ROW entry '" + tok + "' is not idx:coef", lineno);
        const int j = detail::parse_index(tok.substr(0, colon), lineno);
        if (j < 0 || j >= inst.num_vars) throw ParseError("ROW index out of range", lineno);
        row.entries.emplace_back(j, detail::parse_real(tok.substr(colon + 1), lineno));
      }
      inst.rows.push_back(std::move(row));
    } else {
      throw ParseError("unknown section '" + key + "'", lineno);
    }
  }

  if (!saw_name) throw ParseError("missing NAME section", lineno);
  if (!saw_vars) throw ParseError("missing VARS section", lineno);
  if (!saw_obj) throw ParseError("missing OBJ section", lineno);

  std::sort(inst.integer_set.begin(), inst.integer_set.end());
  inst.integer_set.erase(std::unique(inst.integer_set.begin(), inst.integer_set.end()),
                         inst.integer_set.end());
  const auto violations = validate(inst);
  if (!violations.empty())
    throw InvalidInstanceError("instance invalid: " + violations.front().field + " — " +
                               violations.front().message);
  return inst;
}

inline MilpInstance read_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open instance file: " + path);
  return parse_instance(in);
}

inline void write_instance(const MilpInstance& inst, std::ostream& out) {
  out << "NAME " << inst.name << "\n";
  out << "VARS " << inst.num_vars << "\n";
  out << "OBJ";
  for (double c : inst.objective) out << ' ' << fmt_g17(c);
  out << "\n";
  for (int j = 0; j < inst.num_vars; ++j)
    out << "BOUNDS " << j << ' ' << fmt_g17(inst.var_lower[static_cast<std::size_t>(j)]) << ' '
        << fmt_g17(inst.var_upper[static_cast<std::size_t>(j)]) << "\n";
  out << "INT";
  for (int j : inst.integer_set) out << ' ' << j;
  out << "\n";
  for (const auto& row : inst.rows) {
    out << "ROW " << fmt_g17(row.rhs);
    for (const auto& [j, a] : row.entries) out << ' ' << j << ':' << fmt_g17(a);
    out << "\n";
  }
}

inline void write_instance(const MilpInstance& inst, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  write_instance(inst, out);
}

}  // namespace cutsel
