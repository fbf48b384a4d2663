#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace cutsel {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Thrown on malformed instance files; carries the offending line.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line)
      : std::runtime_error("parse error (line " + std::to_string(line) + "): " + what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_ = 0;
};

class InvalidInstanceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Deterministic RNG. Wraps mt19937_64 (whose output sequence the standard
/// pins down) and derives all variates by explicit arithmetic, so streams are
/// identical across platforms and standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [lo, hi], inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(next_u64() % span);
  }

  /// Standard normal via Box-Muller (two draws per variate, none cached).
  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log1p(-u1));
    return r * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 eng_;
};

/// Renders a double with 17 significant digits; round-trips exactly.
inline std::string fmt_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// FNV-1a over raw 64-bit words; used for content-hash identities.
struct Fnv1a {
  std::uint64_t h = 1469598103934665603ull;
  void add(std::uint64_t w) {
    for (int b = 0; b < 8; ++b) {
      h ^= (w >> (8 * b)) & 0xff;
      h *= 1099511628211ull;
    }
  }
  void add_double(double d) {
    std::uint64_t w;
    static_assert(sizeof(w) == sizeof(d));
    __builtin_memcpy(&w, &d, 8);
    add(w);
  }
};

inline double frac_part(double v) { return v - std::floor(v); }

/// Distance to the nearest integer.
inline double fractionality(double v) {
  const double f = frac_part(v);
  return std::min(f, 1.0 - f);
}

inline bool is_integral(double v, double tol) { return fractionality(v) <= tol; }

inline double norm2(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

/// round-half-up, used everywhere a ratio is turned into a count
inline long round_half_up(double v) { return static_cast<long>(std::floor(v + 0.5)); }

}  // namespace cutsel
