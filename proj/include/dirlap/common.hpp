#pragma once

#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dirlap {

// Error with a machine-readable kind: "usage", "io", "parse", "solver",
// "precondition", "unresolved", "incomplete".
struct Error : std::runtime_error {
  std::string kind;
  Error(std::string k, const std::string& msg)
      : std::runtime_error(msg), kind(std::move(k)) {}
};

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// Shortest-17-digit formatting used wherever doubles go into text artifacts.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double sq(double x) { return x * x; }

inline constexpr double PI = 3.14159265358979323846;

// Deterministic generator for start-vector perturbations and sampling.
// Plain 64-bit LCG; value in [0,1).
struct DeterministicRng {
  std::uint64_t state;
  explicit DeterministicRng(std::uint64_t seed = 0x9E3779B97F4A7C15ULL)
      : state(seed) {}
  double next() {
    state = state * 6364136223846793005ULL + 1442695040888963407ULL;
    return double(state >> 11) * (1.0 / 9007199254740992.0);
  }
  // symmetric variant in (-1,1)
  double next_sym() { return 2.0 * next() - 1.0; }
};

}  // namespace dirlap
