#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>

namespace umed {

// Tolerances for all metric-axiom and bound checks: relative 1e-9, with an
// absolute floor of 1e-12 for comparisons near zero.
inline constexpr double kRelTol = 1e-9;
inline constexpr double kAbsTol = 1e-12;

inline double tol_for(double a, double b, double rel = kRelTol,
                      double abs = kAbsTol) {
  return std::max(rel * std::max(std::fabs(a), std::fabs(b)), abs);
}

// a <= b up to tolerance.
inline bool approx_leq(double a, double b, double rel = kRelTol,
                       double abs = kAbsTol) {
  return a <= b + tol_for(a, b, rel, abs);
}

// a == b up to tolerance.
inline bool approx_eq(double a, double b, double rel = kRelTol,
                      double abs = kAbsTol) {
  return std::fabs(a - b) <= tol_for(a, b, rel, abs);
}

// Shortest round-trip decimal form. Locale-free and deterministic, so report
// files compare byte-for-byte across runs.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace umed
