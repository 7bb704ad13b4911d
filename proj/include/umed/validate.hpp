#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "umed/space.hpp"

namespace umed {

// Full O(n^3) triple validation up to this point count; larger spaces fall
// back to seeded triple sampling.
inline constexpr int kDefaultValidationCap = 2048;
inline constexpr std::int64_t kDefaultTripleSampleBudget = 2'000'000;

enum class Verdict { Ultrametric, MetricOnly, Invalid };

const char* verdict_name(Verdict v);

// A concrete failing configuration. Points are 1-based. For pair-level
// failures (symmetry, diagonal, positivity) z repeats y.
struct Witness {
  PointId x{1};
  PointId y{1};
  PointId z{1};
  double lhs = 0.0;
  double rhs = 0.0;
  std::string what;  // "diagonal", "symmetry", "positivity", "triangle",
                     // "strong-triangle", "isosceles"
  std::string describe() const;
};

struct ValidationReport {
  Verdict verdict = Verdict::Invalid;
  // First strong-triangle failure for MetricOnly; first axiom failure for
  // Invalid. Scan order is ascending (i, j, k), so the witness is stable.
  std::optional<Witness> witness;
  std::vector<std::string> warnings;  // allow_pseudo downgrades land here
  bool exhaustive = true;             // false when triples were sampled
  std::int64_t triples_checked = 0;
};

struct ValidateOptions {
  bool allow_pseudo = false;  // zero off-diagonal distances warn, not fail
  int full_check_cap = kDefaultValidationCap;
  std::int64_t sample_budget = kDefaultTripleSampleBudget;
  std::uint64_t seed = 0;  // sampled mode only
};

// Checks symmetry, zero diagonal, off-diagonal positivity, then every triple
// against the strong triangle inequality; a space that only satisfies the
// ordinary triangle inequality is MetricOnly. NaN or negative entries are a
// FormatError, not a verdict.
ValidationReport validate(const DistanceMatrixSpace& space,
                          const ValidateOptions& opts = {});

// Dendrograms are checked structurally (heights, arity, leaf labels); a
// well-formed dendrogram induces an ultrametric, no triples needed.
ValidationReport validate(const DendrogramSpace& space,
                          const ValidateOptions& opts = {});

// Dispatches on the dynamic backing type.
ValidationReport validate(const Space& space, const ValidateOptions& opts = {});

struct IsoscelesReport {
  bool passed = true;
  std::optional<Witness> violation;
  bool exhaustive = true;
  std::int64_t triples_checked = 0;
};

// Ultrametric isosceles property: in every triple the two largest pairwise
// distances are equal. Enumerates all triples when n^3 <= sample_budget,
// otherwise samples sample_budget seeded triples.
IsoscelesReport isosceles_check(const Space& space,
                                std::int64_t sample_budget,
                                std::uint64_t seed);

}  // namespace umed
