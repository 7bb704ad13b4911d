#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "umed/space.hpp"
#include "umed/validate.hpp"

namespace umed {

enum class Family { RandomDendrogram, KLevel, EqualDistance, PerturbedMetric };

const char* family_name(Family f);
Family family_from_name(std::string_view name);  // DomainError on unknown name

// Deterministic instance construction: the same spec reproduces the same
// space bit-for-bit. The per-instance RNG stream is derived from
// (seed, family, n).
struct GenSpec {
  Family family = Family::RandomDendrogram;
  int n = 1;
  std::uint64_t seed = 0;

  // k-level: level count and per-level heights (bottom first). Empty heights
  // default to 1, 2, ..., k.
  int levels = 1;
  std::vector<double> level_heights;

  // equal-distance: the common pairwise distance.
  double distance = 1.0;

  // perturbed-metric: multiplicative noise magnitude, factors in [1, 1+delta).
  double delta = 0.0;

  // random-dendrogram: merge heights drawn uniform in (height_lo, height_hi].
  double height_lo = 0.0;
  double height_hi = 1.0;
};

// Spec string form used by the CLI: `family:key=value,key=value`.
// Keys: n, seed, k, delta, c (equal-distance value), hlo, hhi.
GenSpec parse_gen_spec(std::string_view text);
std::string format_gen_spec(const GenSpec& spec);

struct Instance {
  std::shared_ptr<const Space> space;
  GenSpec spec;
  Verdict verdict = Verdict::Ultrametric;  // recorded at generation time
};

// Random binary merge tree over n leaves; merge heights strictly increase
// across the merge sequence.
DendrogramSpace gen_random_dendrogram(const GenSpec& spec);

// Balanced tree of depth k with fixed per-level heights h1 < ... < hk. Tie
// heavy by design; exercises every tie-breaking path. Seed-independent.
DendrogramSpace gen_k_level(const GenSpec& spec);

// One root of height `distance` over n leaves: all pairs equidistant.
DendrogramSpace gen_equal_distance(const GenSpec& spec);

// Starts from the random-dendrogram ultrametric with the same (n, seed),
// applies symmetric multiplicative noise in [1, 1+delta), then restores the
// ordinary triangle inequality by all-pairs shortest-path closure. The
// verdict is measured, not assumed.
DistanceMatrixSpace gen_perturbed_metric(const GenSpec& spec);

// Dispatch on family; validates and records the verdict.
Instance generate(const GenSpec& spec);

}  // namespace umed
