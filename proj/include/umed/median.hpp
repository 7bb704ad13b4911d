#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "umed/oracle.hpp"
#include "umed/rng.hpp"
#include "umed/space.hpp"

namespace umed {

enum class FallbackPolicy { Auto, ForceSample, ForceExact };

const char* fallback_name(FallbackPolicy f);
FallbackPolicy fallback_from_name(std::string_view name);

// Parameters of the sampling solver. The scale constants c_h = c_k = 1e9 make
// the formal guarantee hold but are far beyond desk scale; the defaults keep
// the same shape at runnable size.
struct ApproxParams {
  double epsilon = 0.25;  // must lie in (0, 1)
  double c_h = 8.0;
  double c_k = 8.0;
  std::uint64_t seed = 0;
  FallbackPolicy fallback = FallbackPolicy::Auto;
};

struct SampleSizes {
  std::int64_t h;  // candidate count
  std::int64_t k;  // evaluator count
};

// h = ceil(c_h * ln(1/eps) / eps), k = ceil(c_k * ln(1/eps) / eps^2).
// Natural log. Throws DomainError for eps outside (0,1) or non-positive
// scale constants.
SampleSizes params_hk(double epsilon, double c_h, double c_k);

enum class SolveMode { Sampled, ExactFallback };
const char* mode_name(SolveMode m);

struct MedianReport {
  PointId selected{1};
  // Sampled mode: the winning candidate's evaluator-sample distance sum.
  // Exact mode: its full-space cost (the "sample" is everything).
  double sample_cost = 0.0;
  std::optional<double> exact_cost;  // audit only: full-space cost of selected
  std::optional<double> opt_cost;    // audit only: cost of a true 1-median
  std::optional<double> ratio;       // audit only: exact_cost / opt_cost
  std::int64_t queries_used = 0;     // h*k in sampled mode, n(n-1)/2 in exact
  SolveMode mode = SolveMode::Sampled;

  std::string to_kv_text() const;
  std::string to_csv_row() const;
  static std::string csv_header();
};

// Sum of distances from x to every point (including d(x,x) = 0). Reads the
// space directly; no oracle accounting.
double cost(const Space& space, PointId x);

// Cost of every point via pairwise accumulation: n(n-1)/2 distance reads,
// each shared by both endpoints.
std::vector<double> all_costs(const Space& space);

struct ExactMedian {
  PointId point{1};
  double cost = 0.0;
};

// Exact 1-median, ties broken by lowest index.
ExactMedian brute_force_median(const Space& space);

// Points sorted by distance from the origin ascending, ties by index; the
// origin (distance 0) comes first. With origin = a 1-median this realizes the
// ordering p_1, ..., p_n.
std::vector<PointId> order_by_distance_from(const Space& space, PointId origin);

// m i.i.d. uniform draws from [1..n], with replacement.
std::vector<PointId> sample_points(int n, std::int64_t m, RngStream& rng);

struct ArgminResult {
  int index = 1;                    // 1-based position within candidates
  std::vector<double> sample_sums;  // one sum per candidate
};

// Selects the candidate minimizing the summed distance to the evaluators,
// ties to the lowest index. Issues exactly candidates*evaluators oracle
// queries.
ArgminResult empirical_argmin(DistanceOracle& oracle,
                              const std::vector<PointId>& candidates,
                              const std::vector<PointId>& evaluators);

// 1 + (ell-1)/(n-ell+1): how much worse the ell-th closest point to a
// 1-median can be, for 1 <= ell <= n.
double lemma_ratio_bound(std::int64_t ell, std::int64_t n);

// The sampling solver. Draws h candidates and k evaluators uniformly, returns
// the empirical argmin; below the eps >= n^(-2/3) regime (policy Auto) the
// exact scan is cheaper than the sample budget, so it falls back to brute
// force. with_exact_audit adds exact cost, optimum and ratio to the report.
MedianReport approx_median(DistanceOracle& oracle, const ApproxParams& params,
                           bool with_exact_audit = false);

// Wrapper running approx_median with epsilon/4, the substitution that turns
// the inner ((1+eps)(1+2eps), 1-2eps) guarantee into a plain (1+eps) contract.
MedianReport approx_median_theorem(DistanceOracle& oracle,
                                   const ApproxParams& params,
                                   bool with_exact_audit = false);

}  // namespace umed
