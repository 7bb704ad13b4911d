#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "umed/generators.hpp"
#include "umed/median.hpp"

namespace umed {

// Ratio audits need the full cost vector; refuse above this point count
// unless auditing is switched off.
inline constexpr int kDefaultAuditCap = 10'000;
// The key-lemma sweep always needs the full cost vector.
inline constexpr int kDefaultKeyLemmaCap = 4'096;

enum class ExperimentKind { SuccessRate, FlipRate, KeyLemma, RatioSweep };

const char* experiment_name(ExperimentKind kind);
ExperimentKind experiment_from_name(std::string_view name);

struct TrialBatchSpec {
  GenSpec instance;
  // When set, overrides `instance`: every trial sees this space instead of a
  // generated one (ratio-sweep refuses it; the grid generates per family).
  std::shared_ptr<const Space> prebuilt;
  std::string label;  // meta echo for a prebuilt instance, e.g. its path
  ApproxParams params;  // params.seed is the master seed for trial streams
  int trials = 1;
  int parallelism = 1;
  ExperimentKind experiment = ExperimentKind::SuccessRate;

  bool audit = true;
  int audit_cap = kDefaultAuditCap;
  int key_lemma_cap = kDefaultKeyLemmaCap;

  std::optional<std::int64_t> k_override;  // flip-rate: pin the evaluator count
  std::optional<double> min_success;       // success-rate: assert a floor
};

// One CSV row. The meaning of `ratio` depends on the experiment:
//   success-rate / ratio-sweep: audited cost(selected)/cost(OPT),
//   flip-rate: sampled sum(b)/sum(a) (a flip is ratio <= 1),
//   key-lemma: worst cost(p_ell) / (bound_ell * cost(OPT)) over ell.
struct TrialRow {
  int trial = 0;
  std::uint64_t seed = 0;  // per-trial stream id, derived from (master, trial)
  std::optional<double> ratio;
  std::int64_t queries_used = 0;
  std::string mode;
  std::vector<std::string> extra;  // values for TrialBatchReport::extra_columns
};

struct TrialBatchReport {
  ExperimentKind experiment = ExperimentKind::SuccessRate;

  std::vector<std::pair<std::string, std::string>> meta;  // spec echo
  std::vector<std::string> extra_columns;
  std::vector<TrialRow> rows;  // sorted by trial index

  std::optional<double> success_fraction;  // experiment-dependent estimate
  std::optional<double> mean_ratio;
  std::optional<double> p95_ratio;
  // Extra aggregate lines, each emitted as `#agg,key,values...`.
  std::vector<std::pair<std::string, std::vector<std::string>>> aggregates;

  bool assertions_passed = true;
  std::vector<std::string> failures;

  // Wall time is the one nondeterministic field; it lives on its own line
  // (`#agg,wall_time_ms,...`) so byte comparisons can drop it.
  std::int64_t wall_time_ms = 0;

  void write_csv(std::ostream& out) const;
  std::string to_csv() const;
  std::string to_json() const;  // serialized mirror of the CSV content
};

// Runs `trials` independent solver calls on one generated instance and
// measures how often the audited ratio stays within (1+eps)(1+2eps). Trial i
// draws from the stream derived from (master seed, i). Throws DomainError when
// the instance exceeds the audit cap and auditing is on.
TrialBatchReport run_success_rate(const TrialBatchSpec& spec);

// Estimates the probability that a strictly costlier point b beats a on a
// fresh evaluator sample, next to the exp(-eps^2 k / 64) bound. Requires the
// audited gap cost(b) > (1+eps) cost(a); throws DomainError naming the actual
// ratio otherwise.
TrialBatchReport run_flip_rate(const TrialBatchSpec& spec, PointId a, PointId b);

struct KeyLemmaCheck {
  int violations = 0;
  double max_usage = 0.0;  // worst cost(p_ell) / (bound * cost(OPT))
  double min_slack = 1.0;  // (bound - actual)/bound, tightest point
  double max_slack = 0.0;  // loosest point
};

// Deterministic check of the ordering bound on one space: for every ell,
// cost(p_ell) <= (1 + (ell-1)/(n-ell+1)) * cost(OPT) within tolerance.
KeyLemmaCheck check_key_lemma(const Space& space);

// check_key_lemma over `trials` generated instances with derived seeds. Any
// violation is a failed assertion.
TrialBatchReport run_key_lemma(const TrialBatchSpec& spec);

// Observational grid over (epsilon, family): fixed trials per cell, ratio
// percentiles per cell, no assertions.
TrialBatchReport run_ratio_sweep(const TrialBatchSpec& spec,
                                 const std::vector<double>& epsilons,
                                 const std::vector<Family>& families);

}  // namespace umed
