#include "umed/median.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "umed/errors.hpp"
#include "umed/numeric.hpp"

namespace umed {

const char* fallback_name(FallbackPolicy f) {
  switch (f) {
    case FallbackPolicy::Auto: return "auto";
    case FallbackPolicy::ForceSample: return "sample";
    case FallbackPolicy::ForceExact: return "exact";
  }
  return "?";
}

FallbackPolicy fallback_from_name(std::string_view name) {
  if (name == "auto") return FallbackPolicy::Auto;
  if (name == "sample") return FallbackPolicy::ForceSample;
  if (name == "exact") return FallbackPolicy::ForceExact;
  throw DomainError("unknown fallback policy: " + std::string(name));
}

const char* mode_name(SolveMode m) {
  return m == SolveMode::Sampled ? "sampled" : "exact-fallback";
}

SampleSizes params_hk(double epsilon, double c_h, double c_k) {
  if (!(epsilon > 0.0) || !(epsilon < 1.0))
    throw DomainError("epsilon must lie in (0, 1)");
  if (!(c_h > 0.0) || !(c_k > 0.0))
    throw DomainError("scale constants must be positive");

  const double log_term = std::log(1.0 / epsilon);
  const double h_raw = std::ceil(c_h * log_term / epsilon);
  const double k_raw = std::ceil(c_k * log_term / epsilon / epsilon);
  // ceil results stay exactly representable well past 2^53; reject anything
  // that would not round-trip through int64.
  constexpr double kMax = 9.0e18;
  if (!(h_raw < kMax) || !(k_raw < kMax))
    throw DomainError("sample sizes overflow: shrink c_h/c_k or raise epsilon");
  SampleSizes sizes{static_cast<std::int64_t>(h_raw),
                    static_cast<std::int64_t>(k_raw)};
  if (sizes.h < 1) sizes.h = 1;
  if (sizes.k < 1) sizes.k = 1;
  return sizes;
}

double cost(const Space& space, PointId x) {
  const int n = space.size();
  const int xi = x.offset();
  if (xi < 0 || xi >= n) throw DomainError("cost: point out of range");
  double total = 0.0;
  for (int j = 0; j < n; ++j) total += space.at(xi, j);
  return total;
}

std::vector<double> all_costs(const Space& space) {
  const int n = space.size();
  std::vector<double> totals(n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double d = space.at(i, j);
      totals[i] += d;
      totals[j] += d;
    }
  return totals;
}

ExactMedian brute_force_median(const Space& space) {
  const std::vector<double> totals = all_costs(space);
  int best = 0;
  for (int i = 1; i < static_cast<int>(totals.size()); ++i)
    if (totals[i] < totals[best]) best = i;
  return ExactMedian{PointId(best + 1), totals[best]};
}

std::vector<PointId> order_by_distance_from(const Space& space,
                                            PointId origin) {
  const int n = space.size();
  const int oi = origin.offset();
  if (oi < 0 || oi >= n)
    throw DomainError("order_by_distance_from: point out of range");
  std::vector<std::pair<double, int>> keyed(n);
  for (int j = 0; j < n; ++j) keyed[j] = {space.at(oi, j), j};
  std::sort(keyed.begin(), keyed.end());
  std::vector<PointId> order;
  order.reserve(n);
  for (const auto& [d, j] : keyed) order.push_back(PointId(j + 1));
  return order;
}

std::vector<PointId> sample_points(int n, std::int64_t m, RngStream& rng) {
  if (n < 1) throw DomainError("sample_points: n must be >= 1");
  if (m < 0) throw DomainError("sample_points: sample size must be >= 0");
  std::vector<PointId> points;
  points.reserve(static_cast<std::size_t>(m));
  for (std::int64_t i = 0; i < m; ++i)
    points.push_back(
        PointId(static_cast<int>(rng.next_index(static_cast<std::uint64_t>(n))) + 1));
  return points;
}

ArgminResult empirical_argmin(DistanceOracle& oracle,
                              const std::vector<PointId>& candidates,
                              const std::vector<PointId>& evaluators) {
  if (candidates.empty()) throw DomainError("empirical_argmin: no candidates");
  ArgminResult result;
  result.sample_sums.reserve(candidates.size());
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    double sum = 0.0;
    for (const PointId v : evaluators) sum += oracle.query(candidates[i], v);
    result.sample_sums.push_back(sum);
    if (sum < best) {  // strict: ties keep the earlier candidate
      best = sum;
      result.index = static_cast<int>(i) + 1;
    }
  }
  return result;
}

double lemma_ratio_bound(std::int64_t ell, std::int64_t n) {
  if (n < 1 || ell < 1 || ell > n)
    throw DomainError("lemma_ratio_bound: need 1 <= ell <= n");
  return 1.0 + static_cast<double>(ell - 1) / static_cast<double>(n - ell + 1);
}

namespace {

// Exact scan, issuing its n(n-1)/2 reads through the oracle so the query
// counter reflects real accesses.
MedianReport exact_through_oracle(DistanceOracle& oracle, bool audit) {
  const int n = oracle.size();
  const std::int64_t before = oracle.query_count();
  std::vector<double> totals(n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double d = oracle.query(PointId(i + 1), PointId(j + 1));
      totals[i] += d;
      totals[j] += d;
    }
  int best = 0;
  for (int i = 1; i < n; ++i)
    if (totals[i] < totals[best]) best = i;

  MedianReport report;
  report.selected = PointId(best + 1);
  report.sample_cost = totals[best];
  report.queries_used = oracle.query_count() - before;
  report.mode = SolveMode::ExactFallback;
  if (audit) {
    report.exact_cost = totals[best];
    report.opt_cost = totals[best];
    report.ratio = 1.0;
  }
  return report;
}

}  // namespace

MedianReport approx_median(DistanceOracle& oracle, const ApproxParams& params,
                           bool with_exact_audit) {
  const int n = oracle.size();
  const std::int64_t before = oracle.query_count();
  const SampleSizes sizes = params_hk(params.epsilon, params.c_h, params.c_k);

  bool exact = params.fallback == FallbackPolicy::ForceExact;
  if (params.fallback == FallbackPolicy::Auto &&
      params.epsilon < std::pow(static_cast<double>(n), -2.0 / 3.0))
    exact = true;
  if (exact) return exact_through_oracle(oracle, with_exact_audit);

  if (sizes.h + sizes.k > (std::int64_t{1} << 31))
    throw DomainError(
        "sample budget h+k exceeds 2^31; use larger epsilon or smaller "
        "c_h/c_k");
  const __int128 budget = static_cast<__int128>(sizes.h) * sizes.k;
  if (budget > (__int128{1} << 40))
    throw DomainError("h*k query budget exceeds 2^40; parameters infeasible");

  RngStream rng(params.seed);
  const std::vector<PointId> candidates = sample_points(n, sizes.h, rng);
  const std::vector<PointId> evaluators = sample_points(n, sizes.k, rng);
  const ArgminResult argmin = empirical_argmin(oracle, candidates, evaluators);

  MedianReport report;
  report.selected = candidates[argmin.index - 1];
  report.sample_cost = argmin.sample_sums[argmin.index - 1];
  report.queries_used = oracle.query_count() - before;
  report.mode = SolveMode::Sampled;
  if (with_exact_audit) {
    report.exact_cost = cost(oracle.space(), report.selected);
    const ExactMedian opt = brute_force_median(oracle.space());
    report.opt_cost = opt.cost;
    report.ratio = opt.cost > 0.0 ? *report.exact_cost / opt.cost
                                  : (*report.exact_cost > 0.0
                                         ? std::numeric_limits<double>::infinity()
                                         : 1.0);
  }
  return report;
}

MedianReport approx_median_theorem(DistanceOracle& oracle,
                                   const ApproxParams& params,
                                   bool with_exact_audit) {
  ApproxParams inner = params;
  inner.epsilon = params.epsilon / 4.0;
  return approx_median(oracle, inner, with_exact_audit);
}

std::string MedianReport::csv_header() {
  return "selected,sample_cost,exact_cost,opt_cost,ratio,queries_used,mode";
}

std::string MedianReport::to_csv_row() const {
  std::string row = std::to_string(selected.index());
  row += ',' + format_double(sample_cost);
  row += ',';
  if (exact_cost) row += format_double(*exact_cost);
  row += ',';
  if (opt_cost) row += format_double(*opt_cost);
  row += ',';
  if (ratio) row += format_double(*ratio);
  row += ',' + std::to_string(queries_used);
  row += ',';
  row += mode_name(mode);
  return row;
}

std::string MedianReport::to_kv_text() const {
  std::string out;
  out += "selected " + std::to_string(selected.index()) + '\n';
  out += "sample_cost " + format_double(sample_cost) + '\n';
  if (exact_cost) out += "exact_cost " + format_double(*exact_cost) + '\n';
  if (opt_cost) out += "opt_cost " + format_double(*opt_cost) + '\n';
  if (ratio) out += "ratio " + format_double(*ratio) + '\n';
  out += "queries_used " + std::to_string(queries_used) + '\n';
  out += "mode ";
  out += mode_name(mode);
  out += '\n';
  return out;
}

}  // namespace umed
