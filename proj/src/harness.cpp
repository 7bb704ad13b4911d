#include "umed/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "umed/errors.hpp"
#include "umed/numeric.hpp"
#include "umed/oracle.hpp"
#include "umed/validate.hpp"

namespace umed {

const char* experiment_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::SuccessRate: return "success-rate";
    case ExperimentKind::FlipRate: return "flip-rate";
    case ExperimentKind::KeyLemma: return "key-lemma";
    case ExperimentKind::RatioSweep: return "ratio-sweep";
  }
  return "?";
}

ExperimentKind experiment_from_name(std::string_view name) {
  if (name == "success-rate") return ExperimentKind::SuccessRate;
  if (name == "flip-rate") return ExperimentKind::FlipRate;
  if (name == "key-lemma") return ExperimentKind::KeyLemma;
  if (name == "ratio-sweep") return ExperimentKind::RatioSweep;
  throw DomainError("unknown experiment: " + std::string(name));
}

namespace {

class WallClock {
 public:
  std::int64_t elapsed_ms() const {
    const auto dt = std::chrono::steady_clock::now() - start_;
    return std::chrono::duration_cast<std::chrono::milliseconds>(dt).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ =
      std::chrono::steady_clock::now();
};

// Nearest-rank percentile over an ascending vector.
double nearest_rank(const std::vector<double>& sorted, double q) {
  const auto rank = static_cast<std::size_t>(
      std::ceil(q * static_cast<double>(sorted.size())));
  return sorted[std::min(sorted.size() - 1, rank == 0 ? 0 : rank - 1)];
}

void fill_ratio_stats(TrialBatchReport& report) {
  std::vector<double> ratios;
  ratios.reserve(report.rows.size());
  for (const auto& row : report.rows)
    if (row.ratio) ratios.push_back(*row.ratio);
  if (ratios.empty()) return;
  double sum = 0.0;
  for (double r : ratios) sum += r;
  report.mean_ratio = sum / static_cast<double>(ratios.size());
  std::sort(ratios.begin(), ratios.end());
  report.p95_ratio = nearest_rank(ratios, 0.95);
}

void push_common_meta(TrialBatchReport& report, const TrialBatchSpec& spec,
                      const SampleSizes& sizes, const std::string& label,
                      int n) {
  auto& meta = report.meta;
  meta.emplace_back("instance", label);
  meta.emplace_back("n", std::to_string(n));
  meta.emplace_back("epsilon", format_double(spec.params.epsilon));
  meta.emplace_back("c_h", format_double(spec.params.c_h));
  meta.emplace_back("c_k", format_double(spec.params.c_k));
  meta.emplace_back("h", std::to_string(sizes.h));
  meta.emplace_back("k", std::to_string(sizes.k));
  meta.emplace_back("master_seed", std::to_string(spec.params.seed));
  meta.emplace_back("trials", std::to_string(spec.trials));
  meta.emplace_back("fallback", fallback_name(spec.params.fallback));
  meta.emplace_back("audit", spec.audit ? "on" : "off");
}

// Full cost vector shared across trials, so each audit is a lookup rather
// than a fresh brute-force pass.
struct AuditTable {
  std::vector<double> costs;
  double opt_cost = 0.0;

  explicit AuditTable(const Space& space) : costs(all_costs(space)) {
    opt_cost = *std::min_element(costs.begin(), costs.end());
  }

  double ratio_of(PointId p) const {
    const double c = costs[static_cast<std::size_t>(p.offset())];
    if (opt_cost > 0.0) return c / opt_cost;
    return c > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
  }
};

template <typename Fn>
void for_each_trial(int trials, int parallelism, Fn&& body) {
  const int workers = std::clamp(parallelism, 1, std::max(1, trials));
  if (workers <= 1) {
    for (int t = 0; t < trials; ++t) body(t);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int t = next.fetch_add(1); t < trials; t = next.fetch_add(1))
        body(t);
    });
  for (auto& th : pool) th.join();
}

void require_trials(int trials) {
  if (trials < 1) throw DomainError("trial count must be >= 1");
}

struct ResolvedInstance {
  std::shared_ptr<const Space> space;
  Verdict verdict = Verdict::Invalid;
  std::string label;
};

ResolvedInstance resolve_instance(const TrialBatchSpec& spec) {
  ResolvedInstance out;
  if (spec.prebuilt) {
    out.space = spec.prebuilt;
    out.verdict = validate(*out.space).verdict;
    out.label = spec.label.empty() ? "prebuilt" : spec.label;
  } else {
    Instance inst = generate(spec.instance);
    out.space = std::move(inst.space);
    out.verdict = inst.verdict;
    out.label = format_gen_spec(spec.instance);
  }
  return out;
}

}  // namespace

TrialBatchReport run_success_rate(const TrialBatchSpec& spec) {
  WallClock clock;
  require_trials(spec.trials);
  const SampleSizes sizes =
      params_hk(spec.params.epsilon, spec.params.c_h, spec.params.c_k);

  const ResolvedInstance instance = resolve_instance(spec);
  const Space& space = *instance.space;
  const int n = space.size();
  if (spec.audit && n > spec.audit_cap)
    throw DomainError("auditing needs the full cost vector and n=" +
                      std::to_string(n) + " exceeds the audit cap " +
                      std::to_string(spec.audit_cap) +
                      "; disable auditing or raise the cap");
  if (!spec.audit && spec.min_success)
    throw DomainError("a success floor needs audited ratios; enable auditing");

  const double eps = spec.params.epsilon;
  const double threshold = (1.0 + eps) * (1.0 + 2.0 * eps);

  TrialBatchReport report;
  report.experiment = ExperimentKind::SuccessRate;
  push_common_meta(report, spec, sizes, instance.label, n);
  report.meta.emplace_back("verdict", verdict_name(instance.verdict));
  report.meta.emplace_back("threshold", format_double(threshold));
  report.extra_columns = {"selected"};
  report.rows.resize(static_cast<std::size_t>(spec.trials));

  std::optional<AuditTable> audit;
  if (spec.audit) audit.emplace(space);

  for_each_trial(spec.trials, spec.parallelism, [&](int t) {
    ApproxParams p = spec.params;
    p.seed = derive_stream(spec.params.seed, static_cast<std::uint64_t>(t) + 1);
    DistanceOracle oracle(space);
    const MedianReport med = approx_median(oracle, p, false);

    TrialRow row;
    row.trial = t + 1;
    row.seed = p.seed;
    if (audit) row.ratio = audit->ratio_of(med.selected);
    row.queries_used = med.queries_used;
    row.mode = mode_name(med.mode);
    row.extra = {std::to_string(med.selected.index())};
    report.rows[static_cast<std::size_t>(t)] = std::move(row);
  });

  if (audit) {
    int ok = 0;
    int tight = 0;
    for (const auto& row : report.rows) {
      if (approx_leq(*row.ratio, threshold)) ++ok;
      if (approx_leq(*row.ratio, 1.0 + eps)) ++tight;
    }
    report.success_fraction = static_cast<double>(ok) / spec.trials;
    report.aggregates.push_back(
        {"frac_within_eps",
         {format_double(static_cast<double>(tight) / spec.trials)}});
    fill_ratio_stats(report);
    if (spec.min_success &&
        !(*report.success_fraction >= *spec.min_success)) {
      report.assertions_passed = false;
      report.failures.push_back(
          "success fraction " + format_double(*report.success_fraction) +
          " fell below the required floor " +
          format_double(*spec.min_success));
    }
  }

  report.wall_time_ms = clock.elapsed_ms();
  return report;
}

TrialBatchReport run_flip_rate(const TrialBatchSpec& spec, PointId a,
                               PointId b) {
  WallClock clock;
  require_trials(spec.trials);
  const SampleSizes sizes =
      params_hk(spec.params.epsilon, spec.params.c_h, spec.params.c_k);

  const ResolvedInstance instance = resolve_instance(spec);
  const Space& space = *instance.space;
  const int n = space.size();
  if (a.offset() < 0 || a.offset() >= n || b.offset() < 0 || b.offset() >= n)
    throw DomainError("flip-rate: points a and b must lie in 1.." +
                      std::to_string(n));

  const double eps = spec.params.epsilon;
  const double cost_a = cost(space, a);
  const double cost_b = cost(space, b);
  const double gap =
      cost_a > 0.0 ? cost_b / cost_a
                   : std::numeric_limits<double>::infinity();
  if (!(cost_b > (1.0 + eps) * cost_a))
    throw DomainError(
        "flip-rate needs cost(b) > (1+epsilon) cost(a); the pair's cost "
        "ratio is " +
        format_double(gap));

  const std::int64_t k = spec.k_override ? *spec.k_override : sizes.k;
  if (k < 1) throw DomainError("flip-rate: evaluator count must be >= 1");
  const double bound = std::exp(-eps * eps * static_cast<double>(k) / 64.0);

  TrialBatchReport report;
  report.experiment = ExperimentKind::FlipRate;
  push_common_meta(report, spec, sizes, instance.label, n);
  report.meta.emplace_back("verdict", verdict_name(instance.verdict));
  report.meta.emplace_back("a", std::to_string(a.index()));
  report.meta.emplace_back("b", std::to_string(b.index()));
  report.meta.emplace_back("cost_a", format_double(cost_a));
  report.meta.emplace_back("cost_b", format_double(cost_b));
  report.meta.emplace_back("gap_ratio", format_double(gap));
  report.meta.emplace_back("k_used", std::to_string(k));
  report.meta.emplace_back("flip_bound", format_double(bound));
  report.extra_columns = {"sum_a", "sum_b", "flip"};
  report.rows.resize(static_cast<std::size_t>(spec.trials));

  std::atomic<int> flips{0};
  for_each_trial(spec.trials, spec.parallelism, [&](int t) {
    RngStream rng(
        derive_stream(spec.params.seed, static_cast<std::uint64_t>(t) + 1));
    const std::vector<PointId> evaluators =
        sample_points(n, k, rng);  // one sample, both sums read it
    DistanceOracle oracle(space);
    double sum_a = 0.0;
    double sum_b = 0.0;
    for (const PointId v : evaluators) sum_a += oracle.query(a, v);
    for (const PointId v : evaluators) sum_b += oracle.query(b, v);
    const bool flip = sum_b <= sum_a;
    if (flip) flips.fetch_add(1, std::memory_order_relaxed);

    TrialRow row;
    row.trial = t + 1;
    row.seed = derive_stream(spec.params.seed, static_cast<std::uint64_t>(t) + 1);
    row.ratio = sum_a > 0.0
                    ? sum_b / sum_a
                    : (sum_b > 0.0 ? std::numeric_limits<double>::infinity()
                                   : 1.0);
    row.queries_used = oracle.query_count();
    row.mode = "sampled";
    row.extra = {format_double(sum_a), format_double(sum_b), flip ? "1" : "0"};
    report.rows[static_cast<std::size_t>(t)] = std::move(row);
  });

  const double flip_fraction =
      static_cast<double>(flips.load()) / spec.trials;
  report.success_fraction = flip_fraction;
  const double stderr_bound =
      std::sqrt(bound * (1.0 - bound) / static_cast<double>(spec.trials));
  report.aggregates.push_back({"flips", {std::to_string(flips.load())}});
  report.aggregates.push_back({"flip_fraction", {format_double(flip_fraction)}});
  report.aggregates.push_back({"flip_bound", {format_double(bound)}});
  fill_ratio_stats(report);

  const double ceiling = bound + 3.0 * stderr_bound;
  if (!approx_leq(flip_fraction, ceiling)) {
    report.assertions_passed = false;
    report.failures.push_back("flip fraction " + format_double(flip_fraction) +
                              " exceeds the bound " + format_double(bound) +
                              " plus three standard errors (" +
                              format_double(ceiling) + ")");
  }

  report.wall_time_ms = clock.elapsed_ms();
  return report;
}

KeyLemmaCheck check_key_lemma(const Space& space) {
  const int n = space.size();
  KeyLemmaCheck check;
  const std::vector<double> costs = all_costs(space);
  int best = 0;
  for (int i = 1; i < n; ++i)
    if (costs[static_cast<std::size_t>(i)] <
        costs[static_cast<std::size_t>(best)])
      best = i;
  const double opt = costs[static_cast<std::size_t>(best)];
  if (opt <= 0.0) {
    // Single point, or a pseudometric where every point is optimal.
    check.max_usage = 1.0;
    check.min_slack = 0.0;
    check.max_slack = 0.0;
    return check;
  }

  const std::vector<PointId> order =
      order_by_distance_from(space, PointId(best + 1));
  check.min_slack = std::numeric_limits<double>::infinity();
  for (int ell = 1; ell <= n; ++ell) {
    const double c =
        costs[static_cast<std::size_t>(order[static_cast<std::size_t>(ell - 1)]
                                           .offset())];
    const double cap = lemma_ratio_bound(ell, n) * opt;
    check.max_usage = std::max(check.max_usage, c / cap);
    const double slack = (cap - c) / cap;
    check.min_slack = std::min(check.min_slack, slack);
    check.max_slack = std::max(check.max_slack, slack);
    if (!approx_leq(c, cap)) ++check.violations;
  }
  return check;
}

TrialBatchReport run_key_lemma(const TrialBatchSpec& spec) {
  WallClock clock;
  require_trials(spec.trials);
  const int n =
      spec.prebuilt ? spec.prebuilt->size() : spec.instance.n;
  if (n > spec.key_lemma_cap)
    throw DomainError("key-lemma needs the full cost vector and n=" +
                      std::to_string(n) + " exceeds the cap " +
                      std::to_string(spec.key_lemma_cap));

  TrialBatchReport report;
  report.experiment = ExperimentKind::KeyLemma;
  report.meta.emplace_back(
      "instance", spec.prebuilt
                      ? (spec.label.empty() ? "prebuilt" : spec.label)
                      : format_gen_spec(spec.instance));
  report.meta.emplace_back("n", std::to_string(n));
  report.meta.emplace_back("master_seed", std::to_string(spec.params.seed));
  report.meta.emplace_back("trials", std::to_string(spec.trials));
  report.extra_columns = {"violations", "min_slack", "max_slack"};
  report.rows.reserve(static_cast<std::size_t>(spec.trials));

  int total_violations = 0;
  double worst_usage = 0.0;
  for (int t = 0; t < spec.trials; ++t) {
    GenSpec g = spec.instance;
    g.seed = derive_stream(spec.params.seed, static_cast<std::uint64_t>(t) + 1);
    std::shared_ptr<const Space> trial_space = spec.prebuilt;
    if (!trial_space) trial_space = generate(g).space;
    const KeyLemmaCheck check = check_key_lemma(*trial_space);
    total_violations += check.violations;
    worst_usage = std::max(worst_usage, check.max_usage);

    TrialRow row;
    row.trial = t + 1;
    row.seed = g.seed;
    row.ratio = check.max_usage;
    row.queries_used =
        static_cast<std::int64_t>(n) * (n - 1) / 2;  // full pairwise scan
    row.mode = "exhaustive";
    row.extra = {std::to_string(check.violations),
                 format_double(check.min_slack),
                 format_double(check.max_slack)};
    report.rows.push_back(std::move(row));
  }

  int clean = 0;
  for (const auto& row : report.rows)
    if (row.extra[0] == "0") ++clean;
  report.success_fraction = static_cast<double>(clean) / spec.trials;
  report.aggregates.push_back(
      {"total_violations", {std::to_string(total_violations)}});
  report.aggregates.push_back({"worst_usage", {format_double(worst_usage)}});
  fill_ratio_stats(report);

  if (total_violations > 0) {
    report.assertions_passed = false;
    report.failures.push_back(std::to_string(total_violations) +
                              " ordering-bound violations across " +
                              std::to_string(spec.trials) + " instances");
  }

  report.wall_time_ms = clock.elapsed_ms();
  return report;
}

TrialBatchReport run_ratio_sweep(const TrialBatchSpec& spec,
                                 const std::vector<double>& epsilons,
                                 const std::vector<Family>& families) {
  WallClock clock;
  require_trials(spec.trials);
  if (spec.prebuilt)
    throw DomainError(
        "ratio-sweep generates an instance per family; a fixed instance "
        "cannot be swept");
  if (epsilons.empty() || families.empty())
    throw DomainError("ratio-sweep needs at least one epsilon and one family");
  for (double e : epsilons)
    if (!(e > 0.0) || !(e < 1.0))
      throw DomainError("ratio-sweep: every epsilon must lie in (0, 1)");
  const int n = spec.instance.n;
  if (n > spec.audit_cap)
    throw DomainError("ratio-sweep audits every trial and n=" +
                      std::to_string(n) + " exceeds the audit cap " +
                      std::to_string(spec.audit_cap));

  TrialBatchReport report;
  report.experiment = ExperimentKind::RatioSweep;
  report.meta.emplace_back("n", std::to_string(n));
  report.meta.emplace_back("base_seed", std::to_string(spec.instance.seed));
  report.meta.emplace_back("master_seed", std::to_string(spec.params.seed));
  report.meta.emplace_back("trials_per_cell", std::to_string(spec.trials));
  std::string eps_list;
  for (double e : epsilons) {
    if (!eps_list.empty()) eps_list += '|';
    eps_list += format_double(e);
  }
  report.meta.emplace_back("epsilons", eps_list);
  std::string family_list;
  for (Family f : families) {
    if (!family_list.empty()) family_list += '|';
    family_list += family_name(f);
  }
  report.meta.emplace_back("families", family_list);
  report.extra_columns = {"family", "epsilon"};

  int global_trial = 0;
  for (std::size_t fi = 0; fi < families.size(); ++fi) {
    GenSpec g = spec.instance;
    g.family = families[fi];
    g.seed = derive_stream(spec.instance.seed, fi + 1);
    const Instance inst = generate(g);
    const AuditTable audit(*inst.space);

    for (double e : epsilons) {
      std::vector<double> cell;
      cell.reserve(static_cast<std::size_t>(spec.trials));
      for (int t = 0; t < spec.trials; ++t) {
        ++global_trial;
        ApproxParams p = spec.params;
        p.epsilon = e;
        p.seed = derive_stream(spec.params.seed,
                               static_cast<std::uint64_t>(global_trial));
        DistanceOracle oracle(*inst.space);
        const MedianReport med = approx_median(oracle, p, false);

        TrialRow row;
        row.trial = global_trial;
        row.seed = p.seed;
        row.ratio = audit.ratio_of(med.selected);
        row.queries_used = med.queries_used;
        row.mode = mode_name(med.mode);
        row.extra = {family_name(families[fi]), format_double(e)};
        cell.push_back(*row.ratio);
        report.rows.push_back(std::move(row));
      }
      std::sort(cell.begin(), cell.end());
      report.aggregates.push_back(
          {"cell",
           {family_name(families[fi]), format_double(e),
            format_double(nearest_rank(cell, 0.5)),
            format_double(nearest_rank(cell, 0.95)),
            format_double(cell.back())}});
    }
  }

  fill_ratio_stats(report);
  report.wall_time_ms = clock.elapsed_ms();
  return report;
}

void TrialBatchReport::write_csv(std::ostream& out) const {
  out << "#meta,experiment," << experiment_name(experiment) << '\n';
  for (const auto& [key, value] : meta)
    out << "#meta," << key << ',' << value << '\n';

  out << "trial,seed,ratio,queries_used,mode";
  for (const auto& column : extra_columns) out << ',' << column;
  out << '\n';

  for (const auto& row : rows) {
    out << row.trial << ',' << row.seed << ',';
    if (row.ratio) out << format_double(*row.ratio);
    out << ',' << row.queries_used << ',' << row.mode;
    for (const auto& value : row.extra) out << ',' << value;
    out << '\n';
  }

  if (success_fraction)
    out << "#agg,success_fraction," << format_double(*success_fraction)
        << '\n';
  if (mean_ratio) out << "#agg,mean_ratio," << format_double(*mean_ratio) << '\n';
  if (p95_ratio) out << "#agg,p95_ratio," << format_double(*p95_ratio) << '\n';
  for (const auto& [key, values] : aggregates) {
    out << "#agg," << key;
    for (const auto& value : values) out << ',' << value;
    out << '\n';
  }
  for (const auto& failure : failures) out << "#fail," << failure << '\n';
  out << "#agg,assertions_passed," << (assertions_passed ? "true" : "false")
      << '\n';
  // Deliberately last and on its own line: the one nondeterministic field.
  out << "#agg,wall_time_ms," << wall_time_ms << '\n';
}

std::string TrialBatchReport::to_csv() const {
  std::ostringstream out;
  write_csv(out);
  return out.str();
}

std::string TrialBatchReport::to_json() const {
  nlohmann::ordered_json j;
  j["experiment"] = experiment_name(experiment);
  nlohmann::ordered_json meta_obj = nlohmann::ordered_json::object();
  for (const auto& [key, value] : meta) meta_obj[key] = value;
  j["meta"] = std::move(meta_obj);

  nlohmann::ordered_json columns = nlohmann::ordered_json::array(
      {"trial", "seed", "ratio", "queries_used", "mode"});
  for (const auto& column : extra_columns) columns.push_back(column);
  j["columns"] = std::move(columns);

  nlohmann::ordered_json rows_arr = nlohmann::ordered_json::array();
  for (const auto& row : rows) {
    nlohmann::ordered_json r;
    r["trial"] = row.trial;
    r["seed"] = row.seed;
    if (row.ratio)
      r["ratio"] = *row.ratio;
    else
      r["ratio"] = nullptr;
    r["queries_used"] = row.queries_used;
    r["mode"] = row.mode;
    for (std::size_t i = 0; i < extra_columns.size() && i < row.extra.size();
         ++i)
      r[extra_columns[i]] = row.extra[i];
    rows_arr.push_back(std::move(r));
  }
  j["rows"] = std::move(rows_arr);

  nlohmann::ordered_json aggs = nlohmann::ordered_json::object();
  if (success_fraction) aggs["success_fraction"] = *success_fraction;
  if (mean_ratio) aggs["mean_ratio"] = *mean_ratio;
  if (p95_ratio) aggs["p95_ratio"] = *p95_ratio;
  nlohmann::ordered_json extra_aggs = nlohmann::ordered_json::array();
  for (const auto& [key, values] : aggregates) {
    nlohmann::ordered_json entry;
    entry["key"] = key;
    entry["values"] = values;
    extra_aggs.push_back(std::move(entry));
  }
  aggs["extra"] = std::move(extra_aggs);
  j["aggregates"] = std::move(aggs);

  j["assertions_passed"] = assertions_passed;
  j["failures"] = failures;
  j["wall_time_ms"] = wall_time_ms;
  return j.dump(2) + "\n";
}

}  // namespace umed
