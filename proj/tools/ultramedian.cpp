// ultramedian: generate, validate and solve ultrametric 1-median instances,
// and drive the experiment harness. Exit codes: 0 success, 2 usage/domain,
// 3 I/O, 4 invalid instance, 5 failed experiment assertion.

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "umed/errors.hpp"
#include "umed/generators.hpp"
#include "umed/harness.hpp"
#include "umed/median.hpp"
#include "umed/numeric.hpp"
#include "umed/oracle.hpp"
#include "umed/space_io.hpp"
#include "umed/validate.hpp"

namespace {

struct Caps {
  int validate_cap = umed::kDefaultValidationCap;
  int audit_cap = umed::kDefaultAuditCap;
  int key_lemma_cap = umed::kDefaultKeyLemmaCap;
};

// ULTRAMEDIAN_MAX_N replaces every cap default; explicit flags still win.
bool apply_env_caps(Caps& caps, std::string& error) {
  const char* raw = std::getenv("ULTRAMEDIAN_MAX_N");
  if (!raw) return true;
  int value = 0;
  const std::string text(raw);
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() ||
      value < 1) {
    error = "ULTRAMEDIAN_MAX_N must be a positive integer, got '" + text + "'";
    return false;
  }
  caps.validate_cap = value;
  caps.audit_cap = value;
  caps.key_lemma_cap = value;
  return true;
}

struct InstanceFlags {
  std::string file;
  std::string gen;
};

void add_instance_flags(CLI::App* cmd, InstanceFlags& flags) {
  auto* file = cmd->add_option("file", flags.file, "instance file to load");
  auto* gen = cmd->add_option("--gen", flags.gen,
                              "generate the instance from a spec string, "
                              "e.g. k-level:n=64,k=3,seed=7");
  file->excludes(gen);
  gen->excludes(file);
}

std::shared_ptr<const umed::Space> resolve_instance(const InstanceFlags& flags) {
  if (!flags.gen.empty())
    return umed::generate(umed::parse_gen_spec(flags.gen)).space;
  if (!flags.file.empty()) return umed::load_space(flags.file);
  throw umed::DomainError("no instance given; pass a file or --gen SPEC");
}

// Tri-state audit toggle: unset means "on while n is small enough".
struct AuditFlags {
  std::optional<bool> forced;
  bool resolve(int n, int cap) const { return forced ? *forced : n <= cap; }
};

void add_audit_flags(CLI::App* cmd, AuditFlags& flags) {
  auto* on = cmd->add_flag_callback(
      "--audit", [&flags] { flags.forced = true; },
      "always audit against brute force");
  auto* off = cmd->add_flag_callback(
      "--no-audit", [&flags] { flags.forced = false; },
      "skip the brute-force audit");
  on->excludes(off);
  off->excludes(on);
}

struct SolverFlags {
  double epsilon = 0.25;
  double c_h = 8.0;
  double c_k = 8.0;
  std::uint64_t seed = 0;
  std::string fallback = "auto";

  umed::ApproxParams to_params() const {
    umed::ApproxParams params;
    params.epsilon = epsilon;
    params.c_h = c_h;
    params.c_k = c_k;
    params.seed = seed;
    params.fallback = umed::fallback_from_name(fallback);
    return params;
  }
};

void add_solver_flags(CLI::App* cmd, SolverFlags& flags) {
  cmd->add_option("--epsilon", flags.epsilon, "accuracy parameter in (0, 1)")
      ->capture_default_str();
  cmd->add_option("--c_h", flags.c_h, "candidate-count scale constant")
      ->capture_default_str();
  cmd->add_option("--c_k", flags.c_k, "evaluator-count scale constant")
      ->capture_default_str();
  cmd->add_option("--seed", flags.seed, "solver seed")->capture_default_str();
  cmd->add_option("--fallback", flags.fallback,
                  "fallback policy: auto, sample or exact")
      ->check(CLI::IsMember({"auto", "sample", "exact"}))
      ->capture_default_str();
}

// Generator description built from flags, used by the experiment subcommands.
struct GenFlags {
  std::string file;  // load a fixed instance instead of generating
  std::string gen;   // full spec string; overrides the field flags
  std::string family = "random-dendrogram";
  int n = 256;
  std::uint64_t instance_seed = 0;
  int levels = 1;
  double delta = 0.0;
  double distance = 1.0;
  double hlo = 0.0;
  double hhi = 1.0;

  umed::GenSpec to_spec() const {
    if (!gen.empty()) return umed::parse_gen_spec(gen);
    umed::GenSpec spec;
    spec.family = umed::family_from_name(family);
    spec.n = n;
    spec.seed = instance_seed;
    spec.levels = levels;
    spec.delta = delta;
    spec.distance = distance;
    spec.height_lo = hlo;
    spec.height_hi = hhi;
    return spec;
  }
};

void add_gen_flags(CLI::App* cmd, GenFlags& flags) {
  auto* file = cmd->add_option("--file", flags.file,
                               "run on a fixed instance file instead of a "
                               "generated one");
  auto* gen = cmd->add_option(
      "--gen", flags.gen, "full generator spec string; overrides the field "
                          "flags");
  file->excludes(gen);
  gen->excludes(file);
  cmd->add_option("--family", flags.family,
                  "instance family: random-dendrogram, k-level, "
                  "equal-distance or perturbed-metric")
      ->capture_default_str();
  cmd->add_option("--n", flags.n, "instance size")->capture_default_str();
  cmd->add_option("--instance-seed", flags.instance_seed, "generator seed")
      ->capture_default_str();
  cmd->add_option("--levels", flags.levels, "k-level: number of levels")
      ->capture_default_str();
  cmd->add_option("--delta", flags.delta,
                  "perturbed-metric: relative noise amplitude")
      ->capture_default_str();
  cmd->add_option("--distance", flags.distance,
                  "equal-distance: the common distance")
      ->capture_default_str();
  cmd->add_option("--hlo", flags.hlo, "random-dendrogram: lowest height")
      ->capture_default_str();
  cmd->add_option("--hhi", flags.hhi, "random-dendrogram: highest height")
      ->capture_default_str();
}

void print_witness(const std::optional<umed::Witness>& witness) {
  if (witness) std::cout << "witness " << witness->describe() << '\n';
}

int emit_report(const umed::TrialBatchReport& report, const std::string& csv,
                const std::string& json) {
  if (csv.empty()) {
    report.write_csv(std::cout);
  } else {
    std::ofstream out(csv, std::ios::binary);
    if (!out) throw umed::IoError("cannot open " + csv + " for writing");
    report.write_csv(out);
    if (!out.good()) throw umed::IoError("short write to " + csv);
  }
  if (!json.empty()) {
    std::ofstream out(json, std::ios::binary);
    if (!out) throw umed::IoError("cannot open " + json + " for writing");
    out << report.to_json();
    if (!out.good()) throw umed::IoError("short write to " + json);
  }
  std::cerr << umed::experiment_name(report.experiment) << ": "
            << report.rows.size() << " rows, assertions "
            << (report.assertions_passed ? "passed" : "FAILED") << ", "
            << report.wall_time_ms << " ms\n";
  return report.assertions_passed ? 0 : 5;
}

}  // namespace

int main(int argc, char** argv) {
  Caps caps;
  {
    std::string error;
    if (!apply_env_caps(caps, error)) {
      std::cerr << "error: " << error << '\n';
      return 2;
    }
  }

  CLI::App app{"ultrametric 1-median toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "ultramedian 0.1.0");

  // gen
  std::string gen_spec_text;
  std::string gen_out;
  auto* gen_cmd =
      app.add_subcommand("gen", "generate an instance and write it to a file");
  gen_cmd->add_option("spec", gen_spec_text, "generator spec string")
      ->required();
  gen_cmd->add_option("out", gen_out,
                      "output path (.dend keeps the tree form, anything else "
                      "gets the matrix form)")
      ->required();

  // validate
  InstanceFlags validate_instance;
  bool allow_pseudo = false;
  int full_check_cap = caps.validate_cap;
  std::int64_t sample_budget = umed::kDefaultTripleSampleBudget;
  std::uint64_t validate_seed = 0;
  auto* validate_cmd = app.add_subcommand(
      "validate", "check the ultrametric axioms and the isosceles property");
  add_instance_flags(validate_cmd, validate_instance);
  validate_cmd->add_flag("--allow-pseudo", allow_pseudo,
                         "accept zero off-diagonal distances with a warning");
  validate_cmd
      ->add_option("--full-check-cap", full_check_cap,
                   "largest n checked by full triple enumeration")
      ->capture_default_str();
  validate_cmd
      ->add_option("--sample-budget", sample_budget,
                   "triple samples when n exceeds the full-check cap")
      ->capture_default_str();
  validate_cmd->add_option("--seed", validate_seed, "triple-sampling seed")
      ->capture_default_str();

  // solve and solve-exact
  InstanceFlags solve_instance;
  SolverFlags solver;
  AuditFlags solve_audit;
  int solve_audit_cap = caps.audit_cap;
  bool require_ultrametric = false;
  bool use_theorem = false;
  auto* solve_cmd = app.add_subcommand(
      "solve", "run the sampling solver on an instance");
  add_instance_flags(solve_cmd, solve_instance);
  add_solver_flags(solve_cmd, solver);
  add_audit_flags(solve_cmd, solve_audit);
  solve_cmd
      ->add_option("--audit-cap", solve_audit_cap,
                   "largest n audited by default")
      ->capture_default_str();
  solve_cmd->add_flag("--require-ultrametric", require_ultrametric,
                      "refuse instances that are not ultrametric");
  solve_cmd->add_flag("--theorem", use_theorem,
                      "run with epsilon/4 so the plain (1+epsilon) contract "
                      "applies");

  InstanceFlags exact_instance;
  std::uint64_t exact_seed = 0;
  auto* exact_cmd = app.add_subcommand(
      "solve-exact", "brute-force 1-median through the query oracle");
  add_instance_flags(exact_cmd, exact_instance);
  exact_cmd->add_option("--seed", exact_seed, "unused, kept for symmetry")
      ->capture_default_str();

  // experiment
  auto* exp_cmd =
      app.add_subcommand("experiment", "run a seeded experiment batch");
  exp_cmd->require_subcommand(1);

  GenFlags exp_gen;
  SolverFlags exp_solver;
  AuditFlags exp_audit;
  int trials = 100;
  int parallelism = 1;
  int exp_audit_cap = caps.audit_cap;
  int key_lemma_cap = caps.key_lemma_cap;
  std::string csv_path;
  std::string json_path;
  std::optional<double> min_success;
  int flip_a = 1;
  int flip_b = 2;
  std::optional<std::int64_t> flip_k;
  std::vector<double> sweep_epsilons{0.1, 0.25, 0.5};
  std::vector<std::string> sweep_families{"random-dendrogram", "k-level"};

  const auto add_common = [&](CLI::App* cmd) {
    add_gen_flags(cmd, exp_gen);
    add_solver_flags(cmd, exp_solver);
    add_audit_flags(cmd, exp_audit);
    cmd->add_option("--trials,--instances", trials,
                    "trial (or instance) count")
        ->capture_default_str();
    cmd->add_option("--parallelism", parallelism, "worker thread count")
        ->capture_default_str();
    cmd->add_option("--audit-cap", exp_audit_cap, "largest auditable n")
        ->capture_default_str();
    cmd->add_option("--csv", csv_path, "CSV output path (default: stdout)");
    cmd->add_option("--json", json_path, "JSON output path (optional)");
  };

  auto* sr_cmd = exp_cmd->add_subcommand(
      "success-rate", "how often the sampled pick lands within the ratio "
                      "threshold on one instance");
  add_common(sr_cmd);
  sr_cmd->add_option("--min-success", min_success,
                     "assert the success fraction reaches this floor");

  auto* fr_cmd = exp_cmd->add_subcommand(
      "flip-rate", "how often a costlier point beats a cheaper one on a "
                   "sampled sum");
  add_common(fr_cmd);
  fr_cmd->add_option("--a", flip_a, "cheaper point (1-based)")
      ->capture_default_str();
  fr_cmd->add_option("--b", flip_b, "costlier point (1-based)")
      ->capture_default_str();
  fr_cmd->add_option("--k", flip_k, "evaluator count override");

  auto* kl_cmd = exp_cmd->add_subcommand(
      "key-lemma", "exhaustive ordering-bound check over generated instances");
  add_common(kl_cmd);
  kl_cmd->add_option("--key-lemma-cap", key_lemma_cap, "largest checkable n")
      ->capture_default_str();

  auto* rs_cmd = exp_cmd->add_subcommand(
      "ratio-sweep", "observed ratio percentiles over an (epsilon, family) "
                     "grid");
  add_common(rs_cmd);
  rs_cmd->add_option("--epsilons", sweep_epsilons, "epsilon grid")
      ->capture_default_str();
  rs_cmd->add_option("--families", sweep_families, "family grid")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*gen_cmd) {
      const umed::GenSpec spec = umed::parse_gen_spec(gen_spec_text);
      const umed::Instance instance = umed::generate(spec);
      umed::save_space(*instance.space, gen_out);
      std::cout << "instance " << umed::format_gen_spec(spec) << '\n';
      std::cout << "n " << instance.space->size() << '\n';
      std::cout << "verdict " << umed::verdict_name(instance.verdict) << '\n';
      std::cout << "wrote " << gen_out << '\n';
      return 0;
    }

    if (*validate_cmd) {
      const auto space = resolve_instance(validate_instance);
      umed::ValidateOptions opts;
      opts.allow_pseudo = allow_pseudo;
      opts.full_check_cap = full_check_cap;
      opts.sample_budget = sample_budget;
      opts.seed = validate_seed;
      const umed::ValidationReport report = umed::validate(*space, opts);
      std::cout << "n " << space->size() << '\n';
      std::cout << "verdict " << umed::verdict_name(report.verdict) << '\n';
      std::cout << "exhaustive " << (report.exhaustive ? "true" : "false")
                << '\n';
      std::cout << "triples_checked " << report.triples_checked << '\n';
      print_witness(report.witness);
      for (const auto& warning : report.warnings)
        std::cout << "warning " << warning << '\n';
      if (report.verdict != umed::Verdict::Invalid) {
        const umed::IsoscelesReport iso =
            umed::isosceles_check(*space, sample_budget, validate_seed);
        std::cout << "isosceles " << (iso.passed ? "pass" : "fail") << '\n';
        print_witness(iso.violation);
      }
      return report.verdict == umed::Verdict::Ultrametric ? 0 : 4;
    }

    if (*solve_cmd) {
      const auto space = resolve_instance(solve_instance);
      const int n = space->size();
      const umed::ValidationReport report = umed::validate(*space);
      if (report.verdict == umed::Verdict::Invalid ||
          (require_ultrametric &&
           report.verdict != umed::Verdict::Ultrametric)) {
        std::cout << "verdict " << umed::verdict_name(report.verdict) << '\n';
        print_witness(report.witness);
        return 4;
      }
      const bool audit = solve_audit.resolve(n, solve_audit_cap);
      umed::DistanceOracle oracle(*space);
      const umed::ApproxParams params = solver.to_params();
      const umed::MedianReport med =
          use_theorem ? umed::approx_median_theorem(oracle, params, audit)
                      : umed::approx_median(oracle, params, audit);
      std::cout << "verdict " << umed::verdict_name(report.verdict) << '\n';
      std::cout << med.to_kv_text();
      return 0;
    }

    if (*exact_cmd) {
      const auto space = resolve_instance(exact_instance);
      umed::DistanceOracle oracle(*space);
      umed::ApproxParams params;
      params.seed = exact_seed;
      params.fallback = umed::FallbackPolicy::ForceExact;
      const umed::MedianReport med = umed::approx_median(oracle, params, true);
      std::cout << med.to_kv_text();
      return 0;
    }

    if (*exp_cmd) {
      umed::TrialBatchSpec spec;
      if (!exp_gen.file.empty()) {
        spec.prebuilt = umed::load_space(exp_gen.file);
        spec.label = exp_gen.file;
      } else {
        spec.instance = exp_gen.to_spec();
      }
      spec.params = exp_solver.to_params();
      spec.trials = trials;
      spec.parallelism = parallelism;
      const int exp_n =
          spec.prebuilt ? spec.prebuilt->size() : spec.instance.n;
      spec.audit = exp_audit.resolve(exp_n, exp_audit_cap);
      spec.audit_cap = exp_audit_cap;
      spec.key_lemma_cap = key_lemma_cap;
      spec.k_override = flip_k;
      spec.min_success = min_success;

      umed::TrialBatchReport report;
      if (*sr_cmd) {
        spec.experiment = umed::ExperimentKind::SuccessRate;
        report = umed::run_success_rate(spec);
      } else if (*fr_cmd) {
        spec.experiment = umed::ExperimentKind::FlipRate;
        report = umed::run_flip_rate(spec, umed::PointId(flip_a),
                                     umed::PointId(flip_b));
      } else if (*kl_cmd) {
        spec.experiment = umed::ExperimentKind::KeyLemma;
        report = umed::run_key_lemma(spec);
      } else {
        spec.experiment = umed::ExperimentKind::RatioSweep;
        std::vector<umed::Family> families;
        families.reserve(sweep_families.size());
        for (const auto& name : sweep_families)
          families.push_back(umed::family_from_name(name));
        report = umed::run_ratio_sweep(spec, sweep_epsilons, families);
      }
      return emit_report(report, csv_path, json_path);
    }

    throw umed::DomainError("no subcommand selected");
  } catch (const umed::DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const umed::FormatError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  } catch (const umed::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 1;
  }
}
