#include "umed/generators.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>
#include <utility>

#include "umed/numeric.hpp"
#include "umed/rng.hpp"

namespace umed {

const char* family_name(Family f) {
  switch (f) {
    case Family::RandomDendrogram: return "random-dendrogram";
    case Family::KLevel: return "k-level";
    case Family::EqualDistance: return "equal-distance";
    case Family::PerturbedMetric: return "perturbed-metric";
  }
  return "?";
}

Family family_from_name(std::string_view name) {
  if (name == "random-dendrogram") return Family::RandomDendrogram;
  if (name == "k-level") return Family::KLevel;
  if (name == "equal-distance") return Family::EqualDistance;
  if (name == "perturbed-metric") return Family::PerturbedMetric;
  throw DomainError("unknown instance family: " + std::string(name));
}

namespace {

std::uint64_t instance_stream(const GenSpec& spec) {
  // hash(seed, family, n)
  const std::uint64_t with_family =
      derive_stream(spec.seed, hash_str(family_name(spec.family)));
  return derive_stream(with_family, static_cast<std::uint64_t>(spec.n));
}

void check_common(const GenSpec& spec) {
  if (spec.n < 1) throw DomainError("instance size n must be >= 1");
}

DendrogramSpace single_leaf() {
  std::vector<DendrogramSpace::Node> nodes(1);
  nodes[0].point = 0;
  return DendrogramSpace(std::move(nodes), 0);
}

// Splits `count` leaves into up to `branch` near-equal groups and recurses;
// heights[level-1] is the current node's height, leaves sit at level 0 or
// wherever only one point is left.
int build_k_level(std::vector<DendrogramSpace::Node>& nodes, int first,
                  int count, int level, int branch,
                  const std::vector<double>& heights) {
  if (count == 1 || level == 0) {
    if (count != 1)
      throw DomainError("k-level: branching exhausted before splitting " +
                        std::to_string(count) + " points");
    DendrogramSpace::Node leaf;
    leaf.point = first;
    nodes.push_back(std::move(leaf));
    return static_cast<int>(nodes.size() - 1);
  }
  const int groups = std::min(branch, count);
  std::vector<int> children;
  children.reserve(groups);
  int offset = first;
  for (int g = 0; g < groups; ++g) {
    const int size = count / groups + (g < count % groups ? 1 : 0);
    children.push_back(
        build_k_level(nodes, offset, size, level - 1, branch, heights));
    offset += size;
  }
  DendrogramSpace::Node node;
  node.height = heights[level - 1];
  node.children = std::move(children);
  nodes.push_back(std::move(node));
  return static_cast<int>(nodes.size() - 1);
}

}  // namespace

DendrogramSpace gen_random_dendrogram(const GenSpec& spec) {
  check_common(spec);
  if (!(spec.height_hi > 0.0) || spec.height_lo < 0.0 ||
      !(spec.height_lo < spec.height_hi))
    throw DomainError("random-dendrogram: need 0 <= hlo < hhi");
  const int n = spec.n;
  if (n == 1) return single_leaf();

  RngStream rng(instance_stream(spec));

  // Merge heights: n-1 uniform draws from (hlo, hhi], sorted, collisions
  // separated by 1e-12 spacing so the increase is strict.
  const double span = spec.height_hi - spec.height_lo;
  std::vector<double> heights(n - 1);
  for (double& h : heights)
    h = spec.height_lo + span * rng.next_unit_positive();
  std::sort(heights.begin(), heights.end());
  for (std::size_t i = 1; i < heights.size(); ++i)
    if (heights[i] <= heights[i - 1]) heights[i] = heights[i - 1] + 1e-12;

  std::vector<DendrogramSpace::Node> nodes;
  nodes.reserve(2 * n - 1);
  std::vector<int> clusters(n);
  for (int i = 0; i < n; ++i) {
    DendrogramSpace::Node leaf;
    leaf.point = i;
    nodes.push_back(std::move(leaf));
    clusters[i] = i;
  }

  for (int t = 0; t < n - 1; ++t) {
    const std::uint64_t m = clusters.size();
    const auto first = rng.next_index(m);
    auto second = rng.next_index(m - 1);
    if (second >= first) ++second;
    const auto a = std::min(first, second);
    const auto b = std::max(first, second);

    DendrogramSpace::Node merged;
    merged.height = heights[t];
    merged.children = {clusters[a], clusters[b]};
    nodes.push_back(std::move(merged));

    clusters[a] = static_cast<int>(nodes.size() - 1);
    clusters[b] = clusters.back();  // swap-remove keeps the pick O(1)
    clusters.pop_back();
  }
  return DendrogramSpace(std::move(nodes), clusters[0]);
}

DendrogramSpace gen_k_level(const GenSpec& spec) {
  check_common(spec);
  const int k = spec.levels;
  if (k < 1) throw DomainError("k-level: level count must be >= 1");

  std::vector<double> heights = spec.level_heights;
  if (heights.empty()) {
    heights.resize(k);
    for (int i = 0; i < k; ++i) heights[i] = i + 1;
  }
  if (static_cast<int>(heights.size()) != k)
    throw DomainError("k-level: expected " + std::to_string(k) + " heights");
  double prev = 0.0;
  for (double h : heights) {
    if (!(h > prev))
      throw DomainError("k-level: heights must be positive and strictly "
                        "increasing");
    prev = h;
  }

  if (spec.n == 1) return single_leaf();

  // Smallest branching factor whose k-fold power covers n.
  int branch = std::max(
      2, static_cast<int>(std::ceil(std::pow(double(spec.n), 1.0 / k))));
  while (std::pow(double(branch), k) < double(spec.n)) ++branch;

  std::vector<DendrogramSpace::Node> nodes;
  nodes.reserve(2 * spec.n);
  const int root = build_k_level(nodes, 0, spec.n, k, branch, heights);
  return DendrogramSpace(std::move(nodes), root);
}

DendrogramSpace gen_equal_distance(const GenSpec& spec) {
  check_common(spec);
  if (!(spec.distance > 0.0))
    throw DomainError("equal-distance: distance must be positive");
  GenSpec level = spec;
  level.levels = 1;
  level.level_heights = {spec.distance};
  return gen_k_level(level);
}

DistanceMatrixSpace gen_perturbed_metric(const GenSpec& spec) {
  check_common(spec);
  if (spec.delta < 0.0) throw DomainError("perturbed-metric: delta must be >= 0");

  GenSpec base_spec = spec;
  base_spec.family = Family::RandomDendrogram;
  Eigen::MatrixXd d = dendrogram_to_matrix(gen_random_dendrogram(base_spec)).matrix();
  const int n = spec.n;

  RngStream rng(instance_stream(spec));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double factor = 1.0 + spec.delta * rng.next_unit();
      d(i, j) *= factor;
      d(j, i) = d(i, j);
    }

  // Shortest-path closure restores the ordinary triangle inequality. The
  // noise only inflates entries, so paths can only shrink them back.
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double via = d(i, k) + d(k, j);
        if (via < d(i, j)) d(i, j) = via;
      }

  return DistanceMatrixSpace(std::move(d));
}

Instance generate(const GenSpec& spec) {
  Instance instance;
  instance.spec = spec;
  switch (spec.family) {
    case Family::RandomDendrogram: {
      auto space = std::make_shared<DendrogramSpace>(gen_random_dendrogram(spec));
      instance.verdict = validate(*space).verdict;
      instance.space = std::move(space);
      break;
    }
    case Family::KLevel: {
      auto space = std::make_shared<DendrogramSpace>(gen_k_level(spec));
      instance.verdict = validate(*space).verdict;
      instance.space = std::move(space);
      break;
    }
    case Family::EqualDistance: {
      auto space = std::make_shared<DendrogramSpace>(gen_equal_distance(spec));
      instance.verdict = validate(*space).verdict;
      instance.space = std::move(space);
      break;
    }
    case Family::PerturbedMetric: {
      auto space = std::make_shared<DistanceMatrixSpace>(gen_perturbed_metric(spec));
      instance.verdict = validate(*space).verdict;
      instance.space = std::move(space);
      break;
    }
  }
  return instance;
}

namespace {

double parse_value(std::string_view text, std::string_view key) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = text.data() + text.size();
  auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc() || res.ptr != end)
    throw DomainError("gen spec: bad numeric value for '" + std::string(key) +
                      "': " + std::string(text));
  return value;
}

}  // namespace

GenSpec parse_gen_spec(std::string_view text) {
  GenSpec spec;
  const auto colon = text.find(':');
  spec.family = family_from_name(text.substr(0, colon));
  bool have_n = false;

  std::string_view rest = colon == std::string_view::npos
                              ? std::string_view{}
                              : text.substr(colon + 1);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    std::string_view item = rest.substr(0, comma);
    rest = comma == std::string_view::npos ? std::string_view{}
                                           : rest.substr(comma + 1);
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string_view::npos)
      throw DomainError("gen spec: expected key=value, got '" +
                        std::string(item) + "'");
    const std::string_view key = item.substr(0, eq);
    const std::string_view value = item.substr(eq + 1);
    if (key == "n") {
      spec.n = static_cast<int>(parse_value(value, key));
      have_n = true;
    } else if (key == "seed") {
      spec.seed = static_cast<std::uint64_t>(parse_value(value, key));
    } else if (key == "k") {
      spec.levels = static_cast<int>(parse_value(value, key));
    } else if (key == "delta") {
      spec.delta = parse_value(value, key);
    } else if (key == "c") {
      spec.distance = parse_value(value, key);
    } else if (key == "hlo") {
      spec.height_lo = parse_value(value, key);
    } else if (key == "hhi") {
      spec.height_hi = parse_value(value, key);
    } else {
      throw DomainError("gen spec: unknown key '" + std::string(key) + "'");
    }
  }
  if (!have_n) throw DomainError("gen spec: missing n");
  return spec;
}

std::string format_gen_spec(const GenSpec& spec) {
  std::string out = family_name(spec.family);
  out += ":n=" + std::to_string(spec.n);
  out += ",seed=" + std::to_string(spec.seed);
  switch (spec.family) {
    case Family::KLevel:
      out += ",k=" + std::to_string(spec.levels);
      break;
    case Family::EqualDistance:
      out += ",c=" + format_double(spec.distance);
      break;
    case Family::PerturbedMetric:
      out += ",delta=" + format_double(spec.delta);
      break;
    case Family::RandomDendrogram:
      break;
  }
  return out;
}

}  // namespace umed
