#include "umed/validate.hpp"

#include <array>
#include <cmath>

#include "umed/numeric.hpp"
#include "umed/rng.hpp"

namespace umed {

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Ultrametric: return "ultrametric";
    case Verdict::MetricOnly: return "metric-only";
    case Verdict::Invalid: return "invalid";
  }
  return "?";
}

std::string Witness::describe() const {
  std::string s = what + " at (" + std::to_string(x.index()) + "," +
                  std::to_string(y.index());
  if (z != y) s += "," + std::to_string(z.index());
  s += "): " + format_double(lhs);
  s += what == "isosceles" ? " != " : " > ";
  s += format_double(rhs);
  return s;
}

namespace {

// Sorted pairwise distances of the triple (i < j < k) plus the orientation of
// the largest one, expressed as (x, middle, z) with d(x, z) the maximum.
struct TripleView {
  double largest, second, smallest;
  int x, via, z;
};

TripleView view_triple(const Space& s, int i, int j, int k) {
  const double dij = s.at(i, j);
  const double dik = s.at(i, k);
  const double djk = s.at(j, k);
  TripleView v{};
  if (dij >= dik && dij >= djk) {
    v = {dij, std::max(dik, djk), std::min(dik, djk), i, k, j};
  } else if (dik >= dij && dik >= djk) {
    v = {dik, std::max(dij, djk), std::min(dij, djk), i, j, k};
  } else {
    v = {djk, std::max(dij, dik), std::min(dij, dik), j, i, k};
  }
  return v;
}

Witness make_witness(const char* what, int x, int y, int z, double lhs,
                     double rhs) {
  return Witness{PointId(x + 1), PointId(y + 1), PointId(z + 1), lhs, rhs,
                 what};
}

// Checks one triple. Returns false (with a witness) on an ordinary-triangle
// violation; records the first strong-triangle failure otherwise.
bool check_triple(const Space& s, int i, int j, int k,
                  std::optional<Witness>& strong_failure,
                  std::optional<Witness>& triangle_failure) {
  const TripleView v = view_triple(s, i, j, k);
  // Strong triangle for every rotation reduces to: the largest distance must
  // not exceed the second largest.
  if (!approx_leq(v.largest, v.second)) {
    if (!strong_failure)
      strong_failure = make_witness("strong-triangle", v.x, v.via, v.z,
                                    v.largest, v.second);
    if (!approx_leq(v.largest, v.second + v.smallest)) {
      triangle_failure = make_witness("triangle", v.x, v.via, v.z, v.largest,
                                      v.second + v.smallest);
      return false;
    }
  }
  return true;
}

}  // namespace

ValidationReport validate(const DistanceMatrixSpace& space,
                          const ValidateOptions& opts) {
  const auto& d = space.matrix();
  const int n = space.size();
  ValidationReport report;

  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double v = d(i, j);
      if (std::isnan(v))
        throw FormatError("NaN distance at (" + std::to_string(i + 1) + "," +
                          std::to_string(j + 1) + ")");
      if (v < 0.0)
        throw FormatError("negative distance at (" + std::to_string(i + 1) +
                          "," + std::to_string(j + 1) + ")");
    }

  for (int i = 0; i < n; ++i) {
    if (d(i, i) != 0.0) {
      report.verdict = Verdict::Invalid;
      report.witness = make_witness("diagonal", i, i, i, d(i, i), 0.0);
      return report;
    }
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      if (!approx_eq(d(i, j), d(j, i))) {
        report.verdict = Verdict::Invalid;
        report.witness = make_witness("symmetry", i, j, j, d(i, j), d(j, i));
        return report;
      }
      if (d(i, j) <= 0.0) {
        if (opts.allow_pseudo) {
          if (report.warnings.empty())
            report.warnings.push_back(
                "zero off-diagonal distance at (" + std::to_string(i + 1) +
                "," + std::to_string(j + 1) + "); pseudo-metric allowed");
        } else {
          report.verdict = Verdict::Invalid;
          report.witness = make_witness("positivity", i, j, j, d(i, j), 0.0);
          return report;
        }
      }
    }

  std::optional<Witness> strong_failure;
  std::optional<Witness> triangle_failure;
  if (n <= opts.full_check_cap) {
    for (int i = 0; i < n && !triangle_failure; ++i)
      for (int j = i + 1; j < n && !triangle_failure; ++j)
        for (int k = j + 1; k < n; ++k) {
          ++report.triples_checked;
          if (!check_triple(space, i, j, k, strong_failure, triangle_failure))
            break;
        }
  } else {
    report.exhaustive = false;
    RngStream rng(derive_stream(opts.seed, static_cast<std::uint64_t>(n)));
    for (std::int64_t t = 0; t < opts.sample_budget && !triangle_failure; ++t) {
      const int i = static_cast<int>(rng.next_index(n));
      const int j = static_cast<int>(rng.next_index(n));
      const int k = static_cast<int>(rng.next_index(n));
      if (i == j || i == k || j == k) continue;
      ++report.triples_checked;
      check_triple(space, i, j, k, strong_failure, triangle_failure);
    }
  }

  if (triangle_failure) {
    report.verdict = Verdict::Invalid;
    report.witness = triangle_failure;
  } else if (strong_failure) {
    report.verdict = Verdict::MetricOnly;
    report.witness = strong_failure;
  } else {
    report.verdict = Verdict::Ultrametric;
  }
  return report;
}

ValidationReport validate(const DendrogramSpace& space,
                          const ValidateOptions&) {
  // Structure was enforced at construction; re-walk it anyway so a report on
  // a dendrogram never lies about what was checked.
  ValidationReport report;
  report.verdict = Verdict::Ultrametric;
  for (int id = 0; id < space.node_count(); ++id) {
    const auto& node = space.node(id);
    if (node.children.empty()) continue;
    for (int child : node.children) {
      if (!(space.node(child).height < node.height)) {
        report.verdict = Verdict::Invalid;
        report.witness = Witness{PointId(1), PointId(1), PointId(1),
                                 space.node(child).height, node.height,
                                 "tree-heights"};
        return report;
      }
    }
  }
  return report;
}

ValidationReport validate(const Space& space, const ValidateOptions& opts) {
  if (auto* m = dynamic_cast<const DistanceMatrixSpace*>(&space))
    return validate(*m, opts);
  if (auto* t = dynamic_cast<const DendrogramSpace*>(&space))
    return validate(*t, opts);
  throw DomainError("validate: unknown space backing");
}

IsoscelesReport isosceles_check(const Space& space,
                                std::int64_t sample_budget,
                                std::uint64_t seed) {
  const int n = space.size();
  IsoscelesReport report;

  auto check = [&](int i, int j, int k) {
    ++report.triples_checked;
    const TripleView v = view_triple(space, i, j, k);
    if (!approx_eq(v.largest, v.second)) {
      report.passed = false;
      report.violation =
          make_witness("isosceles", v.x, v.via, v.z, v.largest, v.second);
      return false;
    }
    return true;
  };

  const double cube = static_cast<double>(n) * n * n;
  if (cube <= static_cast<double>(sample_budget)) {
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        for (int k = j + 1; k < n; ++k)
          if (!check(i, j, k)) return report;
  } else {
    report.exhaustive = false;
    RngStream rng(derive_stream(seed, static_cast<std::uint64_t>(n)));
    for (std::int64_t t = 0; t < sample_budget; ++t) {
      const int i = static_cast<int>(rng.next_index(n));
      const int j = static_cast<int>(rng.next_index(n));
      const int k = static_cast<int>(rng.next_index(n));
      if (i == j || i == k || j == k) continue;
      if (!check(i, j, k)) return report;
    }
  }
  return report;
}

}  // namespace umed
