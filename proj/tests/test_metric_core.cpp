#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "test_support.hpp"
#include "umed/errors.hpp"
#include "umed/numeric.hpp"
#include "umed/oracle.hpp"
#include "umed/rng.hpp"
#include "umed/space.hpp"
#include "umed/space_io.hpp"
#include "umed/validate.hpp"

using namespace umed;
namespace ts = test_support;

TEST_CASE("format_double round-trips and is stable") {
  for (double v : {0.0, 1.0, 1.5, 0.1, 9.0, 2772588723.0, 1e-12, 1.0 / 3.0}) {
    const std::string s = format_double(v);
    CHECK(std::stod(s) == v);
    CHECK(format_double(v) == s);
  }
  CHECK(format_double(0.0) == "0");
  CHECK(format_double(9.0) == "9");
}

TEST_CASE("tolerance comparisons") {
  CHECK(approx_leq(1.0, 1.0));
  CHECK(approx_leq(1.0 + 1e-13, 1.0));
  CHECK_FALSE(approx_leq(1.0 + 1e-6, 1.0));
  CHECK(approx_eq(3.0, 3.0 + 1e-12));
  CHECK_FALSE(approx_eq(3.0, 3.1));
  // Relative scaling: large magnitudes get proportionally large slack.
  CHECK(approx_leq(1e12 + 1.0, 1e12));
  CHECK_FALSE(approx_leq(1e12 + 1e6, 1e12));
}

TEST_CASE("stream derivation separates tags and seeds") {
  CHECK(derive_stream(1, 2) == derive_stream(1, 2));
  CHECK(derive_stream(1, 2) != derive_stream(1, 3));
  CHECK(derive_stream(1, 2) != derive_stream(2, 2));
  CHECK(hash_str("k-level") != hash_str("equal-distance"));
  CHECK(hash_str("") == hash_str(""));
}

TEST_CASE("RngStream is deterministic per stream id") {
  RngStream a(42);
  RngStream b(42);
  RngStream c(43);
  bool all_equal = true;
  bool any_diff_from_c = false;
  for (int i = 0; i < 100; ++i) {
    const auto va = a.next_u64();
    all_equal = all_equal && va == b.next_u64();
    any_diff_from_c = any_diff_from_c || va != c.next_u64();
  }
  CHECK(all_equal);
  CHECK(any_diff_from_c);
}

TEST_CASE("RngStream draws respect their ranges") {
  RngStream rng(7);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 2000; ++i) {
    const auto v = rng.next_index(13);
    CHECK(v < 13);
    seen.insert(v);
  }
  CHECK(seen.size() == 13);  // all residues reachable
  for (int i = 0; i < 2000; ++i) {
    const double u = rng.next_unit();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    const double p = rng.next_unit_positive();
    CHECK(p > 0.0);
    CHECK(p <= 1.0);
  }
  for (int i = 0; i < 100; ++i) CHECK(rng.next_index(1) == 0);
  CHECK_THROWS_AS(rng.next_index(0), DomainError);
}

TEST_CASE("PointId indexing") {
  const PointId p(3);
  CHECK(p.index() == 3);
  CHECK(p.offset() == 2);
  CHECK(PointId(1) < PointId(2));
  CHECK(PointId(2) == PointId(2));
}

TEST_CASE("DistanceMatrixSpace access and bounds") {
  const auto d4 = ts::make_d4();
  CHECK(d4.size() == 4);
  CHECK(d4.at(0, 1) == 1.0);
  CHECK(d4.at(2, 3) == 2.0);
  CHECK(d4.distance(PointId(1), PointId(3)) == 4.0);
  CHECK_THROWS_AS(d4.distance(PointId(0), PointId(1)), DomainError);
  CHECK_THROWS_AS(d4.distance(PointId(1), PointId(5)), DomainError);

  CHECK_THROWS_AS(DistanceMatrixSpace(Eigen::MatrixXd(0, 0)), FormatError);
  CHECK_THROWS_AS(DistanceMatrixSpace(Eigen::MatrixXd::Zero(2, 3)),
                  FormatError);
}

TEST_CASE("matrix scaling multiplies every distance") {
  const auto scaled = ts::make_d4().scaled(7.3);
  const auto d4 = ts::make_d4();
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      CHECK(scaled.at(i, j) == doctest::Approx(7.3 * d4.at(i, j)));
  CHECK_THROWS_AS(ts::make_d4().scaled(0.0), DomainError);
  CHECK_THROWS_AS(ts::make_d4().scaled(-1.0), DomainError);
}

TEST_CASE("dendrogram LCA distances realize the worked example") {
  const DendrogramSpace tree = parse_dendrogram("((p1,p2):1,(p3,p4):2):4");
  const auto d4 = ts::make_d4();
  REQUIRE(tree.size() == 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) CHECK(tree.at(i, j) == d4.at(i, j));

  const DistanceMatrixSpace materialized = dendrogram_to_matrix(tree);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) CHECK(materialized.at(i, j) == d4.at(i, j));
}

TEST_CASE("dendrogram scaling multiplies heights") {
  const DendrogramSpace tree = parse_dendrogram("((p1,p2):1,(p3,p4):2):4");
  const DendrogramSpace big = tree.scaled(7.3);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      CHECK(big.at(i, j) == doctest::Approx(7.3 * tree.at(i, j)));
}

TEST_CASE("dendrogram construction rejects malformed trees") {
  using Node = DendrogramSpace::Node;
  const auto leaf = [](int point) {
    Node n;
    n.point = point;
    return n;
  };
  const auto internal = [](double height, std::vector<int> children) {
    Node n;
    n.height = height;
    n.children = std::move(children);
    return n;
  };

  // Duplicate leaf label.
  CHECK_THROWS_AS(
      DendrogramSpace({leaf(0), leaf(0), internal(1, {0, 1})}, 2),
      FormatError);
  // Nonpositive internal height.
  CHECK_THROWS_AS(
      DendrogramSpace({leaf(0), leaf(1), internal(0, {0, 1})}, 2),
      FormatError);
  // Parent not strictly above child.
  CHECK_THROWS_AS(
      DendrogramSpace({leaf(0), leaf(1), internal(2, {0, 1}), leaf(2),
                       internal(2, {2, 3})},
                      4),
      FormatError);
  // Single-child internal node.
  CHECK_THROWS_AS(DendrogramSpace({leaf(0), internal(1, {0})}, 1),
                  FormatError);
  // Unreachable node.
  CHECK_THROWS_AS(
      DendrogramSpace({leaf(0), leaf(1), leaf(2), internal(1, {0, 1})}, 3),
      FormatError);
  // Child used twice.
  CHECK_THROWS_AS(
      DendrogramSpace({leaf(0), internal(1, {0, 0})}, 1), FormatError);
}

TEST_CASE("matrix file round-trip") {
  ts::TempDir tmp;
  const auto path = tmp.path() / "d4.mat";
  save_matrix(ts::make_d4(), path);
  CHECK(ts::read_text(path) == "4\n0 1 4 4\n1 0 4 4\n4 4 0 2\n4 4 2 0\n");
  const DistanceMatrixSpace loaded = load_matrix(path);
  REQUIRE(loaded.size() == 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) CHECK(loaded.at(i, j) == ts::make_d4().at(i, j));
}

TEST_CASE("matrix parser skips comments and reports positions") {
  std::istringstream ok("# a comment\n 2 \n0 1\n1 0\n");
  const auto space = load_matrix(ok);
  CHECK(space.size() == 2);
  CHECK(space.at(0, 1) == 1.0);

  std::istringstream bad("2\n0 x\n1 0\n");
  try {
    load_matrix(bad);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(e.line() == 2);
    CHECK(e.column() == 3);
  }

  std::istringstream truncated("3\n0 1 1\n1 0 1\n");
  CHECK_THROWS_AS(load_matrix(truncated), FormatError);
  std::istringstream trailing("1\n0\nleftover\n");
  CHECK_THROWS_AS(load_matrix(trailing), FormatError);
  std::istringstream zero("0\n");
  CHECK_THROWS_AS(load_matrix(zero), FormatError);
}

TEST_CASE("dendrogram text round-trip and parse errors") {
  const std::string text = "((p1,p2):1,(p3,p4):2):4";
  const DendrogramSpace tree = parse_dendrogram(text);
  std::ostringstream out;
  save_dendrogram(tree, out);
  CHECK(out.str() == text + "\n");

  CHECK_THROWS_AS(parse_dendrogram("(p1):1"), FormatError);       // arity
  CHECK_THROWS_AS(parse_dendrogram("(p1,p2):0"), FormatError);    // height
  CHECK_THROWS_AS(parse_dendrogram("(p1,p2)"), FormatError);      // no height
  CHECK_THROWS_AS(parse_dendrogram("(p1,p2:1"), FormatError);     // bracket
  CHECK_THROWS_AS(parse_dendrogram("(p0,p1):1"), FormatError);    // label 0
  CHECK_THROWS_AS(parse_dendrogram("(p1,p3):1"), FormatError);    // gap
  CHECK_THROWS_AS(parse_dendrogram("((p1,p2):3,p3):1"), FormatError);
  CHECK_THROWS_AS(parse_dendrogram(""), FormatError);
  CHECK(parse_dendrogram("p1").size() == 1);
}

TEST_CASE("load_space sniffs the format") {
  ts::TempDir tmp;
  const auto mat_path = tmp.path() / "x.mat";
  const auto dend_path = tmp.path() / "x.dend";
  ts::write_text(mat_path, "2\n0 3\n3 0\n");
  ts::write_text(dend_path, "(p1,p2):3\n");
  const auto from_matrix = load_space(mat_path);
  const auto from_tree = load_space(dend_path);
  CHECK(from_matrix->size() == 2);
  CHECK(from_tree->size() == 2);
  CHECK(from_matrix->at(0, 1) == from_tree->at(0, 1));
  CHECK_THROWS_AS(load_space(tmp.path() / "missing.mat"), IoError);

  // save_space keeps the tree form only for .dend paths.
  save_space(*from_tree, tmp.path() / "copy.dend");
  CHECK(ts::read_text(tmp.path() / "copy.dend") == "(p1,p2):3\n");
  save_space(*from_tree, tmp.path() / "copy.mat");
  CHECK(ts::read_text(tmp.path() / "copy.mat") == "2\n0 3\n3 0\n");
}

TEST_CASE("validate classifies the worked examples") {
  const ValidationReport ultra = validate(ts::make_d4());
  CHECK(ultra.verdict == Verdict::Ultrametric);
  CHECK_FALSE(ultra.witness.has_value());
  CHECK(ultra.exhaustive);
  CHECK(ultra.triples_checked == 4);  // C(4,3)

  const ValidationReport metric = validate(ts::make_line3());
  CHECK(metric.verdict == Verdict::MetricOnly);
  REQUIRE(metric.witness.has_value());
  CHECK(metric.witness->x == PointId(1));
  CHECK(metric.witness->y == PointId(2));
  CHECK(metric.witness->z == PointId(3));
  CHECK(metric.witness->lhs == 2.0);
  CHECK(metric.witness->rhs == 1.0);
  CHECK(metric.witness->what == "strong-triangle");
  CHECK(verdict_name(metric.verdict) == std::string("metric-only"));
}

TEST_CASE("validate rejects broken matrices") {
  Eigen::MatrixXd diag(2, 2);
  diag << 1, 2, 2, 0;
  CHECK(validate(DistanceMatrixSpace(diag)).verdict == Verdict::Invalid);

  Eigen::MatrixXd asym(2, 2);
  asym << 0, 2, 3, 0;
  const auto asym_report = validate(DistanceMatrixSpace(asym));
  CHECK(asym_report.verdict == Verdict::Invalid);
  REQUIRE(asym_report.witness.has_value());
  CHECK(asym_report.witness->what == "symmetry");

  Eigen::MatrixXd pseudo(2, 2);
  pseudo << 0, 0, 0, 0;
  CHECK(validate(DistanceMatrixSpace(pseudo)).verdict == Verdict::Invalid);
  ValidateOptions allow;
  allow.allow_pseudo = true;
  const auto pseudo_report = validate(DistanceMatrixSpace(pseudo), allow);
  CHECK(pseudo_report.verdict == Verdict::Ultrametric);
  CHECK(pseudo_report.warnings.size() == 1);

  Eigen::MatrixXd negative(2, 2);
  negative << 0, -1, -1, 0;
  CHECK_THROWS_AS(validate(DistanceMatrixSpace(negative)), FormatError);
  Eigen::MatrixXd nan(2, 2);
  nan << 0, std::nan(""), std::nan(""), 0;
  CHECK_THROWS_AS(validate(DistanceMatrixSpace(nan)), FormatError);

  // Ordinary triangle inequality failure outranks the strong one.
  Eigen::MatrixXd far(3, 3);
  far << 0, 1, 5,
         1, 0, 1,
         5, 1, 0;
  const auto far_report = validate(DistanceMatrixSpace(far));
  CHECK(far_report.verdict == Verdict::Invalid);
  REQUIRE(far_report.witness.has_value());
  CHECK(far_report.witness->what == "triangle");
  CHECK(far_report.witness->lhs == 5.0);
  CHECK(far_report.witness->rhs == 2.0);
}

TEST_CASE("validate can sample triples above the cap") {
  ValidateOptions opts;
  opts.full_check_cap = 2;  // force sampling even on tiny spaces
  opts.sample_budget = 50'000;
  opts.seed = 5;

  const auto ultra = validate(ts::make_d4(), opts);
  CHECK(ultra.verdict == Verdict::Ultrametric);
  CHECK_FALSE(ultra.exhaustive);
  // Non-distinct draws are skipped, so the count is below the budget.
  CHECK(ultra.triples_checked > 0);
  CHECK(ultra.triples_checked <= 50'000);

  const auto metric = validate(ts::make_line3(), opts);
  CHECK(metric.verdict == Verdict::MetricOnly);  // sampling hits the triple
  CHECK_FALSE(metric.exhaustive);
}

TEST_CASE("dendrogram validation is structural") {
  const auto tree = parse_dendrogram("((p1,p2):1,(p3,p4):2):4");
  const auto report = validate(tree);
  CHECK(report.verdict == Verdict::Ultrametric);
  CHECK(report.exhaustive);
  // Dispatch through the base class reaches the same overload.
  const Space& as_space = tree;
  CHECK(validate(as_space).verdict == Verdict::Ultrametric);
}

TEST_CASE("isosceles check matches the two-largest-equal phrasing") {
  const auto pass = isosceles_check(ts::make_d4(), 1'000'000, 0);
  CHECK(pass.passed);
  CHECK(pass.exhaustive);
  CHECK_FALSE(pass.violation.has_value());

  const auto fail = isosceles_check(ts::make_line3(), 1'000'000, 0);
  CHECK_FALSE(fail.passed);
  REQUIRE(fail.violation.has_value());
  CHECK(fail.violation->x == PointId(1));
  CHECK(fail.violation->y == PointId(2));
  CHECK(fail.violation->z == PointId(3));
  CHECK(fail.violation->lhs == 2.0);
  CHECK(fail.violation->rhs == 1.0);
  CHECK(fail.violation->what == "isosceles");
}

TEST_CASE("oracle counts every query") {
  const auto d4 = ts::make_d4();
  DistanceOracle oracle(d4);
  CHECK(oracle.size() == 4);
  CHECK(oracle.query_count() == 0);
  CHECK(oracle.query(PointId(1), PointId(2)) == 1.0);
  CHECK(oracle.query(PointId(2), PointId(1)) == 1.0);
  CHECK(oracle.query(PointId(3), PointId(3)) == 0.0);
  CHECK(oracle.query_count() == 3);
  CHECK_THROWS_AS(oracle.query(PointId(0), PointId(1)), DomainError);
  CHECK(oracle.query_count() == 3);  // failed queries are not charged
}
