#pragma once

// Shared fixtures and reference implementations. The naive_* functions are
// deliberate reimplementations, kept separate from the library so tests do
// not inherit its bugs.

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "umed/space.hpp"

namespace test_support {

// The worked 4-point example: two tight pairs {1,2} and {3,4} far apart.
inline umed::DistanceMatrixSpace make_d4() {
  Eigen::MatrixXd m(4, 4);
  m << 0, 1, 4, 4,
       1, 0, 4, 4,
       4, 4, 0, 2,
       4, 4, 2, 0;
  return umed::DistanceMatrixSpace(m);
}

// Path metric on a line 1-2-3: satisfies the triangle inequality but not the
// strong one (d(1,3) = 2 > max(1, 1)).
inline umed::DistanceMatrixSpace make_line3() {
  Eigen::MatrixXd m(3, 3);
  m << 0, 1, 2,
       1, 0, 1,
       2, 1, 0;
  return umed::DistanceMatrixSpace(m);
}

inline double naive_cost(const umed::Space& s, int point_1based) {
  double total = 0.0;
  for (int j = 0; j < s.size(); ++j) total += s.at(point_1based - 1, j);
  return total;
}

// Lowest index wins ties.
inline std::pair<int, double> naive_median(const umed::Space& s) {
  int best = 1;
  double best_cost = naive_cost(s, 1);
  for (int i = 2; i <= s.size(); ++i) {
    const double c = naive_cost(s, i);
    if (c < best_cost) {
      best = i;
      best_cost = c;
    }
  }
  return {best, best_cost};
}

inline bool naive_is_ultrametric(const umed::Space& s, double rel = 1e-9) {
  const int n = s.size();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const double rhs = std::max(s.at(i, j), s.at(j, k));
        if (s.at(i, k) > rhs + rel * std::max(1.0, rhs)) return false;
      }
  return true;
}

inline bool naive_isosceles(const umed::Space& s, double rel = 1e-9) {
  const int n = s.size();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k) {
        double d[3] = {s.at(i, j), s.at(i, k), s.at(j, k)};
        std::sort(d, d + 3);
        if (d[2] - d[1] > rel * std::max(1.0, d[2])) return false;
      }
  return true;
}

// Drops the single nondeterministic line from a harness CSV.
inline std::string strip_wall_time(const std::string& csv) {
  std::istringstream in(csv);
  std::string out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("#agg,wall_time_ms,", 0) == 0) continue;
    out += line;
    out += '\n';
  }
  return out;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_text(const std::filesystem::path& path,
                       const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

// A fresh scratch directory per test binary run, removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::string tmpl =
        (std::filesystem::temp_directory_path() / "umed_test_XXXXXX").string();
    if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

// Runs the CLI binary with the given argument string, capturing both streams.
inline CliResult run_cli(const std::string& bin, const std::string& args,
                         const std::filesystem::path& scratch) {
  const auto out_path = scratch / "stdout.txt";
  const auto err_path = scratch / "stderr.txt";
  const std::string cmd = bin + " " + args + " > " + out_path.string() +
                          " 2> " + err_path.string();
  const int raw = std::system(cmd.c_str());
  CliResult result;
  if (raw != -1 && WIFEXITED(raw)) result.exit_code = WEXITSTATUS(raw);
  result.out = read_text(out_path);
  result.err = read_text(err_path);
  return result;
}

inline std::string cli_bin_from_env() {
  const char* bin = std::getenv("ULTRAMEDIAN_BIN");
  return bin ? bin : "";
}

}  // namespace test_support
