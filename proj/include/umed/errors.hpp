#pragma once

#include <stdexcept>
#include <string>

namespace umed {

// Bad arguments or parameters (epsilon out of range, invalid point id,
// malformed generator spec, cap violations).
class DomainError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Malformed input data: unparseable files, non-square matrices, negative or
// NaN distances, structurally broken dendrograms. Distinct from a space that
// parses fine but fails the metric axioms (that is a validation verdict, not
// an exception).
class FormatError : public std::runtime_error {
public:
  explicit FormatError(const std::string& msg)
      : std::runtime_error(msg), line_(0), column_(0) {}
  FormatError(const std::string& msg, int line, int column)
      : std::runtime_error("line " + std::to_string(line) + ", column " +
                           std::to_string(column) + ": " + msg),
        line_(line),
        column_(column) {}

  int line() const { return line_; }      // 1-based, 0 when not positional
  int column() const { return column_; }  // 1-based, 0 when not positional

private:
  int line_;
  int column_;
};

// Filesystem-level failures (cannot open, cannot write).
class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace umed
