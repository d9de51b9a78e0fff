#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace trish {

/// Caller violated an interface contract (bad dimensions, empty slice, ...).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Input data is malformed or non-finite.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// LIBSVM text could not be parsed. Positions are 1-based.
class ParseError : public DataError {
 public:
  ParseError(const std::string& reason, std::size_t line, std::size_t column)
      : DataError(reason + " at line " + std::to_string(line) + ", column " +
                  std::to_string(column)),
        reason_(reason),
        line_(line),
        column_(column) {}

  const std::string& reason() const noexcept { return reason_; }
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::string reason_;
  std::size_t line_;
  std::size_t column_;
};

/// A convergence theorem's hypothesis does not hold for the supplied
/// constants. `condition()` names the failed inequality.
class HypothesisError : public std::runtime_error {
 public:
  HypothesisError(const std::string& condition, const std::string& detail)
      : std::runtime_error("hypothesis '" + condition + "' violated: " + detail),
        condition_(condition) {}

  const std::string& condition() const noexcept { return condition_; }

 private:
  std::string condition_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace trish
