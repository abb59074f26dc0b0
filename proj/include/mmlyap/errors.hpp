#pragma once

#include <stdexcept>
#include <string>

namespace mmlyap {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite numbers, dimension mismatches, malformed matrices.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Configuration text that does not follow the grammar.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line, int column)
      : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

/// Expression evaluated outside its domain (sqrt of a negative, division by zero).
class DomainError : public Error {
 public:
  DomainError(const std::string& what, std::string subexpr)
      : Error(what + " in '" + subexpr + "'"), subexpr_(std::move(subexpr)) {}

  const std::string& subexpression() const noexcept { return subexpr_; }

 private:
  std::string subexpr_;
};

/// An operation was called outside its documented precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// No region contains the queried point.
class CoverageError : public Error {
 public:
  using Error::Error;
};

/// Internal consistency check failed; signals a bug or an over-approximated active set.
class InternalError : public Error {
 public:
  using Error::Error;
};

}  // namespace mmlyap
