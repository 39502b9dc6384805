#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fmcq {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text. Line and column are 1-based; 0 means unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : Error(format(what, line, column)), line_(line), column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  static std::string format(const std::string& what, std::size_t line, std::size_t column) {
    if (line == 0) return what;
    return std::to_string(line) + ":" + std::to_string(column) + ": " + what;
  }

  std::size_t line_;
  std::size_t column_;
};

/// Input is well formed but uses a construct outside the supported subset.
class UnsupportedConstruct : public Error {
 public:
  explicit UnsupportedConstruct(const std::string& what)
      : Error("unsupported construct: " + what) {}
};

/// A feature model violates a structural invariant.
class ModelError : public Error {
 public:
  using Error::Error;
};

/// A query or table operation referenced something that does not resolve.
class QueryError : public Error {
 public:
  using Error::Error;
};

/// A size guard was exceeded (exhaustive enumeration, wide constraint tables).
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// A named entity (model, session, feature) does not exist.
class NotFound : public Error {
 public:
  using Error::Error;
};

}  // namespace fmcq
