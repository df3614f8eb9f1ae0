#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tiprel {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inputs that violate an operation's precondition (bad dimensions, non-finite
/// entries, out-of-range parameters).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A matrix expected to be symmetric positive definite is not.
class NotSpd : public Error {
 public:
  using Error::Error;
};

/// Malformed text input. `line` is 1-based; 0 when the error is not tied to a
/// particular line.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Bad configuration or command line; `what()` names the offending key.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Too many chains of an ensemble produced non-finite positions.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace tiprel
