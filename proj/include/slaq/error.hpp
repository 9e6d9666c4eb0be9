#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace slaq {

/// Base class for every error raised by the library. Anything derived from
/// it is a data error (bad input, unsupported graph, numerical failure), as
/// opposed to a programming or usage error.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed text input; carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Input violates a precondition (wrong range, edgeless graph, size cap).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// An iterative solver ran out of steps. Carries whatever it had.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> best)
      : Error(what), best_(std::move(best)) {}

  const std::vector<double>& best_estimates() const noexcept { return best_; }

 private:
  std::vector<double> best_;
};

}  // namespace slaq
