#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lrsched {

// Invalid arguments: negative multipliers, zero weights, bad fractions...
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A degenerate input that would produce an unusable schedule (zero gradient
// norms, a horizon with no decay room). Callers usually fall back to linear.
class DegenerateError : public DomainError {
 public:
  using DomainError::DomainError;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error(what + " at line " + std::to_string(line)), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Non-finite loss or iterate during a run.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(std::size_t step, const std::string& what)
      : std::runtime_error(what + " at step " + std::to_string(step)), step_(step) {}

  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

}  // namespace lrsched
