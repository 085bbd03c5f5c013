#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tailfit {

// Base of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid distribution or configuration parameters.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Sample with zero spread, or too short for the requested operation.
class DegenerateSampleError : public Error {
 public:
  using Error::Error;
};

// Standard errors are not available (singular or indefinite Hessian).
class UnavailableError : public Error {
 public:
  using Error::Error;
};

// Operation refused because the fit it depends on did not converge.
class NotConvergedError : public Error {
 public:
  using Error::Error;
};

// Malformed input file. line() is 1-based, 0 when not tied to a line.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t line = 0)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  [[nodiscard]] std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Failure of the write probe (unwritable target, short write, no space).
class ProbeError : public Error {
 public:
  using Error::Error;
};

}  // namespace tailfit
