#pragma once

#include <stdexcept>
#include <string>

namespace infoconf {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The operation would produce an infinite value (performance exactly 0 or 1
/// fed into a logarithm). Raised instead of returning a non-finite number.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// An iterative solver ran out of budget.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double last_residual)
      : Error(what), last_residual_(last_residual) {}

  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_residual_;
};

/// Malformed or missing input data (files, CSV rows, JSON documents, flags).
class InputError : public Error {
 public:
  using Error::Error;
};

/// The data is well formed but a configured policy forbids proceeding, e.g. a
/// degenerate recognition rate without an explicit override.
class PolicyError : public Error {
 public:
  using Error::Error;
};

}  // namespace infoconf
