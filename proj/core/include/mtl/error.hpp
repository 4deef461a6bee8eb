#pragma once

#include <stdexcept>
#include <string>

namespace mtl {

/// Raised when a configuration or argument violates a documented precondition.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when an iterative solver exhausts its budget. Carries the last
/// diagnostics so callers can log or record them per sweep row.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, int iterations, double residual)
      : std::runtime_error(what), iterations_(iterations), residual_(residual) {}

  int iterations() const noexcept { return iterations_; }
  double residual() const noexcept { return residual_; }

 private:
  int iterations_;
  double residual_;
};

/// Raised when the coupling matrix C(eta) is not positive definite.
class NotPositiveDefinite : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace mtl
