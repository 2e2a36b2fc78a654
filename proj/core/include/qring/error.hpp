#pragma once

#include <stdexcept>
#include <string>

namespace qring {

/// Base of every error raised by the simulator. The CLI maps
/// `is_numerical()` to exit code 3 and everything else to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  [[nodiscard]] virtual bool is_numerical() const noexcept { return false; }
};

/// Malformed, missing or contradictory configuration.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Physically inconsistent geometry (overlapping wells, grid too small).
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// Argument outside a function's mathematical domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
  [[nodiscard]] bool is_numerical() const noexcept override { return true; }
};

/// Discretization too coarse for the requested tolerance.
class AccuracyError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// An iterative solver failed to converge.
class SolverError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Norm drift beyond tolerance during propagation.
class StabilityError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// NaN or Inf encountered in the state.
class DivergenceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace qring
