#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fcop {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid user input: bad parameters, malformed files, mismatched sizes.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class DomainError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class DimensionMismatch : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

// Failures of a numerical algorithm on otherwise valid input.
class NumericError : public Error {
 public:
  using Error::Error;
};

class NotPositiveDefinite : public NumericError {
 public:
  NotPositiveDefinite(std::size_t pivot, double value)
      : NumericError("matrix is not positive definite (pivot " + std::to_string(pivot) +
                     ", value " + std::to_string(value) + ")"),
        pivot_(pivot),
        value_(value) {}
  std::size_t pivot() const noexcept { return pivot_; }
  double value() const noexcept { return value_; }

 private:
  std::size_t pivot_;
  double value_;
};

class QuadratureError : public NumericError {
 public:
  QuadratureError(double estimate, double error_bound)
      : NumericError("quadrature did not converge (estimate " + std::to_string(estimate) +
                     ", error bound " + std::to_string(error_bound) + ")"),
        estimate_(estimate),
        error_bound_(error_bound) {}
  double estimate() const noexcept { return estimate_; }
  double error_bound() const noexcept { return error_bound_; }

 private:
  double estimate_;
  double error_bound_;
};

class BracketError : public NumericError {
 public:
  using NumericError::NumericError;
};

// Requested moment does not exist (e.g. Pareto variance with beta <= 2).
class UnsupportedVariance : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

}  // namespace fcop
