#pragma once

#include <stdexcept>
#include <string>

namespace vhem {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input: malformed files, mismatched shapes, invariant violations.
/// The CLI maps this family to exit code 1.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatchError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A model whose parameters violate their invariants (non-stochastic rows,
/// covariance that is not positive definite, ...).
class InvalidModelError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ParseError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class VersionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Failures of the numerical procedures themselves. Exit code 2 in the CLI.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// All-zero weights or an all -inf log-weight vector.
class DegenerateWeightsError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Estimation could not proceed (too little data for the requested model).
class EstimationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class InitializationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace vhem
