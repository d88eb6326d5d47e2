#pragma once

#include <stdexcept>
#include <string>

namespace etd {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shapes of matrices/vectors that must agree do not.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// The target policy takes an action the behavior policy never takes.
class CoverageError : public Error {
 public:
  using Error::Error;
};

/// A linear-algebra routine could not produce a trustworthy answer.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class SingularSystemError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// The chain has no unique, strictly positive stationary distribution.
class ReducibleChainError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// A learner produced a non-finite parameter, trace or emphasis.
class DivergenceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace etd
