#pragma once

#include <stdexcept>
#include <string>

namespace gllab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad or inconsistent configuration; the message names the offending key.
class ConfigInvalid : public Error {
 public:
  using Error::Error;
};

/// Input that violates an operation's precondition (shapes, grids, caps).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

class SizeCapExceeded : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

class TimeGridMismatch : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

/// Base of every failure that originates in the numerics rather than the input.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class QuadratureDiverged : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class RootNotBracketed : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NonFiniteState : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class CFLViolation : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NonFiniteField : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NotMeanZero : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DegenerateEstimate : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace gllab
