#pragma once

#include <stdexcept>
#include <string>

namespace afcmem {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller passed a value outside an operation's domain.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Errors a well-formed input can still trigger inside a computation.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class InvalidSpectrum : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

class GridMismatch : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

class ResolutionError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class BandwidthError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class WindowOverlapError : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

class TrainTooLongError : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

class NoPeriodicityError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class RankDeficientError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NyquistError : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

class InsufficientDataError : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

class SequenceConflictError : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

namespace detail {

inline void require(bool condition, const std::string& message) {
  if (!condition) throw InvalidInput(message);
}

}  // namespace detail
}  // namespace afcmem
