#pragma once

#include <stdexcept>
#include <string>

namespace lhsforge {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// Input data violates a documented invariant (non-Hermitian, bad trace, malformed document, ...).
class ValidationError : public Error {
   public:
    using Error::Error;
};

/// A dimension argument is out of its supported domain (e.g. d < 2).
class DimensionError : public ValidationError {
   public:
    using ValidationError::ValidationError;
};

/// Operand shapes do not agree.
class ShapeError : public ValidationError {
   public:
    using ValidationError::ValidationError;
};

/// A scalar parameter lies outside its allowed interval.
class RangeError : public ValidationError {
   public:
    using ValidationError::ValidationError;
};

/// The request exceeds what the engine is built to handle.
class CapacityError : public ValidationError {
   public:
    using ValidationError::ValidationError;
};

/// A hidden-state parameter collapsed to (numerically) zero norm.
class DegenerateParameterError : public Error {
   public:
    using Error::Error;
};

/// Training produced non-finite values.
class DivergenceError : public Error {
   public:
    using Error::Error;
};

/// Threshold estimation found no sub/super-threshold pair.
class NoBracketError : public Error {
   public:
    using Error::Error;
};

class IoError : public Error {
   public:
    using Error::Error;
};

}  // namespace lhsforge
