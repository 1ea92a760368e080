#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace van {

/// Base class for every error raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not line up.
struct DimensionMismatch : Error {
  using Error::Error;
};

/// A Cholesky (or eigen) factorization failed: the matrix is not
/// numerically positive-definite.
struct FactorizationFailure : Error {
  using Error::Error;
};

/// An operation was requested that the objective does not support.
struct CapabilityMissing : Error {
  using Error::Error;
};

/// A NaN or infinity appeared where a finite value is required.
struct NonFiniteValue : Error {
  using Error::Error;
};

/// A marginal variance collapsed below the supported floor.
struct DegenerateVariance : Error {
  using Error::Error;
};

/// A matrix that must be positive-definite is not.
struct NotPositiveDefinite : Error {
  using Error::Error;
};

/// A regularization strength was negative.
struct NegativeRegularization : Error {
  using Error::Error;
};

/// Classification labels outside {-1, +1}.
struct BadLabels : Error {
  using Error::Error;
};

/// A data split is empty or absent.
struct EmptySplit : Error {
  using Error::Error;
};

/// An index or argument fell outside its valid range.
struct OutOfRange : Error {
  using Error::Error;
};

/// The candidate pool is smaller than the requested batch.
struct PoolTooSmall : Error {
  using Error::Error;
};

/// A text input could not be parsed; carries the 1-based location.
struct ParseError : Error {
  ParseError(std::size_t line, std::size_t column, const std::string& reason)
      : Error("parse error at line " + std::to_string(line) + ", column " +
              std::to_string(column) + ": " + reason),
        line(line),
        column(column),
        reason(reason) {}

  std::size_t line;
  std::size_t column;
  std::string reason;
};

/// Labels incompatible with the declared label domain.
struct LabelDomainError : Error {
  using Error::Error;
};

/// A configuration value is invalid or inconsistent.
struct BadParams : Error {
  using Error::Error;
};

/// A step-size safeguard ran out of retries.
struct SafeguardExhausted : Error {
  using Error::Error;
};

/// An iterative solver hit its iteration budget without converging.
struct MaxItersExceeded : Error {
  using Error::Error;
};

/// CSV inputs whose headers (schemas) disagree.
struct SchemaMismatch : Error {
  using Error::Error;
};

}  // namespace van
