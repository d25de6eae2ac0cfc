#pragma once

#include <stdexcept>
#include <string>

namespace hoam {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the domain of an operation (bad geometry, empty data, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A sampled quantity cannot represent the requested structure without aliasing.
class SamplingError : public Error {
 public:
  SamplingError(const std::string& what, double nyquist_ratio = 0.0)
      : Error(what), nyquist_ratio_(nyquist_ratio) {}

  /// Offending ratio to the admissible limit (> 1 means violated); 0 if not applicable.
  double nyquist_ratio() const noexcept { return nyquist_ratio_; }

 private:
  double nyquist_ratio_;
};

/// Least-squares fit did not converge or is ill-posed.
class FitError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent scenario / configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// File could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// A geometric approximation (linearised mask) exceeds its validity range.
class ApproximationError : public DomainError {
 public:
  ApproximationError(const std::string& what, double sagitta)
      : DomainError(what), sagitta_(sagitta) {}

  double sagitta() const noexcept { return sagitta_; }

 private:
  double sagitta_;
};

/// Alice's projector annihilates the state: no conditional mode exists.
class OrthogonalProjectionError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// A transfer whose charges cancel leaves no OAM to entangle.
class DegenerateTransferError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Quantity is mathematically undefined for the input (e.g. orientation of a pure vortex).
class UndefinedError : public DomainError {
 public:
  using DomainError::DomainError;
};

}  // namespace hoam
