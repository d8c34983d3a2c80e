#pragma once

#include <stdexcept>
#include <string>

namespace nf {

// Base class for everything thrown by this library. CLI maps subclasses to
// exit codes: configuration/input problems -> 2, numeric/runtime failures -> 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input or configuration problems (exit code 2 territory).
class ConfigError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class IndexOutOfRange : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class NodeOutOfRange : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class TooFewSamples : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class InvalidConfig : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class InvalidLambda : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class IoError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

// Numeric failures discovered while running (exit code 3 territory).
class NumericError : public Error {
 public:
  using Error::Error;
};

class NotPositiveDefinite : public NumericError {
 public:
  NotPositiveDefinite(const std::string& what, int pivot_index)
      : NumericError(what), pivot(pivot_index) {}
  // Zero-based index of the pivot at which the factorization failed.
  int pivot;
};

class SingularBlock : public NumericError {
 public:
  using NumericError::NumericError;
};

class ZeroVariance : public NumericError {
 public:
  using NumericError::NumericError;
};

class DomainError : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace nf
