#pragma once

#include <stdexcept>
#include <string>

namespace doalab {

/// Base for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Bad configuration or malformed input; the CLI maps these to exit code 2.
struct ConfigError : Error {
  using Error::Error;
};

/// Runtime numerical failure; the CLI maps these to exit code 3.
struct NumericalError : Error {
  using Error::Error;
};

struct InvalidLayoutParams : ConfigError {
  using ConfigError::ConfigError;
};

struct ParseError : ConfigError {
  using ConfigError::ConfigError;
};

struct DuplicateSensorId : ConfigError {
  using ConfigError::ConfigError;
};

struct RaggedRows : ConfigError {
  using ConfigError::ConfigError;
};

struct GridNotIntegral : ConfigError {
  using ConfigError::ConfigError;
};

struct TooManySources : ConfigError {
  using ConfigError::ConfigError;
};

struct BadSourceCount : ConfigError {
  using ConfigError::ConfigError;
};

struct NullspaceRankError : NumericalError {
  using NumericalError::NumericalError;
};

struct SingularCovariance : NumericalError {
  using NumericalError::NumericalError;
};

struct EmptySpectrum : NumericalError {
  using NumericalError::NumericalError;
};

}  // namespace doalab
