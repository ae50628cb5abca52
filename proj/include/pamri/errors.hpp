#pragma once

#include <stdexcept>
#include <string>

namespace pamri {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Mismatched or invalid array dimensions.
struct ShapeError : Error {
  using Error::Error;
};

/// Invalid configuration values (bad JSON, inconsistent parameters).
struct ConfigError : Error {
  using Error::Error;
};

/// Numerical failure inside a solver (NaN/Inf, underdetermined system).
struct NumericalError : Error {
  using Error::Error;
};

/// Filesystem / serialization failure.
struct IoError : Error {
  using Error::Error;
};

}  // namespace pamri
