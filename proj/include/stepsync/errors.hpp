#pragma once

#include <stdexcept>

namespace stepsync {

/// Base class for all stepsync errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or arguments. Maps to CLI exit code 1.
struct ValidationError : Error {
  using Error::Error;
};

/// Malformed or insufficient data encountered while processing.
/// Maps to CLI exit code 2.
struct DataError : Error {
  using Error::Error;
};

struct EmptySeries : DataError {
  using DataError::DataError;
};
struct InsufficientBaseline : DataError {
  using DataError::DataError;
};
struct InvalidWindow : ValidationError {
  using ValidationError::ValidationError;
};
struct BumpOverlap : DataError {
  using DataError::DataError;
};
struct MalformedTrace : DataError {
  using DataError::DataError;
};
struct InsufficientData : DataError {
  using DataError::DataError;
};
struct DegenerateRegressor : DataError {
  using DataError::DataError;
};
struct UndefinedBaselinePerturbation : DataError {
  using DataError::DataError;
};
struct MissingCue : ValidationError {
  using ValidationError::ValidationError;
};
struct EmptyCell : DataError {
  using DataError::DataError;
};
struct SchemaError : DataError {
  using DataError::DataError;
};
struct ConfigError : ValidationError {
  using ValidationError::ValidationError;
};

}  // namespace stepsync
