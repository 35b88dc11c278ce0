#pragma once

#include <stdexcept>
#include <string>

namespace segan {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Dimension disagreement between matrices or layers.
struct ShapeError : Error {
    using Error::Error;
};

// Bad configuration value, flag, or variant name.
struct ConfigError : Error {
    using Error::Error;
};

// Malformed input file (CSV, config JSON, model file).
struct ParseError : Error {
    using Error::Error;
};

// Data does not match the schema it is being used with.
struct SchemaError : Error {
    using Error::Error;
};

// Non-finite loss or gradient during training.
struct DivergenceError : Error {
    using Error::Error;
};

// Scoring impossible (empty holdout, single-class split, ...).
struct EvalError : Error {
    using Error::Error;
};

// Dataset too small or otherwise unusable for the requested operation.
struct DatasetError : Error {
    using Error::Error;
};

}  // namespace segan
