#pragma once

#include <stdexcept>
#include <string>

namespace simba {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid argument values (fractions outside range, k >= N, lr <= 0, ...).
struct ArgumentError : Error {
    using Error::Error;
};

// Tensor shapes that do not fit together.
struct DimensionError : Error {
    using Error::Error;
};

// Everything that originates in input data maps to exit code 2.
struct DataError : Error {
    using Error::Error;
};

struct ParseError : DataError {
    using DataError::DataError;
};

struct FormatError : DataError {
    using DataError::DataError;
};

struct ConsistencyError : DataError {
    using DataError::DataError;
};

struct SplitError : DataError {
    using DataError::DataError;
};

// Divergence (NaN/Inf) during training, exit code 3.
struct NumericError : Error {
    using Error::Error;
};

// Gradient checker detected a non-deterministic loss.
struct CheckError : Error {
    using Error::Error;
};

}  // namespace simba
