#pragma once

#include <exception>
#include <stdexcept>
#include <string>

namespace dialectkit {

/// Error taxonomy. Process exit codes: 0 success, 2 configuration,
/// 3 data, 4 backend.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BackendFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InsufficientData : DataError {
    using DataError::DataError;
};

struct UnknownClass : DataError {
    using DataError::DataError;
};

struct DegenerateData : DataError {
    using DataError::DataError;
};

struct EmptyEvalSet : DataError {
    using DataError::DataError;
};

struct EmptyPool : DataError {
    using DataError::DataError;
};

struct EmptyHypothesisSet : DataError {
    using DataError::DataError;
};

struct LengthMismatch : DataError {
    using DataError::DataError;
};

struct ZeroVector : DataError {
    using DataError::DataError;
};

struct MissingExamples : DataError {
    using DataError::DataError;
};

struct MismatchedTestSets : DataError {
    using DataError::DataError;
};

inline int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e) != nullptr) return 2;
    if (dynamic_cast<const DataError*>(&e) != nullptr) return 3;
    if (dynamic_cast<const BackendFailure*>(&e) != nullptr) return 4;
    return 1;
}

} // namespace dialectkit
