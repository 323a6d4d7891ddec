#pragma once

#include <stdexcept>
#include <string>

namespace saen {

// Base for all toolkit errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A required input file is missing or unreadable.
struct IngestError : Error {
    using Error::Error;
};

// Input data violates the documented file format (carries line context).
struct FormatError : Error {
    using Error::Error;
};

// A function was called with out-of-contract arguments (bad index, shape mismatch).
struct ArgumentError : Error {
    using Error::Error;
};

// Configuration failed validation.
struct ValidationError : Error {
    using Error::Error;
};

// Training diverged (non-finite gradient or parameter).
struct TrainingError : Error {
    using Error::Error;
};

} // namespace saen
