#pragma once

#include <stdexcept>
#include <string>

namespace pwsde {

/// Root of the library's exception hierarchy.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid sizes, step counts or option values passed by the caller.
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// A point outside the region where a geometric map is single-valued.
class DomainError : public Error {
public:
    using Error::Error;
};

/// The SDE violates an assumption the transformed scheme relies on.
class ModelError : public Error {
public:
    using Error::Error;
};

/// Non-finite values, failed iterations, unconverged limits.
class NumericError : public Error {
public:
    using Error::Error;
};

/// The localisation constant could not be certified.
class ConstructionError : public NumericError {
public:
    using NumericError::NumericError;
};

class SamplingError : public Error {
public:
    using Error::Error;
};

/// Malformed configuration or command line, unknown problem names.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace pwsde
