#pragma once

#include <stdexcept>
#include <string>

namespace caadam {

/// Base class of every error raised by the library. The C API maps each
/// subclass onto one status code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operand dimensions do not agree.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// A NaN or infinity appeared where only finite values are allowed.
class NonFiniteError : public Error {
public:
    using Error::Error;
};

/// Invalid hyperparameters or experiment configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Dataset ingestion or partitioning failed.
class DataError : public Error {
public:
    using Error::Error;
};

/// The network topology cannot support the requested operation.
class StructuralError : public Error {
public:
    using Error::Error;
};

/// Filesystem or serialization failure outside of dataset loading.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace caadam
