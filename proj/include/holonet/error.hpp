#pragma once

#include <stdexcept>
#include <string>

namespace holonet {

/// Base of all library errors. The CLI maps each subclass to an exit code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad configuration or argument (exit code 2).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Malformed or inconsistent input data (exit code 3).
class DataError : public Error {
public:
    using Error::Error;
};

/// Non-finite loss, gradient or parameter (exit code 4).
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Incompatible array shapes inside the computation graph or a layer.
class ShapeError : public Error {
public:
    using Error::Error;
};

}  // namespace holonet
