#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace msred {

// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Dimension disagreement between two objects (cube vs cube, cube vs model, ...).
class ShapeError : public Error {
public:
    using Error::Error;
};

// An argument violates a documented precondition (even kernel size, q < 1, ...).
class ParameterError : public Error {
public:
    using Error::Error;
};

// Input is structurally fine but numerically unusable (zero reference norm, ...).
class DegenerateInputError : public Error {
public:
    using Error::Error;
};

// Malformed MSD stream: bad magic, zero dimension, truncated payload.
class FormatError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

// Config parse/validation failure; message carries the offending field path.
class ConfigError : public Error {
public:
    ConfigError(const std::string& field_path, const std::string& message)
        : Error(field_path + ": " + message), field_path_(field_path) {}

    const std::string& field_path() const { return field_path_; }

private:
    std::string field_path_;
};

// A solver iterate stopped being finite. `iteration` is the 1-based step
// at which the non-finite value was detected.
class DivergenceError : public Error {
public:
    DivergenceError(std::size_t iteration, const std::string& message)
        : Error(message), iteration_(iteration) {}

    std::size_t iteration() const { return iteration_; }

private:
    std::size_t iteration_;
};

}  // namespace msred
