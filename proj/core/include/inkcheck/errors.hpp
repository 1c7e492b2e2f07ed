#pragma once

#include <stdexcept>
#include <string>

namespace inkcheck {

// Base for everything this library throws on purpose.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Incompatible tensor/layer shapes.
struct DimensionError : Error {
    explicit DimensionError(const std::string& msg) : Error(msg) {}
};

// Caller passed an invalid value (empty word, bad fraction, ...).
struct ArgumentError : Error {
    explicit ArgumentError(const std::string& msg) : Error(msg) {}
};

// NaN/Inf encountered where finite values are required.
struct NumericError : Error {
    explicit NumericError(const std::string& msg) : Error(msg) {}
};

// Inconsistent model/run configuration.
struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// Target label cannot be aligned within the available time steps.
struct FeasibilityError : Error {
    explicit FeasibilityError(const std::string& msg) : Error(msg) {}
};

// Text cannot be encoded or rendered (unknown glyph, too long, ...).
struct EncodingError : Error {
    explicit EncodingError(const std::string& msg) : Error(msg) {}
};

// File format / filesystem problems.
struct IoError : Error {
    explicit IoError(const std::string& msg) : Error(msg) {}
};

}  // namespace inkcheck
