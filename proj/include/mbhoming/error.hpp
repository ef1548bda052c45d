#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mbhoming {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Configuration values that cannot describe a valid network, world or run.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Inputs whose shape does not match what the receiving stage was built for.
class InputError : public Error {
public:
    using Error::Error;
};

// Geographic fix outside the working area of the local projection.
class RangeError : public Error {
public:
    using Error::Error;
};

// Camera pose that cannot be rendered (inside a landmark).
class RenderError : public Error {
public:
    using Error::Error;
};

// Filesystem failure while reading or writing artifacts.
class IoError : public Error {
public:
    using Error::Error;
};

// Malformed weight/config/world file. Carries the byte offset (or line
// number for text formats) at which parsing failed.
class FormatError : public Error {
public:
    FormatError(const std::string& what, std::size_t offset)
        : Error(what + " (at offset " + std::to_string(offset) + ")"), offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

} // namespace mbhoming
