#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace idsim {

// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input text. `line()` is 1-based; 0 when not applicable.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// Well-formed input that violates a dataset invariant (duplicate ids, unknown labels, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

// Bad configuration or argument values.
class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace idsim
