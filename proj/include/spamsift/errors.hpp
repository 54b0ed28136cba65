#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace spamsift {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidPatternError : public Error {
public:
    using Error::Error;
};

class InvalidUrlError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class SchemaError : public Error {
public:
    using Error::Error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class ModelFormatError : public Error {
public:
    using Error::Error;
};

/// Raised while reading a text file; carries the 1-based line number.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace spamsift
