#pragma once

#include <stdexcept>
#include <string>

namespace chrism {

/// User-facing input problem: bad syntax, invalid probabilities, non-ground data.
class ParseError : public std::runtime_error {
public:
    ParseError(std::string message, int line = 0, int column = 0)
        : std::runtime_error(line > 0 ? message + " (line " + std::to_string(line) +
                                            ", column " + std::to_string(column) + ")"
                                      : message),
          line_(line),
          column_(column) {}

    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

/// Execution-time problem: instantiation errors, bad probability values,
/// exceeded limits, impossible observations.
class RuntimeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A configured limit (depth or leaf count) was exceeded.
class LimitExceeded : public RuntimeError {
public:
    using RuntimeError::RuntimeError;
};

}  // namespace chrism
