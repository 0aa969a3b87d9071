#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace gafs {

/// Base class for all library errors. The category string is stable text
/// consumed by the CLI to emit machine-parseable failure lines.
class Error : public std::runtime_error {
public:
    Error(std::string category, const std::string& message)
        : std::runtime_error(message), category_(std::move(category)) {}

    const std::string& category() const noexcept { return category_; }

private:
    std::string category_;
};

/// Filesystem problem: missing file, unreadable path, failed write.
struct IoError : Error {
    explicit IoError(const std::string& message) : Error("io", message) {}
};

/// Malformed input text. Carries the 1-based row/column of the offending token
/// when known (0 means "not applicable").
class ParseError : public Error {
public:
    ParseError(int row, int column, const std::string& message)
        : Error("parse", message), row_(row), column_(column) {}

    explicit ParseError(const std::string& message) : ParseError(0, 0, message) {}

    int row() const noexcept { return row_; }
    int column() const noexcept { return column_; }

private:
    int row_;
    int column_;
};

/// Invalid configuration or parameter value (maps to CLI exit code 2).
struct ConfigError : Error {
    explicit ConfigError(const std::string& message) : Error("validation", message) {}
};

/// Dimension mismatch between matrices/vectors.
struct ShapeError : Error {
    explicit ShapeError(const std::string& message) : Error("shape", message) {}
};

/// Non-finite values or other numeric breakdown at runtime.
struct NumericError : Error {
    explicit NumericError(const std::string& message) : Error("numeric", message) {}
};

}  // namespace gafs
