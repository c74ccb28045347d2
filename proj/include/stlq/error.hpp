#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace stlq {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed formula text. Line and column are 1-based.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + what),
        message_(what),
        line_(line),
        column_(column) {}

  /// The diagnostic without the position prefix.
  const std::string& message() const noexcept { return message_; }

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::string message_;
  std::size_t line_;
  std::size_t column_;
};

/// Invalid argument, configuration field or cross-field inconsistency.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A semantic evaluation needs samples the signal does not have.
class InsufficientSamples : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Exponential reward or log-sum-exp argument outside the double-safe range.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace stlq
