#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bigeo {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text. Carries the 1-based line number of the offending row.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A feature cell that could not be read as a number.
class NonNumericCellError : public ParseError {
 public:
  NonNumericCellError(const std::string& column, const std::string& cell, std::size_t line)
      : ParseError("non-numeric value '" + cell + "' in column '" + column + "'", line),
        column_(column) {}

  const std::string& column() const noexcept { return column_; }

 private:
  std::string column_;
};

}  // namespace bigeo
